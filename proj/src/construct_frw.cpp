#include "fbmlab/construct_frw.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "fbmlab/core_paths.hpp"
#include "fbmlab/errors.hpp"

namespace fbmlab {

WalkPath sample_srw(std::int64_t n, const RngStream& rng) {
  require(n >= 0, "sample_srw: n >= 0 required");
  WalkPath w;
  w.z.resize(static_cast<std::size_t>(n + 1));
  RngCursor cur(rng);
  for (std::int64_t i = 1; i <= n; ++i)
    w.z[static_cast<std::size_t>(i)] = w.z[static_cast<std::size_t>(i - 1)] + (cur.coin() ? 1 : -1);
  return w;
}

std::int64_t FrwSchedule::default_d(std::int64_t n, std::int64_t c) const {
  const double bits = std::ceil(2.0 * std::log2(4.0 * static_cast<double>(c) + 1.0));
  return std::max<std::int64_t>(8, static_cast<std::int64_t>(bits) + n);
}

std::int64_t FrwSchedule::d_for(std::int64_t n, std::int64_t c) const {
  if (n >= 1 && static_cast<std::size_t>(n) <= d.size()) {
    const std::int64_t v = d[static_cast<std::size_t>(n - 1)];
    require(v >= 1, "FrwSchedule: d_n >= 1 required");
    return v;
  }
  return default_d(n, c);
}

namespace {

// Two-sided growable storage for V_k.
class TwoSided {
 public:
  std::int8_t get(std::int64_t k) const {
    return k >= 0 ? right_.at(static_cast<std::size_t>(k)) : left_.at(static_cast<std::size_t>(-1 - k));
  }
  void set(std::int64_t k, std::int8_t v) {
    auto& vec = k >= 0 ? right_ : left_;
    const auto i = static_cast<std::size_t>(k >= 0 ? k : -1 - k);
    if (vec.size() <= i) vec.resize(i + 1, 0);
    vec[i] = v;
  }
  IncrementSeq to_seq(std::int64_t lo, std::int64_t hi) const {
    IncrementSeq s;
    s.first = lo;
    s.values.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t k = lo; k <= hi; ++k) s.values.push_back(get(k));
    return s;
  }

 private:
  std::vector<std::int8_t> right_, left_;
};

class CoinSource {
 public:
  CoinSource(const RngStream& s, bool negate) : cur_(s), negate_(negate) {}
  std::int8_t coin() { return (cur_.coin() != negate_) ? 1 : -1; }
  std::uint32_t chunk(int bits) {
    const std::uint32_t mask = bits >= 32 ? 0xFFFFFFFFu : ((1u << bits) - 1u);
    const std::uint32_t v = cur_.bits32() & mask;
    return negate_ ? (~v & mask) : v;
  }

 private:
  RngCursor cur_;
  bool negate_;
};

}  // namespace

IncrementSeq sample_frw_brw_not2rw(std::int64_t levels, const FrwSchedule& schedule, const RngStream& rng,
                                   const FrwOptions& opts) {
  require(levels >= 1, "sample_frw_brw_not2rw: levels >= 1 required");
  TwoSided V;
  {
    CoinSource seed(rng.child(0), opts.negate_coins);
    for (std::int64_t k = -1; k <= 1; ++k) V.set(k, seed.coin());
  }
  std::int64_t a = -1, b = 1;
  std::vector<LevelRecord> recs;
  for (std::int64_t n = 1; n <= levels; ++n) {
    LevelRecord r;
    r.n = n;
    r.a = a;
    r.b = b;
    r.c = std::max(-a, b);
    r.d = schedule.d_for(n, r.c);
    r.ap = a - r.d;
    r.bp = b + r.d;
    const std::int64_t L = r.block_length();
    if (L > opts.max_block_bits)
      throw InfeasibleError("coin-toss construction: level " + std::to_string(n) + " needs a block of " +
                            std::to_string(L) + " coins matched by search (limit " +
                            std::to_string(opts.max_block_bits) + "); built " + std::to_string(n - 1) +
                            " levels");
    const RngStream ls = rng.child(n);
    CoinSource ext(ls.child(0), opts.negate_coins);
    for (std::int64_t k = b + 1; k <= b + r.d; ++k) V.set(k, ext.coin());
    for (std::int64_t k = a - r.d; k <= a - 1; ++k) V.set(k, V.get(k - a + r.d + b + 1));
    std::uint32_t pattern = 0;
    for (std::int64_t i = 0; i < L; ++i)
      if (V.get(r.ap + i) > 0) pattern |= 1u << i;
    const int bits = static_cast<int>(L);
    auto search = [&](CoinSource& src, auto position) {
      for (std::int64_t j = 1; j <= opts.max_chunks; ++j) {
        const std::uint32_t c = src.chunk(bits);
        const std::int64_t start = position(j);
        for (std::int64_t i = 0; i < L; ++i) V.set(start + i, ((c >> i) & 1u) ? 1 : -1);
        if (c == pattern) return j;
      }
      throw SafetyCapError("coin-toss construction: block search exceeded the chunk cap");
    };
    CoinSource left(ls.child(1), opts.negate_coins);
    const std::int64_t jl = search(left, [&](std::int64_t j) { return r.ap - j * L; });
    CoinSource right(ls.child(2), opts.negate_coins);
    const std::int64_t jr = search(right, [&](std::int64_t j) { return r.bp + (j - 1) * L + 1; });
    r.next_a = r.ap - jl * L;
    r.next_b = r.bp + jr * L;
    recs.push_back(r);
    a = r.next_a;
    b = r.next_b;
  }
  IncrementSeq s = V.to_seq(a, b);
  s.levels = std::move(recs);
  if (auto err = check_frw_structure(s); !err.empty()) throw Error("coin-toss construction: " + err);
  return s;
}

std::string check_frw_structure(const IncrementSeq& s) {
  for (const auto& r : s.levels) {
    const std::string tag = "level " + std::to_string(r.n) + ": ";
    if (!(r.next_a < r.a && r.a < 0 && 0 < r.b && r.b < r.next_b)) return tag + "ordering a_{n+1} < a_n < 0 < b_n < b_{n+1}";
    if (r.ap != r.a - r.d || r.bp != r.b + r.d) return tag + "a', b' offsets";
    if (r.next_a < s.first || r.next_b > s.last()) return tag + "values do not cover the level";
    for (std::int64_t k = r.a - r.d; k <= r.a - 1; ++k)
      if (s.at(k) != s.at(k - r.a + r.d + r.b + 1)) return tag + "copy identity fails at k=" + std::to_string(k);
    const std::int64_t L = r.block_length();
    for (std::int64_t i = 0; i < L; ++i) {
      if (s.at(r.next_a + i) != s.at(r.ap + i)) return tag + "left matched block differs";
      if (s.at(r.next_b - L + 1 + i) != s.at(r.ap + i)) return tag + "right matched block differs";
    }
    if ((r.next_a - r.ap) % L != 0 || (r.next_b - r.bp) % L != 0) return tag + "alignment";
  }
  for (auto v : s.values)
    if (v != 1 && v != -1) return "values must be +-1";
  return {};
}

CorrelatedFrw sample_correlated_frw(std::int64_t n, const RngStream& rng) {
  require(n >= 1, "sample_correlated_frw: n >= 1 required");
  // increments of piece k
  std::vector<std::vector<std::int8_t>> pieces;
  for (std::int64_t k = -n; k < n; ++k) {
    RngCursor cur(rng.child(k));
    std::vector<std::int8_t> v{static_cast<std::int8_t>(cur.coin() ? 1 : -1)};
    do {
      v.push_back(static_cast<std::int8_t>(cur.coin() ? 1 : -1));
    } while (v.back() != v[v.size() - 2]);
    pieces.push_back(std::move(v));
  }
  std::int64_t neg_len = 0;
  for (std::int64_t p = 0; p < n; ++p) neg_len += static_cast<std::int64_t>(pieces[static_cast<std::size_t>(p)].size());
  CorrelatedFrw out;
  out.walk.first_index = -neg_len;
  out.walk.z.push_back(0);
  std::int64_t k = -neg_len;
  out.boundaries.push_back(k);
  for (const auto& v : pieces) {
    for (auto s : v) out.walk.z.push_back(out.walk.z.back() + s);
    k += static_cast<std::int64_t>(v.size());
    out.boundaries.push_back(k);
  }
  // shift so that Z_0 = 0
  const std::int64_t z0 = out.walk.at(0);
  for (auto& z : out.walk.z) z -= z0;
  return out;
}

Embedding embed_frw_to_fbm(const WalkPath& walk, double dt, const RngStream& rng) {
  walk.validate();
  require(dt > 0.0, "embed_frw_to_fbm: dt must be positive");
  std::vector<Path> lz, bes;
  for (std::int64_t j = walk.first_index; j < walk.last_index(); ++j) {
    const RngStream s = rng.child(j);
    lz.push_back(sample_bm_to_last_zero(dt, s.child(0)));
    bes.push_back(sample_bessel3_to_one(dt, s.child(1)));
  }
  Embedding e;
  auto& p = e.path;
  p.dt = dt;
  p.first_rank = walk.first_index;
  p.values.push_back(static_cast<double>(walk.z.front()));
  e.m_index.push_back(0);
  for (std::size_t i = 0; i < lz.size(); ++i) {
    const auto zj = static_cast<double>(walk.z[i]);
    const auto sgn = static_cast<double>(walk.z[i + 1] - walk.z[i]);
    const auto& a = lz[i].values;
    for (std::size_t t = 1; t < a.size(); ++t) p.values.push_back(zj + a[t]);
    p.values.back() = zj;  // the last zero itself
    const auto& b = bes[i].values;
    for (std::size_t t = 1; t < b.size(); ++t) p.values.push_back(zj + sgn * b[t]);
    p.values.back() = static_cast<double>(walk.z[i + 1]);
    e.m_index.push_back(static_cast<std::int64_t>(p.values.size()) - 1);
  }
  p.origin_index = e.m_index[static_cast<std::size_t>(-walk.first_index)];
  p.boundaries = e.m_index;
  for (auto z : walk.z) p.boundary_values.push_back(static_cast<double>(z));
  p.horizon_neg = static_cast<double>(p.origin_index) * dt;
  p.horizon_pos = static_cast<double>(static_cast<std::int64_t>(p.values.size()) - 1 - p.origin_index) * dt;
  p.validate();
  return e;
}

WalkPath discretize_2bm_to_2rw(const TwoSidedPath& path, std::optional<std::int64_t> k_min,
                               std::optional<std::int64_t> k_max) {
  require(path.in_range(path.origin_index), "discretize_2bm_to_2rw: origin not materialized");
  const auto& v = path.values;
  const auto n = static_cast<std::int64_t>(v.size());
  std::vector<std::int64_t> fwd{0}, bwd;
  for (std::int64_t u = path.origin_index, i = u + 1; i < n; ++i) {
    if (k_max && static_cast<std::int64_t>(fwd.size()) - 1 >= *k_max) break;
    const double d = v[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(u)];
    if (std::abs(d) >= 1.0) {
      fwd.push_back(fwd.back() + (d > 0 ? 1 : -1));
      u = i;
    }
  }
  std::int64_t zb = 0;
  for (std::int64_t u = path.origin_index, i = u - 1; i >= 0; --i) {
    if (k_min && -static_cast<std::int64_t>(bwd.size()) <= *k_min) break;
    const double d = v[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(u)];
    if (std::abs(d) >= 1.0) {
      zb += d > 0 ? 1 : -1;
      bwd.push_back(zb);
      u = i;
    }
  }
  const auto have_max = static_cast<std::int64_t>(fwd.size()) - 1;
  const auto have_min = -static_cast<std::int64_t>(bwd.size());
  if ((k_max && have_max < *k_max) || (k_min && have_min > *k_min))
    throw PreconditionError("discretize_2bm_to_2rw: path exhausted before the requested range");
  WalkPath w;
  w.first_index = have_min;
  for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) w.z.push_back(*it);
  for (auto z : fwd) w.z.push_back(z);
  return w;
}

MinTimesDemo counterexample_min_times(const RngStream& rng, std::int64_t runs) {
  require(runs >= 1, "counterexample_min_times: runs >= 1 required");
  MinTimesDemo d;
  d.runs = runs;
  std::int64_t plus = 0, plus_s = 0, plus_t = 0;
  for (std::int64_t r = 0; r < runs; ++r) {
    // unit pieces of a two-sided BM: inc(k) = X_{k+1} - X_k
    const RngStream s = rng.child(r);
    auto inc = [&](std::int64_t k) { return s.normal_at(static_cast<std::uint64_t>(k)); };
    std::int64_t T;
    if (inc(0) > 0) {
      T = 1;
    } else {
      std::int64_t N = 0;
      while (inc(-(N + 1)) > 0) ++N;
      T = -N;
    }
    if (inc(0) > 0 && T != 1) d.t_is_one_when_up = false;
    const std::int64_t m = std::min<std::int64_t>(0, T);
    plus += inc(m) > 0;
    plus_s += inc(0) > 0;
    plus_t += inc(T) > 0;
  }
  d.p_plus = static_cast<double>(plus) / static_cast<double>(runs);
  d.p_plus_s = static_cast<double>(plus_s) / static_cast<double>(runs);
  d.p_plus_t = static_cast<double>(plus_t) / static_cast<double>(runs);
  return d;
}

}  // namespace fbmlab
