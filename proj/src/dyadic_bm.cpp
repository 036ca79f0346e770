#include "fbmlab/dyadic_bm.hpp"

#include <bit>
#include <cmath>

#include "fbmlab/errors.hpp"

namespace fbmlab {

namespace {
// exp(-30) ~ 1e-13: bridges with a smaller crossing chance are skipped.
constexpr double kPruneExponent = 30.0;
constexpr std::uint64_t kCrossTag = 0xC405;
}  // namespace

DyadicBM::DyadicBM(const RngStream& stream, double dt, int k0) : stream_(stream), dt_(dt), k0_(k0) {
  require(dt > 0.0, "DyadicBM: dt must be positive");
  require(k0 >= 1 && k0 < kMaxLog2, "DyadicBM: bad base block size");
}

bool DyadicBM::may_touch_below(double a, double b, double level, double h) {
  const double da = a - level;
  const double db = b - level;
  if (da <= 0.0 || db <= 0.0) return true;
  return 2.0 * da * db / h < kPruneExponent;
}

bool DyadicBM::may_touch_above(double a, double b, double level, double h) {
  return may_touch_below(-a, -b, -level, h);
}

double DyadicBM::bridge_crossing(double a, double b, double level_a, double level_b, double h) {
  const double da = a - level_a;
  const double db = b - level_b;
  if (da <= 0.0 || db <= 0.0) return 1.0;
  return std::exp(-2.0 * da * db / h);
}

DyadicBM::Block DyadicBM::block(int b) const {
  if (b + k0_ > kMaxLog2) throw SafetyCapError("DyadicBM: time index beyond 2^62 steps");
  while (static_cast<int>(ends_.size()) <= b) {
    const int k = static_cast<int>(ends_.size());
    const double prev = k == 0 ? 0.0 : ends_.back();
    const std::int64_t len = k == 0 ? (std::int64_t{1} << k0_) : (std::int64_t{1} << (k0_ + k - 1));
    const double z = stream_.normal_at(0, static_cast<std::uint64_t>(k) + 1);
    ends_.push_back(prev + std::sqrt(static_cast<double>(len) * dt_) * z);
  }
  Block bl;
  bl.lo = b == 0 ? 0 : (std::int64_t{1} << (k0_ + b - 1));
  bl.hi = std::int64_t{1} << (k0_ + b);
  bl.va = b == 0 ? 0.0 : ends_[static_cast<std::size_t>(b - 1)];
  bl.vb = ends_[static_cast<std::size_t>(b)];
  return bl;
}

int DyadicBM::block_of(std::int64_t i) const {
  if (i <= (std::int64_t{1} << k0_)) return 0;
  const int w = std::bit_width(static_cast<std::uint64_t>(i - 1));  // i in (2^(w-1), 2^w]
  return w - k0_;
}

double DyadicBM::mid(int b, std::uint64_t node, std::int64_t len, double va, double vb) const {
  return 0.5 * (va + vb) +
         std::sqrt(0.25 * static_cast<double>(len) * dt_) *
             stream_.normal_at(node, static_cast<std::uint64_t>(b) + 1);
}

double DyadicBM::value(std::int64_t i) const {
  require(i >= 0, "DyadicBM: negative index");
  if (i == 0) return 0.0;
  const int b = block_of(i);
  Block bl = block(b);
  std::int64_t lo = bl.lo, hi = bl.hi;
  double va = bl.va, vb = bl.vb;
  std::uint64_t node = 1;
  while (true) {
    if (i == lo) return va;
    if (i == hi) return vb;
    const std::int64_t m = lo + (hi - lo) / 2;
    const double vm = mid(b, node, hi - lo, va, vb);
    if (i < m) {
      hi = m;
      vb = vm;
      node = 2 * node;
    } else {
      lo = m;
      va = vm;
      node = 2 * node + 1;
    }
  }
}

void DyadicBM::fill_node(int b, std::uint64_t node, std::int64_t lo, std::int64_t hi, double va,
                         double vb, std::int64_t first, std::int64_t last,
                         std::span<double> out) const {
  if (hi < first || lo > last) return;
  if (lo >= first) out[static_cast<std::size_t>(lo - first)] = va;
  if (hi <= last) out[static_cast<std::size_t>(hi - first)] = vb;
  if (hi - lo < 2) return;
  const std::int64_t m = lo + (hi - lo) / 2;
  const double vm = mid(b, node, hi - lo, va, vb);
  fill_node(b, 2 * node, lo, m, va, vm, first, last, out);
  fill_node(b, 2 * node + 1, m, hi, vm, vb, first, last, out);
}

void DyadicBM::fill(std::int64_t first, std::int64_t last, std::span<double> out) const {
  require(first >= 0 && last >= first, "DyadicBM::fill: bad range");
  require(out.size() == static_cast<std::size_t>(last - first + 1), "DyadicBM::fill: size mismatch");
  if (first == 0) out[0] = 0.0;
  const int b_end = last == 0 ? 0 : block_of(last);
  for (int b = first == 0 ? 0 : block_of(first); b <= b_end; ++b) {
    const Block bl = block(b);
    fill_node(b, 1, bl.lo, bl.hi, bl.va, bl.vb, first, last, out);
  }
}

std::vector<double> DyadicBM::values(std::int64_t first, std::int64_t last) const {
  std::vector<double> v(static_cast<std::size_t>(last - first + 1));
  fill(first, last, v);
  return v;
}

std::optional<std::int64_t> DyadicBM::search_node(const Barrier& barrier, int b, std::uint64_t node,
                                                  std::int64_t lo, std::int64_t hi, double va,
                                                  double vb, std::int64_t limit) const {
  if (lo >= limit) return std::nullopt;
  const bool end_hit = barrier.hit(hi, vb);
  if (hi - lo == 1) {
    if (hi > limit) return std::nullopt;
    if (end_hit) return hi;
    const double p = barrier.step_crossing(lo, va, vb);
    if (p > 0.0 && stream_.uniform_at(static_cast<std::uint64_t>(hi), kCrossTag) < p) return hi;
    return std::nullopt;
  }
  if (!end_hit && !barrier.may_cross(lo, hi, va, vb)) return std::nullopt;
  const std::int64_t m = lo + (hi - lo) / 2;
  const double vm = mid(b, node, hi - lo, va, vb);
  if (auto r = search_node(barrier, b, 2 * node, lo, m, va, vm, limit)) return r;
  return search_node(barrier, b, 2 * node + 1, m, hi, vm, vb, limit);
}

std::optional<std::int64_t> DyadicBM::first_passage(const Barrier& barrier,
                                                    std::int64_t limit) const {
  for (int b = 0;; ++b) {
    if (b + k0_ > kMaxLog2) return std::nullopt;
    const Block bl = block(b);
    if (bl.lo >= limit) return std::nullopt;
    if (auto r = search_node(barrier, b, 1, bl.lo, bl.hi, bl.va, bl.vb, limit)) return r;
  }
}

}  // namespace fbmlab
