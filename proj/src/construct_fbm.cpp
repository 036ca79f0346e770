#include "fbmlab/construct_fbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fbmlab/eigen.hpp"
#include "fbmlab/errors.hpp"

namespace fbmlab {

namespace {

std::int64_t steps_for(double t, double dt) { return std::llround(t / dt); }

std::int64_t add_checked(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw SafetyCapError("boundary index overflow");
  return r;
}

std::int64_t sub_checked(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw SafetyCapError("boundary index overflow");
  return r;
}

}  // namespace

TwoSidedPath concat_decomposable(const PieceSpec& spec, std::int64_t neg, std::int64_t pos,
                                 const RngStream& rng, const ConcatOptions& opts) {
  spec.validate();
  require(neg >= 0 && pos >= 0, "concat_decomposable: piece counts must be >= 0");
  const auto n = static_cast<std::size_t>(neg + pos);
  std::vector<std::unique_ptr<Piece>> pieces(n);
  std::vector<std::int64_t> S(n + 1);
  std::vector<double> X(n + 1);
  const auto origin = static_cast<std::size_t>(neg);
  S[origin] = 0;
  X[origin] = 0.0;
  bool repeated = false;
  for (std::int64_t k = -1; k >= -neg; --k) {
    const auto p = static_cast<std::size_t>(k + neg);
    pieces[p] = make_piece(spec, k, rng);
    const std::int64_t d = pieces[p]->duration();
    repeated = repeated || d == 0;
    S[p] = sub_checked(S[p + 1], d);
    X[p] = X[p + 1] - pieces[p]->terminal_value();
  }
  for (std::int64_t k = 0; k < pos; ++k) {
    const auto p = static_cast<std::size_t>(k + neg);
    pieces[p] = make_piece(spec, k, rng);
    const std::int64_t d = pieces[p]->duration();
    repeated = repeated || d == 0;
    S[p + 1] = add_checked(S[p], d);
    X[p + 1] = X[p] + pieces[p]->terminal_value();
  }

  TwoSidedPath out;
  out.dt = spec.dt;
  out.first_rank = -neg;
  out.boundary_values = X;
  out.repeated_boundaries = repeated;
  out.horizon_neg = -static_cast<double>(S.front()) * spec.dt;
  out.horizon_pos = static_cast<double>(S.back()) * spec.dt;
  if (opts.boundaries_only) {
    out.windowed = true;
    out.origin_index = 0;
    out.boundaries = S;
    return out;
  }
  std::int64_t g_lo = S.front(), g_hi = S.back();
  if (opts.window_lo) g_lo = std::max(g_lo, static_cast<std::int64_t>(std::floor(*opts.window_lo / spec.dt + 1e-9)));
  if (opts.window_hi) g_hi = std::min(g_hi, static_cast<std::int64_t>(std::ceil(*opts.window_hi / spec.dt - 1e-9)));
  require(g_lo <= g_hi, "concat_decomposable: empty window");
  out.windowed = g_lo != S.front() || g_hi != S.back();
  if (g_hi - g_lo + 1 > opts.max_values)
    throw SafetyCapError("concat_decomposable: " + std::to_string(g_hi - g_lo + 1) +
                         " values exceed the materialization cap");
  out.values.assign(static_cast<std::size_t>(g_hi - g_lo + 1), 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const std::int64_t a = std::max(S[p], g_lo);
    const std::int64_t b = std::min(S[p + 1], g_hi);
    if (a > b) continue;
    std::span<double> dst(out.values.data() + (a - g_lo), static_cast<std::size_t>(b - a + 1));
    pieces[p]->fill(a - S[p], b - S[p], dst);
    for (auto& v : dst) v += X[p];
    if (b == S[p + 1]) dst.back() = X[p + 1];
  }
  if (S[origin] >= g_lo && S[origin] <= g_hi) out.values[static_cast<std::size_t>(-g_lo)] = 0.0;
  out.origin_index = -g_lo;
  out.boundaries.resize(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) out.boundaries[i] = S[i] - g_lo;
  return out;
}

Path forward_window(const PieceSpec& spec, std::int64_t n, double horizon, const RngStream& rng) {
  spec.validate();
  require(horizon > 0.0, "forward_window: horizon must be positive");
  const std::int64_t H = steps_for(horizon, spec.dt);
  require(H >= 1, "forward_window: horizon shorter than one step");
  std::vector<double> v(static_cast<std::size_t>(H + 1), 0.0);
  std::int64_t at = 0;
  double base = 0.0;
  std::int64_t zero_run = 0;
  for (std::int64_t k = n; at < H; ++k) {
    auto piece = make_piece(spec, k, rng);
    const auto d = piece->duration_within(H - at);
    if (!d) {
      std::span<double> dst(v.data() + at, static_cast<std::size_t>(H - at + 1));
      piece->fill(0, H - at, dst);
      for (auto& x : dst) x += base;
      break;
    }
    if (*d == 0) {
      if (++zero_run > 100'000'000) throw SafetyCapError("forward_window: only zero-length pieces");
      continue;
    }
    zero_run = 0;
    std::span<double> dst(v.data() + at, static_cast<std::size_t>(*d + 1));
    piece->fill(0, *d, dst);
    for (auto& x : dst) x += base;
    base += piece->terminal_value();
    dst.back() = base;
    at += *d;
  }
  return Path(TimeGrid{0.0, spec.dt, H}, std::move(v));
}

std::int64_t pieces_to_reach(const PieceSpec& spec, double horizon, const RngStream& rng,
                             std::int64_t max_pieces) {
  const std::int64_t H = steps_for(horizon, spec.dt);
  std::int64_t reach = 0;
  for (std::int64_t m = 1; m <= max_pieces; ++m) {
    auto piece = make_piece(spec, -m, rng);
    reach = add_checked(reach, piece->duration());
    if (reach >= H) return m;
  }
  throw SafetyCapError("pieces_to_reach: more than " + std::to_string(max_pieces) + " pieces needed");
}

Path backward_window(const PieceSpec& spec, double horizon, const RngStream& rng,
                     std::int64_t max_pieces) {
  spec.validate();
  require(horizon > 0.0, "backward_window: horizon must be positive");
  const std::int64_t H = steps_for(horizon, spec.dt);
  const std::int64_t m = pieces_to_reach(spec, horizon, rng, max_pieces);
  ConcatOptions opts;
  opts.window_lo = -static_cast<double>(H) * spec.dt;
  opts.window_hi = 0.0;
  auto tp = concat_decomposable(spec, m, 0, rng, opts);
  require(static_cast<std::int64_t>(tp.values.size()) == H + 1, "backward_window: window size mismatch");
  return Path(TimeGrid{-static_cast<double>(H) * spec.dt, spec.dt, H}, std::move(tp.values));
}

// ---- Bessel example ----

PieceSpec bessel_spec(double dt, std::int64_t max_steps) {
  PieceSpec s;
  s.rule = HitLevel{-1.0};
  s.dt = dt;
  s.max_steps = max_steps;
  return s;
}

TwoSidedPath sample_bessel_example(std::int64_t neg_pieces, double dt, const RngStream& rng,
                                   const ConcatOptions& opts) {
  require(neg_pieces >= 1, "sample_bessel_example: neg_pieces >= 1 required");
  auto p = concat_decomposable(bessel_spec(dt), neg_pieces, 0, rng, opts);
  // X_t >= -k for t <= S_k: on piece j (from S_j to S_{j+1}) X stays >= -(j+1)
  for (std::int64_t j = -neg_pieces; j < 0; ++j) {
    const std::int64_t a = std::max<std::int64_t>(0, p.boundary_index(j));
    const std::int64_t b = std::min<std::int64_t>(static_cast<std::int64_t>(p.values.size()) - 1,
                                                  p.boundary_index(j + 1));
    for (std::int64_t i = a; i <= b; ++i)
      if (p.values[static_cast<std::size_t>(i)] < -static_cast<double>(j + 1) - 1e-12)
        throw Error("sample_bessel_example: lower envelope violated");
  }
  return p;
}

// ---- skew ----

PieceSpec skew_spec(const SkewParams& params, std::int64_t max_steps) {
  params.validate();
  PieceSpec s;
  s.rule = LocalTimeTarget{1.0};
  s.dt = params.dt;
  s.beta = params.beta;
  s.max_steps = max_steps;
  return s;
}

SkewFbmPath sample_skew_fbm(const SkewParams& params, std::int64_t neg_pieces, const RngStream& rng,
                            std::int64_t pos_pieces) {
  const PieceSpec spec = skew_spec(params);
  SkewFbmPath out{concat_decomposable(spec, neg_pieces, pos_pieces, rng), {}};
  const auto& tp = out.path;
  out.local_time.assign(tp.values.size(), 0.0);
  for (std::int64_t k = -neg_pieces; k < pos_pieces; ++k) {
    auto piece = make_piece(spec, k, rng);
    auto* sp = dynamic_cast<SkewPiece*>(piece.get());
    const double n_exc = static_cast<double>(sp->excursions());
    const std::int64_t a = tp.boundary_index(k);
    const std::int64_t b = tp.boundary_index(k + 1);
    for (std::int64_t i = a; i <= b; ++i)
      out.local_time[static_cast<std::size_t>(i)] =
          static_cast<double>(k) + static_cast<double>(sp->returns_up_to(i - a)) / n_exc;
  }
  return out;
}

// ---- max range ----

void MaxRangeSchedule::validate() const {
  require(!levels.empty(), "MaxRangeSchedule: no levels");
  double mass = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    require(levels[i] > 0.0, "MaxRangeSchedule: levels must be positive");
    if (i > 0) require(levels[i] > levels[i - 1], "MaxRangeSchedule: levels must increase");
    const double k = static_cast<double>(i + 1);
    mass += 2.0 * std::exp2(-k * k - 1.0);
  }
  require(mass < 1.0, "MaxRangeSchedule: total probability must be < 1");
}

MaxRangeSchedule MaxRangeSchedule::default_schedule(int count) {
  MaxRangeSchedule s;
  for (int k = 1; k <= count; ++k) s.levels.push_back(std::pow(4.0, k));
  return s;
}

double draw_maxrange_y(const MaxRangeSchedule& schedule, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < schedule.levels.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double p = std::exp2(-k * k - 1.0);
    if (u < acc + p) return schedule.levels[i];
    if (u < acc + 2.0 * p) return -schedule.levels[i];
    acc += 2.0 * p;
  }
  return 0.0;
}

PieceSpec maxrange_spec(const MaxRangeSchedule& schedule, double dt, std::int64_t max_steps) {
  schedule.validate();
  unit_window_steps(dt);
  PieceSpec s;
  s.dt = dt;
  s.max_steps = max_steps;
  s.mode = PieceSpec::Mode::per_index;
  s.rule = WindowedIncrement{0.0, 1.0};
  s.schedule = [schedule](std::int64_t, const RngStream& r) -> std::optional<StoppingRule> {
    return WindowedIncrement{draw_maxrange_y(schedule, r.uniform_at(0)), 1.0};
  };
  return s;
}

TwoSidedPath sample_maxrange_fbm(const MaxRangeSchedule& schedule, std::int64_t neg_pieces, double dt,
                                 const RngStream& rng, const ConcatOptions& opts) {
  return concat_decomposable(maxrange_spec(schedule, dt), neg_pieces, 0, rng, opts);
}

// ---- integrable ----

PieceSpec integrable_spec(double dt, std::int64_t max_steps) {
  PieceSpec s;
  s.rule = ExitInterval{-1.0, 1.0};
  s.dt = dt;
  s.max_steps = max_steps;
  return s;
}

TwoSidedPath sample_integrable_fbm(const PieceSpec& spec, std::int64_t neg_pieces,
                                   std::int64_t pos_pieces, const RngStream& rng,
                                   const ConcatOptions& opts) {
  require(spec.mode == PieceSpec::Mode::iid, "sample_integrable_fbm: needs i.i.d. pieces");
  require(!std::holds_alternative<HitLevel>(spec.rule) && !std::holds_alternative<ParabolicDriftHit>(spec.rule) &&
              !std::holds_alternative<LocalTimeTarget>(spec.rule),
          "sample_integrable_fbm: rule has a non-integrable duration");
  return concat_decomposable(spec, neg_pieces, pos_pieces, rng, opts);
}

// ---- heavy tail ----

double heavy_c1(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "heavy_c1: alpha must lie in (0, 1)");
  return eigen::inverse_lambda0_c1(0.5 * (1.0 + alpha));
}

PieceSpec heavy_spec(double c1, double dt, std::int64_t max_steps) {
  PieceSpec s;
  s.rule = ParabolicDriftHit{c1};
  s.dt = dt;
  s.max_steps = max_steps;
  return s;
}

TwoSidedPath sample_nonbbm_heavy(double alpha, double c1, std::int64_t neg_pieces, double dt,
                                 const RngStream& rng, const ConcatOptions& opts) {
  require(alpha > 0.0 && alpha < 1.0, "sample_nonbbm_heavy: alpha must lie in (0, 1)");
  require(c1 < 1.0, "sample_nonbbm_heavy: c1 < 1 required");
  return concat_decomposable(heavy_spec(c1, dt), neg_pieces, 0, rng, opts);
}

// ---- windowed schedule ----

void WindowedSchedule::validate() const {
  require(!p.empty() && p.size() == k.size() && p.size() == c.size(),
          "WindowedSchedule: p, k, c must have equal nonzero length");
  for (std::size_t j = 0; j < p.size(); ++j) {
    require(p[j] > 0.0 && p[j] <= 1.0, "WindowedSchedule: p_j must lie in (0, 1]");
    require(k[j] >= 1, "WindowedSchedule: k_j >= 1 required");
    if (j > 0) require(c[j] > c[j - 1], "WindowedSchedule: c_j must increase");
  }
}

std::int64_t WindowedSchedule::pieces(std::int64_t blocks) const {
  require(blocks >= 0 && blocks <= static_cast<std::int64_t>(k.size()),
          "WindowedSchedule: schedule has only " + std::to_string(k.size()) + " blocks");
  std::int64_t n = 0;
  for (std::int64_t j = 0; j < blocks; ++j) n += k[static_cast<std::size_t>(j)];
  return n;
}

std::int64_t WindowedSchedule::block_of(std::int64_t i) const {
  std::int64_t end = 0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    end += k[j];
    if (i <= end) return static_cast<std::int64_t>(j);
  }
  return -1;
}

MomentEstimate estimate_window_moment(double c, double alpha, double dt, std::int64_t n,
                                      const RngStream& rng, std::int64_t max_steps) {
  require(n >= 2, "estimate_window_moment: n >= 2 required");
  double sum = 0.0, sum2 = 0.0;
  std::int64_t used = 0, censored = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    GridPiece piece(WindowedIncrement{c, 1.0}, dt, max_steps, rng.child(i));
    try {
      const double t = std::pow(static_cast<double>(piece.duration()) * dt, alpha);
      sum += t;
      sum2 += t * t;
      ++used;
    } catch (const SafetyCapError&) {
      ++censored;
    }
  }
  require(used >= 2, "estimate_window_moment: every run hit the cap");
  const double m = sum / static_cast<double>(used);
  const double var = (sum2 - static_cast<double>(used) * m * m) / static_cast<double>(used - 1);
  return {m, std::sqrt(std::max(var, 0.0) / static_cast<double>(used)), censored};
}

WindowedSchedule windowed_schedule_from(const std::vector<double>& c,
                                        const std::function<double(double)>& lambda) {
  WindowedSchedule s;
  s.c = c;
  for (double cj : c) {
    const double lam = lambda(cj);
    require(lam >= 1.0, "windowed_schedule_from: lambda(c) >= 1 expected since T >= 1");
    s.p.push_back(1.0 / lam);
    s.k.push_back(static_cast<std::int64_t>(std::ceil(lam - 1e-12)));
  }
  s.validate();
  return s;
}

PieceSpec windowed_spec(const WindowedSchedule& schedule, double dt, std::int64_t max_steps) {
  schedule.validate();
  unit_window_steps(dt);
  PieceSpec s;
  s.dt = dt;
  s.max_steps = max_steps;
  s.mode = PieceSpec::Mode::per_index;
  s.schedule = [schedule](std::int64_t k, const RngStream& r) -> std::optional<StoppingRule> {
    if (k >= 0) return FixedDuration{1.0};
    const std::int64_t j = schedule.block_of(-k);
    if (j < 0)
      throw PreconditionError("windowed schedule undefined for piece " + std::to_string(k));
    if (r.uniform_at(0) < schedule.p[static_cast<std::size_t>(j)])
      return WindowedIncrement{schedule.c[static_cast<std::size_t>(j)], 1.0};
    return std::nullopt;
  };
  return s;
}

TwoSidedPath sample_nonbbm_windowed(const WindowedSchedule& schedule, std::int64_t neg_blocks, double dt,
                                    const RngStream& rng, std::int64_t pos_pieces,
                                    const ConcatOptions& opts) {
  return concat_decomposable(windowed_spec(schedule, dt), schedule.pieces(neg_blocks), pos_pieces, rng,
                             opts);
}

// ---- registry ----

const std::vector<std::string>& sampler_ids() {
  static const std::vector<std::string> ids{"bessel_example", "skew_fbm",        "maxrange", "integrable",
                                            "nonbbm_heavy",   "nonbbm_windowed", "generic"};
  return ids;
}

namespace {

double jnum(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("sampler field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

template <class T>
std::vector<T> jvec(const nlohmann::json& j, const char* key) {
  if (!j.at(key).is_array()) throw ConfigError(std::string("sampler field '") + key + "' must be an array");
  try {
    return j.at(key).get<std::vector<T>>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("sampler field '") + key + "' has the wrong element type");
  }
}

}  // namespace

// E inf{t >= 1 : B_t - B_{t-1} = c} for c = 1, 1.25, 1.5, fine-grid oracle (dt = 1e-4).
constexpr double kWindowLevels[] = {1.0, 1.25, 1.5};
constexpr double kWindowMoments[] = {2.532, 3.010, 4.191};

WindowedSchedule default_windowed_schedule() {
  const std::vector<double> c(std::begin(kWindowLevels), std::end(kWindowLevels));
  return windowed_schedule_from(c, [](double x) {
    for (std::size_t i = 0; i < std::size(kWindowLevels); ++i)
      if (x == kWindowLevels[i]) return kWindowMoments[i];
    throw PreconditionError("no tabulated window moment");
  });
}

PieceSpec sampler_spec(const std::string& id, const nlohmann::json& params, double dt) {
  const auto cap = static_cast<std::int64_t>(jnum(params, "max_steps", static_cast<double>(kDefaultMaxSteps)));
  try {
    if (id == "bessel_example") return bessel_spec(dt, cap);
    if (id == "skew_fbm") return skew_spec(SkewParams{jnum(params, "beta", 0.0), dt}, cap);
    if (id == "maxrange") {
      MaxRangeSchedule s = MaxRangeSchedule::default_schedule();
      if (params.contains("levels")) s.levels = jvec<double>(params, "levels");
      return maxrange_spec(s, dt, cap);
    }
    if (id == "integrable") {
      PieceSpec s = integrable_spec(dt, cap);
      s.rule = ExitInterval{jnum(params, "lo", -1.0), jnum(params, "hi", 1.0)};
      validate_rule(s.rule);
      return s;
    }
    if (id == "nonbbm_heavy") {
      const double c1 = params.contains("c1") ? jnum(params, "c1", 0.0) : heavy_c1(jnum(params, "alpha", 0.5));
      return heavy_spec(c1, dt, cap);
    }
    if (id == "nonbbm_windowed") {
      WindowedSchedule s;
      if (params.contains("c")) {
        s.c = jvec<double>(params, "c");
        s.p = jvec<double>(params, "p");
        s.k = jvec<std::int64_t>(params, "k");
      } else {
        s = default_windowed_schedule();
      }
      return windowed_spec(s, dt, cap);
    }
    if (id == "generic") {
      if (!params.contains("rule")) throw ConfigError("generic sampler needs a 'rule'");
      PieceSpec s;
      s.rule = rule_from_json(params.at("rule"));
      s.dt = dt;
      s.beta = jnum(params, "beta", 0.0);
      s.max_steps = cap;
      s.validate();
      return s;
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("sampler '") + id + "': " + e.what());
  }
  throw ConfigError("unknown sampler id '" + id + "'");
}

}  // namespace fbmlab
