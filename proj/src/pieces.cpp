#include "fbmlab/pieces.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbmlab/errors.hpp"
#include "fbmlab/skew.hpp"

namespace fbmlab {

namespace {

constexpr std::int64_t kScanChunk = std::int64_t{1} << 16;

class LowerLevel final : public Barrier {
 public:
  LowerLevel(double level, double dt) : level_(level), dt_(dt) {}
  bool hit(std::int64_t, double v) const override { return v <= level_; }
  bool may_cross(std::int64_t lo, std::int64_t hi, double va, double vb) const override {
    return DyadicBM::may_touch_below(va, vb, level_, static_cast<double>(hi - lo) * dt_);
  }
  double step_crossing(std::int64_t, double va, double vb) const override {
    return DyadicBM::bridge_crossing(va, vb, level_, level_, dt_);
  }

 private:
  double level_, dt_;
};

class UpperLevel final : public Barrier {
 public:
  UpperLevel(double level, double dt) : level_(level), dt_(dt) {}
  bool hit(std::int64_t, double v) const override { return v >= level_; }
  bool may_cross(std::int64_t lo, std::int64_t hi, double va, double vb) const override {
    return DyadicBM::may_touch_above(va, vb, level_, static_cast<double>(hi - lo) * dt_);
  }
  double step_crossing(std::int64_t, double va, double vb) const override {
    return DyadicBM::bridge_crossing(-va, -vb, -level_, -level_, dt_);
  }

 private:
  double level_, dt_;
};

class Strip final : public Barrier {
 public:
  Strip(double lo, double hi, double dt) : lo_(lo), hi_(hi), dt_(dt) {}
  bool hit(std::int64_t, double v) const override { return v <= lo_ || v >= hi_; }
  bool may_cross(std::int64_t lo, std::int64_t hi, double va, double vb) const override {
    const double h = static_cast<double>(hi - lo) * dt_;
    return DyadicBM::may_touch_below(va, vb, lo_, h) || DyadicBM::may_touch_above(va, vb, hi_, h);
  }
  double step_crossing(std::int64_t, double va, double vb) const override {
    return std::min(1.0, DyadicBM::bridge_crossing(va, vb, lo_, lo_, dt_) +
                             DyadicBM::bridge_crossing(-va, -vb, -hi_, -hi_, dt_));
  }

 private:
  double lo_, hi_, dt_;
};

// v <= -1 + c1 sqrt(t)
class Parabola final : public Barrier {
 public:
  Parabola(double c1, double dt) : c1_(c1), dt_(dt) {}
  double at(std::int64_t i) const { return -1.0 + c1_ * std::sqrt(static_cast<double>(i) * dt_); }
  bool hit(std::int64_t i, double v) const override { return v <= at(i); }
  bool may_cross(std::int64_t lo, std::int64_t hi, double va, double vb) const override {
    const double top = std::max(at(lo), at(hi));
    return DyadicBM::may_touch_below(va, vb, top, static_cast<double>(hi - lo) * dt_);
  }
  double step_crossing(std::int64_t lo, double va, double vb) const override {
    return DyadicBM::bridge_crossing(va, vb, at(lo), at(lo + 1), dt_);
  }

 private:
  double c1_, dt_;
};

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

}  // namespace

std::int64_t Piece::duration() {
  if (auto d = duration_within(cap_)) return *d;
  throw SafetyCapError("piece did not stop within " + std::to_string(cap_) + " steps");
}

void ZeroPiece::fill(std::int64_t first, std::int64_t last, std::span<double> out) {
  require(first == 0 && last == 0 && out.size() == 1, "ZeroPiece: only step 0 exists");
  out[0] = 0.0;
}

GridPiece::GridPiece(const StoppingRule& rule, double dt, std::int64_t cap, const RngStream& stream)
    : Piece(cap), rule_(rule), bm_(stream, dt) {
  validate_rule(rule);
  require(!std::holds_alternative<LocalTimeTarget>(rule), "GridPiece: local-time rules need a skew piece");
  if (std::holds_alternative<WindowedIncrement>(rule)) unit_window_steps(dt);
}

std::optional<std::int64_t> GridPiece::duration_within(std::int64_t limit) {
  if (stop_) return *stop_ <= limit ? stop_ : std::nullopt;
  if (limit <= searched_) return std::nullopt;
  const std::int64_t lim = std::min(limit, cap_);
  const double dt = bm_.dt();
  std::optional<std::int64_t> found = std::visit(
      overloaded{
          [&](const FixedDuration& r) -> std::optional<std::int64_t> {
            return std::max<std::int64_t>(1, std::llround(r.t / dt));
          },
          [&](const HitLevel& r) -> std::optional<std::int64_t> {
            if (r.level == 0.0) return 0;
            if (r.level < 0.0) return bm_.first_passage(LowerLevel(r.level, dt), lim);
            return bm_.first_passage(UpperLevel(r.level, dt), lim);
          },
          [&](const ParabolicDriftHit& r) -> std::optional<std::int64_t> {
            return bm_.first_passage(Parabola(r.c1, dt), lim);
          },
          [&](const ExitInterval& r) -> std::optional<std::int64_t> {
            return bm_.first_passage(Strip(r.lo, r.hi, dt), lim);
          },
          [&](const WindowedIncrement&) { return scan_windowed(lim); },
          [&](const RegionTime&) { return scan_region(lim); },
          [&](const LocalTimeTarget&) -> std::optional<std::int64_t> { return std::nullopt; },
      },
      rule_);
  if (found && *found > cap_) {
    throw SafetyCapError("piece duration " + std::to_string(*found) + " exceeds the step cap");
  }
  if (found) {
    stop_ = found;
    return *found <= limit ? found : std::nullopt;
  }
  searched_ = std::max(searched_, lim);
  if (limit > cap_)
    throw SafetyCapError("piece did not stop within " + std::to_string(cap_) + " steps");
  return std::nullopt;
}

std::optional<std::int64_t> GridPiece::scan_windowed(std::int64_t lim) {
  const auto& r = std::get<WindowedIncrement>(rule_);
  const double dt = bm_.dt();
  const std::int64_t w = unit_window_steps(dt);
  const auto m0 = static_cast<std::int64_t>(std::ceil(r.t_min / dt - 1e-9));
  // Rescans from t_min each call; callers grow the limit geometrically.
  double prev = 0.0;
  std::int64_t chunk = std::max<std::int64_t>(w, 64);
  for (std::int64_t i = m0; i <= lim; chunk = std::min(2 * chunk, kScanChunk)) {
    const std::int64_t hi = std::min(lim, i + chunk - 1);
    const std::int64_t base = i - w;
    const auto v = bm_.values(base, hi);
    for (std::int64_t j = i; j <= hi; ++j) {
      const double d = v[static_cast<std::size_t>(j - base)] -
                       v[static_cast<std::size_t>(j - w - base)] - r.y;
      const bool stop = j == m0 ? d == 0.0 : (d == 0.0 || (d > 0.0) != (prev > 0.0));
      if (stop) {
        terminal_ = v[static_cast<std::size_t>(j - w - base)] + r.y;
        return j;
      }
      prev = d;
    }
    i = hi + 1;
  }
  return std::nullopt;
}

std::optional<std::int64_t> GridPiece::scan_region(std::int64_t lim) {
  const auto& r = std::get<RegionTime>(rule_);
  if (lim > (std::int64_t{1} << 27))
    throw SafetyCapError("region-time piece search limited to 2^27 steps");
  Path p(TimeGrid{0.0, bm_.dt(), lim}, bm_.values(0, lim));
  const auto res = search_region_time(p, r.c1, r.c2, r.tol, r.t_min);
  if (!res.found) return std::nullopt;
  return res.stop_index;
}

double GridPiece::clamp_value(std::int64_t stop) {
  const double dt = bm_.dt();
  return std::visit(
      overloaded{
          [&](const HitLevel& r) { return r.level; },
          [&](const ParabolicDriftHit& r) {
            return -1.0 + r.c1 * std::sqrt(static_cast<double>(stop) * dt);
          },
          [&](const ExitInterval& r) {
            const double v = bm_.value(stop);
            if (v <= r.lo) return r.lo;
            if (v >= r.hi) return r.hi;
            // stopped by a bridge crossing inside the step: the nearer side
            const double m = 0.5 * (v + bm_.value(stop - 1));
            return m - r.lo <= r.hi - m ? r.lo : r.hi;
          },
          [&](const auto&) { return bm_.value(stop); },
      },
      rule_);
}

double GridPiece::terminal_value() {
  const std::int64_t d = duration();
  if (!terminal_) terminal_ = clamp_value(d);
  return *terminal_;
}

void GridPiece::fill(std::int64_t first, std::int64_t last, std::span<double> out) {
  if (stop_) require(last <= *stop_, "GridPiece::fill: range extends past the stopping time");
  bm_.fill(first, last, out);
  if (stop_ && last == *stop_) out[static_cast<std::size_t>(last - first)] = terminal_value();
}

void PieceSpec::validate() const {
  require(dt > 0.0, "PieceSpec: dt must be positive");
  require(max_steps >= 1, "PieceSpec: max_steps must be positive");
  require(beta >= -1.0 && beta <= 1.0, "PieceSpec: |beta| <= 1 required");
  if (mode == Mode::iid)
    validate_rule(rule);
  else
    require(static_cast<bool>(schedule), "PieceSpec: per-index mode needs a schedule");
}

std::unique_ptr<Piece> make_rule_piece(const StoppingRule& rule, double dt, double beta,
                                       std::int64_t max_steps, const RngStream& stream) {
  if (const auto* lt = std::get_if<LocalTimeTarget>(&rule))
    return std::make_unique<SkewPiece>(beta, dt, lt->target, max_steps, stream);
  return std::make_unique<GridPiece>(rule, dt, max_steps, stream);
}

std::unique_ptr<Piece> make_piece(const PieceSpec& spec, std::int64_t k, const RngStream& rng) {
  const RngStream s = rng.child(k);
  if (spec.mode == PieceSpec::Mode::iid)
    return make_rule_piece(spec.rule, spec.dt, spec.beta, spec.max_steps, s.child(2));
  auto rule = spec.schedule(k, s.child(1));
  if (!rule) return std::make_unique<ZeroPiece>();
  return make_rule_piece(*rule, spec.dt, spec.beta, spec.max_steps, s.child(2));
}

}  // namespace fbmlab
