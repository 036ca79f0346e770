#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fbmlab {

struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  std::int64_t n_steps = 1;

  // Exact t0 + i*dt, never accumulated.
  double time(std::int64_t i) const { return t0 + static_cast<double>(i) * dt; }
  double duration() const { return static_cast<double>(n_steps) * dt; }
  // Throws PreconditionError unless dt > 0 and n_steps >= 1.
  void validate() const;
};

// Uniform-grid path. Truncating samplers (last zero, Bessel hit) may return
// a single-point path with n_steps == 0.
struct Path {
  TimeGrid grid;
  std::vector<double> values;

  Path() = default;
  Path(TimeGrid g, std::vector<double> v);

  std::int64_t n_steps() const { return grid.n_steps; }
  double front() const { return values.front(); }
  double back() const { return values.back(); }
  double time(std::int64_t i) const { return grid.time(i); }
};

// A path with one extra bridge midpoint inside step `step`.
struct RefinedPath {
  Path base;
  std::int64_t step = 0;
  double midpoint = 0.0;

  std::vector<double> times() const;
  std::vector<double> values() const;
  Path discard_midpoint() const { return base; }
};

// Two-sided trajectory with piece boundaries. Indices in `boundaries` and
// `origin_index` refer to positions in `values`. When `windowed` is set only
// part of the trajectory was materialized and boundaries may fall outside.
struct TwoSidedPath {
  double dt = 1.0;
  std::int64_t origin_index = 0;
  std::vector<double> values;
  std::vector<std::int64_t> boundaries;
  std::vector<double> boundary_values;
  std::int64_t first_rank = 0;  // k of boundaries[0]
  double horizon_neg = 0.0;
  double horizon_pos = 0.0;
  bool windowed = false;
  bool repeated_boundaries = false;

  double time(std::int64_t index) const {
    return static_cast<double>(index - origin_index) * dt;
  }
  std::int64_t boundary_index(std::int64_t k) const;
  std::int64_t last_rank() const {
    return first_rank + static_cast<std::int64_t>(boundaries.size()) - 1;
  }
  bool in_range(std::int64_t index) const {
    return index >= 0 && index < static_cast<std::int64_t>(values.size());
  }
  void validate() const;
};

// Integer walk Z_k for k in [first_index, first_index + z.size()).
struct WalkPath {
  std::int64_t first_index = 0;
  std::vector<std::int64_t> z;

  std::int64_t last_index() const {
    return first_index + static_cast<std::int64_t>(z.size()) - 1;
  }
  std::int64_t at(std::int64_t k) const { return z.at(static_cast<std::size_t>(k - first_index)); }
  void validate() const;
};

}  // namespace fbmlab
