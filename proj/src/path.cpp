#include "fbmlab/path.hpp"

#include <cstdlib>
#include <string>

#include "fbmlab/errors.hpp"

namespace fbmlab {

void TimeGrid::validate() const {
  require(dt > 0.0, "TimeGrid: dt must be positive");
  require(n_steps >= 1, "TimeGrid: n_steps must be at least 1");
}

Path::Path(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  require(grid.dt > 0.0, "Path: dt must be positive");
  require(grid.n_steps >= 0 && values.size() == static_cast<std::size_t>(grid.n_steps + 1),
          "Path: values length must be n_steps + 1");
}

std::vector<double> RefinedPath::times() const {
  std::vector<double> t;
  t.reserve(base.values.size() + 1);
  for (std::int64_t i = 0; i <= base.n_steps(); ++i) {
    t.push_back(base.time(i));
    if (i == step) t.push_back(base.grid.t0 + (static_cast<double>(step) + 0.5) * base.grid.dt);
  }
  return t;
}

std::vector<double> RefinedPath::values() const {
  std::vector<double> v;
  v.reserve(base.values.size() + 1);
  for (std::int64_t i = 0; i <= base.n_steps(); ++i) {
    v.push_back(base.values[static_cast<std::size_t>(i)]);
    if (i == step) v.push_back(midpoint);
  }
  return v;
}

std::int64_t TwoSidedPath::boundary_index(std::int64_t k) const {
  if (k < first_rank || k > last_rank())
    throw PreconditionError("TwoSidedPath: no boundary with rank " + std::to_string(k));
  return boundaries[static_cast<std::size_t>(k - first_rank)];
}

void TwoSidedPath::validate() const {
  require(dt > 0.0, "TwoSidedPath: dt must be positive");
  require(boundary_values.size() == boundaries.size(), "TwoSidedPath: boundary value count");
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (repeated_boundaries)
      require(boundaries[i] >= boundaries[i - 1], "TwoSidedPath: boundaries must not decrease");
    else
      require(boundaries[i] > boundaries[i - 1], "TwoSidedPath: boundaries must increase");
  }
  if (windowed) return;
  require(in_range(origin_index), "TwoSidedPath: origin outside values");
  require(values[static_cast<std::size_t>(origin_index)] == 0.0, "TwoSidedPath: X(0) must be 0");
  bool origin_found = false;
  for (auto b : boundaries) {
    require(in_range(b), "TwoSidedPath: boundary outside values");
    origin_found = origin_found || b == origin_index;
  }
  require(origin_found, "TwoSidedPath: origin must be a boundary");
}

void WalkPath::validate() const {
  require(!z.empty(), "WalkPath: empty");
  require(first_index <= 0 && last_index() >= 0, "WalkPath: index 0 missing");
  require(at(0) == 0, "WalkPath: Z_0 must be 0");
  for (std::size_t i = 1; i < z.size(); ++i)
    require(std::llabs(z[i] - z[i - 1]) == 1, "WalkPath: steps must be +-1");
}

}  // namespace fbmlab
