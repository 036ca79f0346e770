#include "fbmlab/core_paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbmlab/errors.hpp"

namespace fbmlab {

Path sample_bm_path(const TimeGrid& grid, double start, const RngStream& rng) {
  grid.validate();
  std::vector<double> v(static_cast<std::size_t>(grid.n_steps + 1));
  v[0] = start;
  RngCursor cur(rng);
  const double sd = std::sqrt(grid.dt);
  double x = start;
  for (std::int64_t i = 1; i <= grid.n_steps; ++i) {
    x += sd * cur.normal();
    v[static_cast<std::size_t>(i)] = x;
  }
  return Path(grid, std::move(v));
}

RefinedPath bridge_refine(const Path& path, std::int64_t step_index, const RngStream& rng) {
  if (step_index < 0 || step_index >= path.n_steps())
    throw PreconditionError("bridge_refine: step index " + std::to_string(step_index) +
                            " out of range");
  const double a = path.values[static_cast<std::size_t>(step_index)];
  const double b = path.values[static_cast<std::size_t>(step_index + 1)];
  RefinedPath r;
  r.base = path;
  r.step = step_index;
  r.midpoint = 0.5 * (a + b) +
               std::sqrt(path.grid.dt / 4.0) * rng.normal_at(static_cast<std::uint64_t>(step_index));
  return r;
}

Path sample_bessel3_to_one(double dt, const RngStream& rng, std::int64_t max_steps) {
  require(dt > 0.0, "sample_bessel3_to_one: dt must be positive");
  RngCursor cur(rng);
  const double sd = std::sqrt(dt);
  double x = 0, y = 0, z = 0;
  std::vector<double> v{0.0};
  for (std::int64_t i = 1;; ++i) {
    if (i > max_steps) throw SafetyCapError("sample_bessel3_to_one: step cap exceeded");
    x += sd * cur.normal();
    y += sd * cur.normal();
    z += sd * cur.normal();
    const double r = std::sqrt(x * x + y * y + z * z);
    if (r >= 1.0) {
      v.push_back(1.0);
      break;
    }
    v.push_back(r);
  }
  const auto n = static_cast<std::int64_t>(v.size()) - 1;
  return Path(TimeGrid{0.0, dt, n}, std::move(v));
}

Path sample_bm_to_last_zero(double dt, const RngStream& rng, std::int64_t max_steps) {
  require(dt > 0.0, "sample_bm_to_last_zero: dt must be positive");
  RngCursor cur(rng);
  const double sd = std::sqrt(dt);
  std::vector<double> v{0.0};
  std::size_t last_change = 0;
  double x = 0.0;
  for (std::int64_t i = 1;; ++i) {
    if (i > max_steps) throw SafetyCapError("sample_bm_to_last_zero: step cap exceeded");
    const double nx = x + sd * cur.normal();
    if (x * nx <= 0.0) last_change = v.size() - 1;
    if (std::abs(nx) >= 1.0) break;
    v.push_back(nx);
    x = nx;
  }
  v.resize(last_change + 1);
  return Path(TimeGrid{0.0, dt, static_cast<std::int64_t>(last_change)}, std::move(v));
}

Path reverse_path(const Path& path) {
  std::vector<double> v(path.values.rbegin(), path.values.rend());
  const double end = path.values.back();
  for (auto& x : v) x -= end;
  return Path(path.grid, std::move(v));
}

void rotate_in_place(std::span<double> values) {
  if (values.empty()) return;
  const double s = values.front() + values.back();
  std::reverse(values.begin(), values.end());
  for (auto& x : values) x = s - x;
}

Path rotate_piece(const Path& path) {
  std::vector<double> v = path.values;
  rotate_in_place(v);
  return Path(path.grid, std::move(v));
}

}  // namespace fbmlab
