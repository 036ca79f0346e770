#pragma once

#include <cstdint>
#include <span>

#include "fbmlab/path.hpp"
#include "fbmlab/rng.hpp"

namespace fbmlab {

inline constexpr std::int64_t kDefaultMaxSteps = 1'000'000'000;

Path sample_bm_path(const TimeGrid& grid, double start, const RngStream& rng);

// Inserts one Brownian-bridge midpoint into step `step_index`.
RefinedPath bridge_refine(const Path& path, std::int64_t step_index, const RngStream& rng);

// |3-d Brownian motion| from 0 until the first grid index with norm >= 1;
// the last value is set to exactly 1.
Path sample_bessel3_to_one(double dt, const RngStream& rng,
                           std::int64_t max_steps = kDefaultMaxSteps);

// Brownian motion from 0 run to its first grid exit of (-1, 1), cut at the
// last sign change before the exit. May have zero steps.
Path sample_bm_to_last_zero(double dt, const RngStream& rng,
                            std::int64_t max_steps = kDefaultMaxSteps);

// s -> X(T - s) - X(T)
Path reverse_path(const Path& path);
// t -> -X(T - t) + X(T) + X(0)
Path rotate_piece(const Path& path);
void rotate_in_place(std::span<double> values);

}  // namespace fbmlab
