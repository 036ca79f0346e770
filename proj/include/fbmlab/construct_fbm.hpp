#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbmlab/path.hpp"
#include "fbmlab/pieces.hpp"
#include "fbmlab/rng.hpp"
#include "fbmlab/skew.hpp"

namespace fbmlab {

struct ConcatOptions {
  // Materialize only X on [window_lo, window_hi] (times relative to S_0).
  std::optional<double> window_lo;
  std::optional<double> window_hi;
  // Record S_k and X(S_k) only.
  bool boundaries_only = false;
  // Refuse to allocate more values than this.
  std::int64_t max_values = std::int64_t{1} << 28;
};

// Pieces k in [-neg_pieces, pos_pieces) glued at S_k, with S_0 = 0.
TwoSidedPath concat_decomposable(const PieceSpec& spec, std::int64_t neg_pieces,
                                 std::int64_t pos_pieces, const RngStream& rng,
                                 const ConcatOptions& opts = {});

// t -> X(S_n + t) - X(S_n) on [0, horizon], generated from pieces n, n+1, ...
// only; identical to the same restriction of concat_decomposable.
Path forward_window(const PieceSpec& spec, std::int64_t n, double horizon, const RngStream& rng);

// X on [-horizon, 0] (grid t0 = -horizon), using as many negative pieces as
// needed to reach back that far.
Path backward_window(const PieceSpec& spec, double horizon, const RngStream& rng,
                     std::int64_t max_pieces = 10'000'000);

// Number of negative pieces needed so that S_{-m} <= -horizon.
std::int64_t pieces_to_reach(const PieceSpec& spec, double horizon, const RngStream& rng,
                             std::int64_t max_pieces = 10'000'000);

// ---- named constructions ----

PieceSpec bessel_spec(double dt, std::int64_t max_steps = kDefaultMaxSteps);
TwoSidedPath sample_bessel_example(std::int64_t neg_pieces, double dt, const RngStream& rng,
                                   const ConcatOptions& opts = {});

PieceSpec skew_spec(const SkewParams& params, std::int64_t max_steps = kDefaultMaxSteps);
struct SkewFbmPath {
  TwoSidedPath path;
  // L^X in units of the per-piece target: L^X(S_k) = k.
  std::vector<double> local_time;
};
SkewFbmPath sample_skew_fbm(const SkewParams& params, std::int64_t neg_pieces, const RngStream& rng,
                            std::int64_t pos_pieces = 0);

struct MaxRangeSchedule {
  std::vector<double> levels;  // n_1 < n_2 < ...; P(Y = +-n_k) = 2^(-k^2-1)
  void validate() const;
  static MaxRangeSchedule default_schedule(int count = 5);  // n_k = 4^k
};
double draw_maxrange_y(const MaxRangeSchedule& schedule, double u);
PieceSpec maxrange_spec(const MaxRangeSchedule& schedule, double dt,
                        std::int64_t max_steps = kDefaultMaxSteps);
TwoSidedPath sample_maxrange_fbm(const MaxRangeSchedule& schedule, std::int64_t neg_pieces, double dt,
                                 const RngStream& rng, const ConcatOptions& opts = {});

PieceSpec integrable_spec(double dt, std::int64_t max_steps = kDefaultMaxSteps);
TwoSidedPath sample_integrable_fbm(const PieceSpec& spec, std::int64_t neg_pieces,
                                   std::int64_t pos_pieces, const RngStream& rng,
                                   const ConcatOptions& opts = {});

// c1 with lambda0(c1, inf) = (1 + alpha) / 2.
double heavy_c1(double alpha);
PieceSpec heavy_spec(double c1, double dt, std::int64_t max_steps = kDefaultMaxSteps);
TwoSidedPath sample_nonbbm_heavy(double alpha, double c1, std::int64_t neg_pieces, double dt,
                                 const RngStream& rng, const ConcatOptions& opts = {});

struct WindowedSchedule {
  std::vector<double> p;             // heads probability per block
  std::vector<std::int64_t> k;       // pieces per block
  std::vector<double> c;             // window level per block
  void validate() const;
  std::int64_t pieces(std::int64_t blocks) const;
  // Block of piece i >= 1 (piece index -i), or -1 past the last block.
  std::int64_t block_of(std::int64_t i) const;
};
// E (inf{t >= 1 : B_t - B_{t-1} = c})^alpha by Monte Carlo.
struct MomentEstimate {
  double mean;
  double std_error;
  std::int64_t censored;
};
MomentEstimate estimate_window_moment(double c, double alpha, double dt, std::int64_t n,
                                      const RngStream& rng, std::int64_t max_steps = kDefaultMaxSteps);
// p_j = 1 / lambda(c_j), k_j = ceil(1 / p_j).
WindowedSchedule windowed_schedule_from(const std::vector<double>& c,
                                        const std::function<double(double)>& lambda);
// c = 1, 1.25, 1.5 with tabulated lambda: k = 3, 4, 5 (12 pieces).
WindowedSchedule default_windowed_schedule();
PieceSpec windowed_spec(const WindowedSchedule& schedule, double dt,
                        std::int64_t max_steps = kDefaultMaxSteps);
TwoSidedPath sample_nonbbm_windowed(const WindowedSchedule& schedule, std::int64_t neg_blocks, double dt,
                                    const RngStream& rng, std::int64_t pos_pieces = 0,
                                    const ConcatOptions& opts = {});

// Sampler registry used by configs: bessel_example, skew_fbm, maxrange,
// integrable, nonbbm_heavy, nonbbm_windowed, generic.
const std::vector<std::string>& sampler_ids();
PieceSpec sampler_spec(const std::string& id, const nlohmann::json& params, double dt);

}  // namespace fbmlab
