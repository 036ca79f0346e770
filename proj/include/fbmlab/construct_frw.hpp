#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbmlab/path.hpp"
#include "fbmlab/rng.hpp"

namespace fbmlab {

WalkPath sample_srw(std::int64_t n, const RngStream& rng);

struct LevelRecord {
  std::int64_t n = 0;
  std::int64_t a = 0, b = 0;    // a_n, b_n
  std::int64_t ap = 0, bp = 0;  // a'_n = a_n - d_n, b'_n = b_n + d_n
  std::int64_t c = 0, d = 0;
  std::int64_t next_a = 0, next_b = 0;  // a_{n+1}, b_{n+1}
  std::int64_t block_length() const { return bp - ap + 1; }
  // S_{-n} = a_{n+1} + b'_n - a'_n + 1
  std::int64_t shifted_start() const { return next_a + block_length(); }
};

// V_k in {-1, +1} for k in [first, first + values.size()).
struct IncrementSeq {
  std::int64_t first = 0;
  std::vector<std::int8_t> values;
  std::vector<LevelRecord> levels;

  std::int64_t last() const { return first + static_cast<std::int64_t>(values.size()) - 1; }
  std::int8_t at(std::int64_t k) const { return values.at(static_cast<std::size_t>(k - first)); }
};

struct FrwSchedule {
  std::vector<std::int64_t> d;  // d_n per level; missing entries use the default
  std::int64_t default_d(std::int64_t n, std::int64_t c) const;
  std::int64_t d_for(std::int64_t n, std::int64_t c) const;
};

struct FrwOptions {
  bool negate_coins = false;  // flip every coin drawn (equivariance checks)
  int max_block_bits = 30;    // refuse longer block searches
  std::int64_t max_chunks = std::int64_t{1} << 40;
};

// Builds `levels` inductive steps. Throws InfeasibleError when a block is
// longer than max_block_bits.
IncrementSeq sample_frw_brw_not2rw(std::int64_t levels, const FrwSchedule& schedule, const RngStream& rng,
                                   const FrwOptions& opts = {});

// Exact structural checks; returns an empty string when all hold.
std::string check_frw_structure(const IncrementSeq& seq);

struct CorrelatedFrw {
  WalkPath walk;
  std::vector<std::int64_t> boundaries;  // indices k with Z_k at a piece boundary
  std::int64_t t_index = -1;
};
// Pieces k in [-n, n) of a walk stopped at its first two equal consecutive
// increments (at least two steps).
CorrelatedFrw sample_correlated_frw(std::int64_t n, const RngStream& rng);

struct Embedding {
  TwoSidedPath path;
  std::vector<std::int64_t> m_index;  // value index of M_j, j = walk.first_index ...
};
Embedding embed_frw_to_fbm(const WalkPath& walk, double dt, const RngStream& rng);

// Unit-exit times from time 0 forward and backward. Returns Z on
// [k_min, k_max] or throws if the path runs out first; with no range given
// returns every step that fits.
WalkPath discretize_2bm_to_2rw(const TwoSidedPath& path, std::optional<std::int64_t> k_min = std::nullopt,
                               std::optional<std::int64_t> k_max = std::nullopt);

struct MinTimesDemo {
  std::int64_t runs = 0;
  double p_plus = 0.0;    // P(X_{(S^T)+1} - X_{S^T} > 0)
  double p_plus_s = 0.0;  // P(X_{S+1} - X_S > 0)
  double p_plus_t = 0.0;  // P(X_{T+1} - X_T > 0)
  bool t_is_one_when_up = true;
};
MinTimesDemo counterexample_min_times(const RngStream& rng, std::int64_t runs = 10'000);

}  // namespace fbmlab
