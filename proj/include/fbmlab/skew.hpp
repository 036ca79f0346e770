#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fbmlab/path.hpp"
#include "fbmlab/pieces.hpp"
#include "fbmlab/rng.hpp"

namespace fbmlab {

struct SkewParams {
  double beta = 0.0;
  double dt = 1e-3;
  void validate() const;
};

// Skew walk Z with space step sqrt(dt) and its local time estimate
// sqrt(dt) * #{1 <= m <= i : Z_m = 0}.
struct LocalTimePath {
  Path path;
  std::vector<double> local_time;
};

LocalTimePath sample_skew_bm(const SkewParams& params, std::int64_t n_steps, const RngStream& rng);

// P(first return of a simple walk to 0 happens after step 2n) = C(2n,n)/4^n.
double return_survival(std::int64_t n);
// Smallest n >= 1 with return_survival(n) <= u: the half-length of an
// excursion drawn by inversion.
std::int64_t excursion_half_length(double u);

// Heights of a uniformly chosen positive excursion of `length` steps at
// offsets 0..count-1, walking forward from its start.
void excursion_prefix(std::int64_t length, std::int64_t count, RngCursor& cur,
                      std::span<std::int64_t> out);

// Skew-walk piece stopped at its N-th return to 0, N = ceil(target/sqrt(dt)),
// built excursion by excursion. Values are Z - beta * L (a walk with
// Brownian scaling). Excursions longer than 2^22 steps are materialized only
// near the ends that a window touches; prefix and suffix of such an
// excursion come from separate sub-streams.
class SkewPiece final : public Piece {
 public:
  SkewPiece(double beta, double dt, double target, std::int64_t cap, const RngStream& stream);

  std::optional<std::int64_t> duration_within(std::int64_t limit) override;
  double terminal_value() override;
  void fill(std::int64_t first, std::int64_t last, std::span<double> out) override;
  std::int64_t returns_up_to(std::int64_t i) override;

  std::int64_t excursions() const { return n_exc_; }

 private:
  void extend_to(std::int64_t steps);
  void extend_one();
  bool up(std::int64_t j) const;

  double beta_;
  double dt_;
  double sq_;
  std::int64_t n_exc_;
  RngStream stream_;
  std::vector<std::int64_t> ends_;  // cumulative excursion ends
  bool overflow_ = false;
};

}  // namespace fbmlab
