#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fbmlab/rng.hpp"

namespace fbmlab {

// Pruning rule for the first-passage search. `hit` tests a single grid
// value; `may_cross` returns false only when the Brownian bridge between two
// grid values is (numerically) certain to stay clear of the stopping set.
class Barrier {
 public:
  virtual ~Barrier() = default;
  virtual bool hit(std::int64_t i, double v) const = 0;
  virtual bool may_cross(std::int64_t lo, std::int64_t hi, double va, double vb) const = 0;
  // Probability that the bridge over step [lo, lo + 1] reaches the stopping
  // set when neither end does.
  virtual double step_crossing(std::int64_t, double, double) const { return 0.0; }
};

// Brownian motion on the grid {i*dt : i >= 0} built by Levy midpoint
// refinement. Block 0 covers steps [0, 2^k0] and block b >= 1 covers
// [2^(k0+b-1), 2^(k0+b)]; each midpoint normal is keyed by (block, node),
// so any value can be read without generating the ones before it.
class DyadicBM {
 public:
  static constexpr int kMaxLog2 = 62;

  DyadicBM(const RngStream& stream, double dt, int k0 = 10);

  double dt() const { return dt_; }
  double value(std::int64_t i) const;
  void fill(std::int64_t first, std::int64_t last, std::span<double> out) const;
  std::vector<double> values(std::int64_t first, std::int64_t last) const;

  // First i in [1, limit] with barrier.hit(i, W_i), or where the bridge over
  // step i crosses (decided by a uniform keyed by i), or nullopt.
  std::optional<std::int64_t> first_passage(const Barrier& barrier, std::int64_t limit) const;

  // False when a bridge over h time units from a to b, both above `level`,
  // reaches down to it with probability below ~1e-13.
  static bool may_touch_below(double a, double b, double level, double h);
  static bool may_touch_above(double a, double b, double level, double h);
  // exp(-2 (a - level)(b - level) / h) for a, b above a linear barrier.
  static double bridge_crossing(double a, double b, double level_a, double level_b, double h);

 private:
  struct Block {
    std::int64_t lo, hi;
    double va, vb;
  };
  Block block(int b) const;
  int block_of(std::int64_t i) const;
  double mid(int b, std::uint64_t node, std::int64_t len, double va, double vb) const;
  void fill_node(int b, std::uint64_t node, std::int64_t lo, std::int64_t hi, double va, double vb,
                 std::int64_t first, std::int64_t last, std::span<double> out) const;
  std::optional<std::int64_t> search_node(const Barrier& barrier, int b, std::uint64_t node,
                                          std::int64_t lo, std::int64_t hi, double va, double vb,
                                          std::int64_t limit) const;

  RngStream stream_;
  double dt_;
  int k0_;
  mutable std::vector<double> ends_;  // W at the right end of each block
};

}  // namespace fbmlab
