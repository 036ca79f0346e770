#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>

#include "fbmlab/core_paths.hpp"
#include "fbmlab/dyadic_bm.hpp"
#include "fbmlab/rng.hpp"
#include "fbmlab/stopping.hpp"

namespace fbmlab {

// One stopped Brownian piece (B^k, T_k). Durations are in grid steps.
class Piece {
 public:
  virtual ~Piece() = default;
  // T in steps if T <= limit, otherwise nullopt. Only looks as far as needed.
  virtual std::optional<std::int64_t> duration_within(std::int64_t limit) = 0;
  // T in steps; throws SafetyCapError past the cap.
  std::int64_t duration();
  // B at T (clamped onto the stopping set). Requires duration().
  virtual double terminal_value() = 0;
  // B at steps first..last; the value at T is the terminal value.
  virtual void fill(std::int64_t first, std::int64_t last, std::span<double> out) = 0;
  // Local time increments for skew pieces: number of returns to 0 in [0, i].
  virtual std::int64_t returns_up_to(std::int64_t) { return 0; }

  std::int64_t cap() const { return cap_; }

 protected:
  explicit Piece(std::int64_t cap) : cap_(cap) {}
  std::int64_t cap_;
};

using RuleSchedule = std::function<std::optional<StoppingRule>(std::int64_t k, const RngStream&)>;

struct PieceSpec {
  enum class Mode { iid, per_index };
  StoppingRule rule = FixedDuration{1.0};
  double dt = 1e-3;
  Mode mode = Mode::iid;
  // per_index: rule for piece k, drawn from the piece's own schedule stream;
  // nullopt means a zero-length piece.
  RuleSchedule schedule;
  double beta = 0.0;  // skew parameter for LocalTimeTarget pieces
  std::int64_t max_steps = kDefaultMaxSteps;

  void validate() const;
};

// Piece k uses stream rng.child(k); all pieces are independent.
std::unique_ptr<Piece> make_piece(const PieceSpec& spec, std::int64_t k, const RngStream& rng);
std::unique_ptr<Piece> make_rule_piece(const StoppingRule& rule, double dt, double beta,
                                       std::int64_t max_steps, const RngStream& stream);

// Zero-length piece (T = 0).
class ZeroPiece final : public Piece {
 public:
  ZeroPiece() : Piece(0) {}
  std::optional<std::int64_t> duration_within(std::int64_t) override { return 0; }
  double terminal_value() override { return 0.0; }
  void fill(std::int64_t first, std::int64_t last, std::span<double> out) override;
};

// Piece driven by a random-access Brownian path.
class GridPiece final : public Piece {
 public:
  GridPiece(const StoppingRule& rule, double dt, std::int64_t cap, const RngStream& stream);
  std::optional<std::int64_t> duration_within(std::int64_t limit) override;
  double terminal_value() override;
  void fill(std::int64_t first, std::int64_t last, std::span<double> out) override;

  const DyadicBM& path() const { return bm_; }

 private:
  std::optional<std::int64_t> scan_windowed(std::int64_t limit);
  std::optional<std::int64_t> scan_region(std::int64_t limit);
  double clamp_value(std::int64_t stop);

  StoppingRule rule_;
  DyadicBM bm_;
  std::optional<std::int64_t> stop_;
  std::int64_t searched_ = 0;  // no stop in [0, searched_]
  std::optional<double> terminal_;
};

}  // namespace fbmlab
