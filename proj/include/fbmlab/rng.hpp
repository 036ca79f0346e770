#pragma once

#include <array>
#include <cstdint>

namespace fbmlab {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t mix64(std::uint64_t x);

// Counter-based stream: every draw is a pure function of
// (master_seed, stream_id, counter), so work can be split freely.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  RngStream child(std::uint64_t tag) const;
  RngStream child(std::int64_t tag) const { return child(static_cast<std::uint64_t>(tag)); }
  RngStream child(int tag) const { return child(static_cast<std::uint64_t>(static_cast<std::int64_t>(tag))); }

  std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint64_t tag = 0) const;
  // Uniform on the open interval (0, 1).
  double uniform_at(std::uint64_t index, std::uint64_t tag = 0) const;
  double normal_at(std::uint64_t index, std::uint64_t tag = 0) const;

  friend bool operator==(const RngStream& a, const RngStream& b) {
    return a.master_seed_ == b.master_seed_ && a.stream_id_ == b.stream_id_;
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::array<std::uint32_t, 2> key_;
};

// Sequential reader over one counter lane of a stream.
class RngCursor {
 public:
  explicit RngCursor(const RngStream& stream, std::uint64_t tag = 0);

  std::uint32_t bits32();
  std::uint64_t bits64();
  double uniform();
  double normal();
  bool coin() { return (bits32() & 1u) != 0; }

 private:
  void refill();

  RngStream stream_;
  std::uint64_t tag_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double uniform_from_bits(std::uint32_t hi, std::uint32_t lo);

}  // namespace fbmlab
