#include "fbmlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace fbmlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  const std::uint64_t k = mix64(master_seed ^ mix64(stream_id ^ 0x5851F42D4C957F2Dull));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

RngStream RngStream::child(std::uint64_t tag) const {
  return RngStream(master_seed_, mix64(stream_id_ * 0x2545F4914F6CDD1Dull + mix64(tag)));
}

std::array<std::uint32_t, 4> RngStream::block(std::uint64_t index, std::uint64_t tag) const {
  return philox4x32({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                     static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)},
                    key_);
}

double uniform_from_bits(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t m = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(m & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform_at(std::uint64_t index, std::uint64_t tag) const {
  const auto b = block(index, tag);
  return uniform_from_bits(b[0], b[1]);
}

double RngStream::normal_at(std::uint64_t index, std::uint64_t tag) const {
  const auto b = block(index, tag);
  const double u1 = uniform_from_bits(b[0], b[1]);
  const double u2 = uniform_from_bits(b[2], b[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngCursor::RngCursor(const RngStream& stream, std::uint64_t tag) : stream_(stream), tag_(tag) {}

void RngCursor::refill() {
  buf_ = stream_.block(counter_++, tag_);
  pos_ = 0;
}

std::uint32_t RngCursor::bits32() {
  if (pos_ >= 4) refill();
  return buf_[pos_++];
}

std::uint64_t RngCursor::bits64() {
  const std::uint64_t hi = bits32();
  return (hi << 32) | bits32();
}

double RngCursor::uniform() {
  const std::uint32_t hi = bits32();
  return uniform_from_bits(hi, bits32());
}

double RngCursor::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

}  // namespace fbmlab
