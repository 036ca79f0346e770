#include "fbmlab/skew.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fbmlab/errors.hpp"

namespace fbmlab {

namespace {

constexpr std::int64_t kTable = 4096;
constexpr std::int64_t kMaxHalf = std::int64_t{1} << 60;
constexpr std::int64_t kForwardLimit = std::int64_t{1} << 22;
constexpr std::int64_t kMiddleLimit = std::int64_t{1} << 30;

const std::vector<double>& survival_table() {
  static const std::vector<double> t = [] {
    std::vector<double> q(static_cast<std::size_t>(kTable + 1));
    q[0] = 1.0;
    for (std::int64_t n = 1; n <= kTable; ++n)
      q[static_cast<std::size_t>(n)] =
          q[static_cast<std::size_t>(n - 1)] * static_cast<double>(2 * n - 1) / static_cast<double>(2 * n);
    return q;
  }();
  return t;
}

double survival_asymptotic(double n) {
  const double x = 1.0 / n;
  return (1.0 - x / 8.0 + x * x / 128.0 + 5.0 * x * x * x / 1024.0) / std::sqrt(std::numbers::pi * n);
}

}  // namespace

void SkewParams::validate() const {
  require(beta >= -1.0 && beta <= 1.0, "SkewParams: |beta| <= 1 required");
  require(dt > 0.0, "SkewParams: dt must be positive");
}

double return_survival(std::int64_t n) {
  require(n >= 0, "return_survival: n >= 0 required");
  if (n <= kTable) return survival_table()[static_cast<std::size_t>(n)];
  return survival_asymptotic(static_cast<double>(n));
}

std::int64_t excursion_half_length(double u) {
  require(u > 0.0 && u <= 1.0, "excursion_half_length: u must lie in (0, 1]");
  const auto& q = survival_table();
  if (u >= q[kTable]) {
    // q is decreasing: first n with q[n] <= u
    auto it = std::lower_bound(q.begin() + 1, q.end(), u, [](double a, double b) { return a > b; });
    return static_cast<std::int64_t>(it - q.begin());
  }
  const double guess = 1.0 / (std::numbers::pi * u * u);
  if (guess > static_cast<double>(kMaxHalf) / 4)
    throw SafetyCapError("excursion length beyond 2^61 steps");
  std::int64_t lo = kTable;  // q(lo) > u
  std::int64_t hi = std::max<std::int64_t>(kTable + 1, static_cast<std::int64_t>(guess * 2) + 2);
  while (survival_asymptotic(static_cast<double>(hi)) > u) hi *= 2;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (survival_asymptotic(static_cast<double>(mid)) <= u)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

void excursion_prefix(std::int64_t length, std::int64_t count, RngCursor& cur,
                      std::span<std::int64_t> out) {
  require(length >= 2 && length % 2 == 0, "excursion_prefix: even length >= 2 required");
  require(count >= 1 && count <= length + 1 && out.size() >= static_cast<std::size_t>(count),
          "excursion_prefix: bad count");
  out[0] = 0;
  std::int64_t h = 0;
  for (std::int64_t i = 1; i < count; ++i) {
    const std::int64_t m = length - (i - 1);  // steps left before this one
    if (h == 0) {
      h = 1;
    } else if (m == 1 || h >= m) {
      --h;
    } else {
      // first-passage counts from h+1 vs h to 0 in m-1 vs m steps
      const double p = static_cast<double>(h + 1) * static_cast<double>(m - h) /
                       (2.0 * static_cast<double>(h) * static_cast<double>(m - 1));
      h += cur.uniform() < p ? 1 : -1;
    }
    out[static_cast<std::size_t>(i)] = h;
  }
}

SkewPiece::SkewPiece(double beta, double dt, double target, std::int64_t cap, const RngStream& stream)
    : Piece(cap), beta_(beta), dt_(dt), sq_(std::sqrt(dt)), stream_(stream) {
  require(beta >= -1.0 && beta <= 1.0, "SkewPiece: |beta| <= 1 required");
  require(dt > 0.0 && target > 0.0, "SkewPiece: dt and target must be positive");
  n_exc_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(target / sq_ - 1e-9)));
}

bool SkewPiece::up(std::int64_t j) const {
  return stream_.uniform_at(static_cast<std::uint64_t>(j), 2) < 0.5 * (1.0 + beta_);
}

void SkewPiece::extend_one() {
  const auto j = static_cast<std::int64_t>(ends_.size());
  const std::int64_t len = 2 * excursion_half_length(stream_.uniform_at(static_cast<std::uint64_t>(j), 1));
  const std::int64_t prev = ends_.empty() ? 0 : ends_.back();
  if (prev > std::numeric_limits<std::int64_t>::max() - len) {
    overflow_ = true;
    ends_.push_back(std::numeric_limits<std::int64_t>::max());
  } else {
    ends_.push_back(prev + len);
  }
}

void SkewPiece::extend_to(std::int64_t steps) {
  while (static_cast<std::int64_t>(ends_.size()) < n_exc_ && (ends_.empty() || ends_.back() <= steps))
    extend_one();
}

std::optional<std::int64_t> SkewPiece::duration_within(std::int64_t limit) {
  extend_to(std::min(limit, cap_));
  const bool complete = static_cast<std::int64_t>(ends_.size()) == n_exc_;
  if (complete && !overflow_ && ends_.back() <= cap_)
    return ends_.back() <= limit ? std::optional<std::int64_t>(ends_.back()) : std::nullopt;
  if (limit > cap_ || (complete && ends_.back() <= limit))
    throw SafetyCapError("skew piece did not stop within " + std::to_string(cap_) + " steps");
  return std::nullopt;
}

double SkewPiece::terminal_value() {
  duration();
  return -beta_ * sq_ * static_cast<double>(n_exc_);
}

std::int64_t SkewPiece::returns_up_to(std::int64_t i) {
  extend_to(i);
  return static_cast<std::int64_t>(std::upper_bound(ends_.begin(), ends_.end(), i) - ends_.begin());
}

void SkewPiece::fill(std::int64_t first, std::int64_t last, std::span<double> out) {
  require(first >= 0 && last >= first && out.size() == static_cast<std::size_t>(last - first + 1),
          "SkewPiece::fill: bad range");
  extend_to(last);
  if (static_cast<std::int64_t>(ends_.size()) == n_exc_)
    require(last <= ends_.back(), "SkewPiece::fill: range extends past the stopping time");
  std::vector<std::int64_t> h;
  auto j = static_cast<std::int64_t>(std::upper_bound(ends_.begin(), ends_.end(), first) - ends_.begin());
  if (j > 0 && ends_[static_cast<std::size_t>(j - 1)] == first) --j;
  for (; j < static_cast<std::int64_t>(ends_.size()); ++j) {
    const std::int64_t s = j == 0 ? 0 : ends_[static_cast<std::size_t>(j - 1)];
    const std::int64_t e = ends_[static_cast<std::size_t>(j)];
    if (s > last) break;
    const std::int64_t a = std::max(first, s);
    const std::int64_t b = std::min(last, e);
    const std::int64_t len = e - s;
    const double sign = up(j) ? 1.0 : -1.0;
    const RngStream es = stream_.child(j);
    if (b - s < kForwardLimit || a == s) {
      if (b - s >= kMiddleLimit) throw SafetyCapError("skew piece window too deep inside an excursion");
      h.resize(static_cast<std::size_t>(b - s + 1));
      RngCursor cur(es, 0);
      excursion_prefix(len, b - s + 1, cur, h);
      for (std::int64_t i = a; i <= b; ++i)
        out[static_cast<std::size_t>(i - first)] = sign * sq_ * static_cast<double>(h[static_cast<std::size_t>(i - s)]);
    } else if (b == e) {
      // suffix through the reversed excursion, which has the same law
      h.resize(static_cast<std::size_t>(e - a + 1));
      RngCursor cur(es, 1);
      excursion_prefix(len, e - a + 1, cur, h);
      for (std::int64_t i = a; i <= b; ++i)
        out[static_cast<std::size_t>(i - first)] = sign * sq_ * static_cast<double>(h[static_cast<std::size_t>(e - i)]);
    } else {
      if (b - s >= kMiddleLimit) throw SafetyCapError("skew piece window too deep inside an excursion");
      h.resize(static_cast<std::size_t>(b - s + 1));
      RngCursor cur(es, 0);
      excursion_prefix(len, b - s + 1, cur, h);
      for (std::int64_t i = a; i <= b; ++i)
        out[static_cast<std::size_t>(i - first)] = sign * sq_ * static_cast<double>(h[static_cast<std::size_t>(i - s)]);
    }
  }
  // subtract beta * local time: returns counted at excursion ends in (0, i]
  auto r = static_cast<std::int64_t>(std::upper_bound(ends_.begin(), ends_.end(), first) - ends_.begin());
  for (std::int64_t i = first; i <= last; ++i) {
    while (r < static_cast<std::int64_t>(ends_.size()) && ends_[static_cast<std::size_t>(r)] <= i) ++r;
    out[static_cast<std::size_t>(i - first)] -= beta_ * sq_ * static_cast<double>(r);
  }
}

LocalTimePath sample_skew_bm(const SkewParams& params, std::int64_t n_steps, const RngStream& rng) {
  params.validate();
  require(n_steps >= 1, "sample_skew_bm: n_steps >= 1 required");
  const double sq = std::sqrt(params.dt);
  const double p_up = 0.5 * (1.0 + params.beta);
  RngCursor cur(rng);
  std::vector<double> v(static_cast<std::size_t>(n_steps + 1));
  std::vector<double> lt(v.size());
  std::int64_t z = 0, visits = 0;
  for (std::int64_t i = 1; i <= n_steps; ++i) {
    const double u = cur.uniform();
    if (z == 0)
      z += u < p_up ? 1 : -1;
    else
      z += u < 0.5 ? 1 : -1;
    if (z == 0) ++visits;
    v[static_cast<std::size_t>(i)] = sq * static_cast<double>(z);
    lt[static_cast<std::size_t>(i)] = sq * static_cast<double>(visits);
  }
  return {Path(TimeGrid{0.0, params.dt, n_steps}, std::move(v)), std::move(lt)};
}

}  // namespace fbmlab
