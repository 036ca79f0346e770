#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fbmlab/dyadic_bm.hpp"
#include "fbmlab/errors.hpp"
#include "fbmlab/pieces.hpp"
#include "fbmlab/skew.hpp"
#include "fbmlab/verify.hpp"

using namespace fbmlab;

namespace {

double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

constexpr std::int64_t kCap = std::int64_t{1} << 50;

}  // namespace

TEST_CASE("dyadic path: random access agrees with fill") {
  const DyadicBM bm(RngStream(5, 0), 1e-3, 4);
  CHECK(bm.value(0) == 0.0);
  const auto all = bm.values(0, 5000);
  for (std::int64_t i : {1, 7, 16, 17, 999, 1024, 1025, 4096, 5000})
    CHECK(bm.value(i) == all[static_cast<std::size_t>(i)]);
  const auto part = bm.values(1500, 2600);
  for (std::size_t i = 0; i < part.size(); ++i) CHECK(part[i] == all[1500 + i]);
  // a fresh object with the same stream sees the same path, read in another order
  const DyadicBM again(RngStream(5, 0), 1e-3, 4);
  CHECK(again.value(5000) == all[5000]);
  CHECK(again.value(3) == all[3]);
  CHECK_THROWS_AS(DyadicBM(RngStream(5, 0), 0.0), PreconditionError);
}

TEST_CASE("dyadic path: increments are N(0, dt) across block boundaries") {
  const double dt = 1e-3;
  std::vector<double> w1, inc;
  for (int s = 0; s < 2000; ++s) {
    const DyadicBM bm(RngStream(17, static_cast<std::uint64_t>(s)), dt, 3);
    w1.push_back(bm.value(1000));
    // steps straddling the 2^k block ends
    const auto v = bm.values(8 * (s % 7 + 1) - 1, 8 * (s % 7 + 1));
    inc.push_back((v[1] - v[0]) / std::sqrt(dt));
  }
  CHECK(ks_test(w1, normal_cdf).pass);
  CHECK(ks_test(inc, normal_cdf).pass);
}

TEST_CASE("bridge crossing probability") {
  CHECK(DyadicBM::bridge_crossing(1.0, 1.0, 0.0, 0.0, 2.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(DyadicBM::bridge_crossing(-0.1, 1.0, 0.0, 0.0, 1.0) == 1.0);
  CHECK(DyadicBM::bridge_crossing(1.0, 1.0, 0.5, 0.5, 1.0) == doctest::Approx(std::exp(-0.5)));
  CHECK_FALSE(DyadicBM::may_touch_below(10.0, 10.0, 0.0, 1e-3));
  CHECK(DyadicBM::may_touch_below(0.01, 0.01, 0.0, 1.0));
  CHECK_FALSE(DyadicBM::may_touch_above(-10.0, -10.0, 0.0, 1e-3));
}

TEST_CASE("consecutive pieces are independent") {
  PieceSpec spec;
  spec.rule = ExitInterval{-1.0, 1.0};
  spec.dt = 1e-3;
  std::vector<double> a, b;
  const RngStream rng(23, 0);
  for (std::int64_t k = 0; k < 4000; k += 2) {
    auto p = make_piece(spec, k, rng);
    auto q = make_piece(spec, k + 1, rng);
    a.push_back(static_cast<double>(p->duration()));
    b.push_back(static_cast<double>(q->duration()));
  }
  const auto r = lag1_test(a, b);
  CHECK(r.pass);
  CHECK(std::abs(r.statistic) < 3.0);
}

TEST_CASE("exit of (-1, 1) has mean duration 1 and fair sides") {
  const double dt = 1e-4;
  std::vector<double> t;
  int up = 0;
  for (int i = 0; i < 2000; ++i) {
    GridPiece p(ExitInterval{-1.0, 1.0}, dt, kCap, RngStream(29, static_cast<std::uint64_t>(i)));
    t.push_back(static_cast<double>(p.duration()) * dt);
    const double v = p.terminal_value();
    CHECK(std::abs(v) == 1.0);
    up += v > 0;
  }
  // Var T = 2/3 so the standard error is ~0.018
  CHECK(mean(t) == doctest::Approx(1.0).epsilon(0.06));
  CHECK(std::abs(up - 1000) < 4 * std::sqrt(500.0));
}

TEST_CASE("grid piece fill ends on the stopping set") {
  GridPiece p(HitLevel{-1.0}, 1e-3, kCap, RngStream(31, 4));
  const auto n = p.duration();
  std::vector<double> v(static_cast<std::size_t>(n + 1));
  p.fill(0, n, v);
  CHECK(v.front() == 0.0);
  CHECK(v.back() == -1.0);
  CHECK(*std::min_element(v.begin(), v.end() - 1) > -1.0);
  std::vector<double> part(11);
  p.fill(n - 10, n, part);
  CHECK(std::equal(part.begin(), part.end(), v.end() - 11));
}

TEST_CASE("safety cap") {
  GridPiece p(HitLevel{-50.0}, 1e-3, 1000, RngStream(1, 1));
  CHECK_THROWS_AS(p.duration(), SafetyCapError);
  ZeroPiece z;
  CHECK(z.duration() == 0);
  CHECK(z.terminal_value() == 0.0);
}

TEST_CASE("return survival and excursion lengths") {
  CHECK(return_survival(0) == 1.0);
  CHECK(return_survival(1) == 0.5);
  CHECK(return_survival(2) == 0.375);
  CHECK(return_survival(3) == doctest::Approx(0.3125));
  for (std::int64_t n : {4000, 5000, 100000, 10000000}) {
    const double exact = std::exp(std::lgamma(2.0 * n + 1) - 2 * std::lgamma(n + 1.0) - 2.0 * n * std::log(2.0));
    CHECK(return_survival(n) == doctest::Approx(exact).epsilon(1e-9));
  }
  CHECK(excursion_half_length(0.9) == 1);
  CHECK(excursion_half_length(0.5) == 1);
  CHECK(excursion_half_length(0.45) == 2);
  CHECK(excursion_half_length(0.3) == 4);
  CHECK(excursion_half_length(1e-6) >= excursion_half_length(1e-3));
}

TEST_CASE("excursion bridge is uniform over Dyck paths") {
  // positive excursions of length 8: Catalan(3) = 5 shapes
  std::map<std::vector<std::int64_t>, std::int64_t> seen;
  const RngStream s(37, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    RngCursor cur(s.child(i));
    std::vector<std::int64_t> h(9);
    excursion_prefix(8, 9, cur, h);
    CHECK(h.front() == 0);
    CHECK(h.back() == 0);
    for (std::size_t j = 1; j < 8; ++j) CHECK(h[j] > 0);
    for (std::size_t j = 1; j < 9; ++j) CHECK(std::abs(h[j] - h[j - 1]) == 1);
    ++seen[h];
  }
  REQUIRE(seen.size() == 5);
  std::vector<std::int64_t> counts;
  for (const auto& [k, c] : seen) counts.push_back(c);
  const std::vector<double> probs(5, 0.2);
  CHECK(chi_square_counts(counts, probs).pass);
}

TEST_CASE("skew walk") {
  SUBCASE("beta = 1 stays nonnegative") {
    const auto p = sample_skew_bm({1.0, 1e-3}, 5000, RngStream(41, 0));
    CHECK(*std::min_element(p.path.values.begin(), p.path.values.end()) >= 0.0);
  }
  SUBCASE("beta = -1 stays nonpositive") {
    const auto p = sample_skew_bm({-1.0, 1e-3}, 5000, RngStream(41, 1));
    CHECK(*std::max_element(p.path.values.begin(), p.path.values.end()) <= 0.0);
  }
  SUBCASE("beta = 0: E L_1 = sqrt(2/pi), Z_1 normal, L nondecreasing") {
    const double dt = 1e-3;
    std::vector<double> l1, z1;
    RngCursor jitter(RngStream(43, 99));
    for (int i = 0; i < 20000; ++i) {
      const auto p = sample_skew_bm({0.0, dt}, 1000, RngStream(43, static_cast<std::uint64_t>(i)));
      l1.push_back(p.local_time.back());
      z1.push_back(p.path.back() + (2.0 * jitter.uniform() - 1.0) * std::sqrt(dt));
      if (i < 50) CHECK(std::is_sorted(p.local_time.begin(), p.local_time.end()));
    }
    CHECK(mean(l1) == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(0.05));
    CHECK(ks_test(std::span<const double>(z1).first(5000), normal_cdf).pass);
  }
  CHECK_THROWS_AS(sample_skew_bm({1.5, 1e-3}, 10, RngStream(1, 1)), PreconditionError);
}

TEST_CASE("skew piece") {
  const double dt = 1e-3;
  SkewPiece p(0.5, dt, 1.0, kCap, RngStream(47, 3));
  const auto n = p.duration();
  CHECK(p.excursions() == 32);  // ceil(1 / sqrt(1e-3))
  CHECK(p.returns_up_to(n) == p.excursions());
  CHECK(p.terminal_value() == doctest::Approx(-0.5 * std::sqrt(dt) * 32));
  if (n < 2'000'000) {
    std::vector<double> v(static_cast<std::size_t>(n + 1));
    p.fill(0, n, v);
    CHECK(v.front() == 0.0);
    CHECK(v.back() == doctest::Approx(p.terminal_value()));
    const std::int64_t a = n / 3, b = n / 2;
    std::vector<double> w(static_cast<std::size_t>(b - a + 1));
    p.fill(a, b, w);
    for (std::int64_t i = a; i <= b; ++i) CHECK(w[static_cast<std::size_t>(i - a)] == v[static_cast<std::size_t>(i)]);
  }

  SkewPiece up(1.0, dt, 0.3, kCap, RngStream(47, 4));
  const auto m = up.duration();
  if (m < 2'000'000) {
    std::vector<double> v(static_cast<std::size_t>(m + 1));
    up.fill(0, m, v);
    for (std::int64_t i = 0; i <= m; ++i)
      CHECK(v[static_cast<std::size_t>(i)] + std::sqrt(dt) * static_cast<double>(up.returns_up_to(i)) >= -1e-12);
  }
}
