#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fbmlab/construct_fbm.hpp"
#include "fbmlab/eigen.hpp"
#include "fbmlab/errors.hpp"
#include "fbmlab/verify.hpp"

using namespace fbmlab;

namespace {

double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

PieceSpec fixed_spec(double dt) {
  PieceSpec s;
  s.rule = FixedDuration{1.0};
  s.dt = dt;
  return s;
}

}  // namespace

TEST_CASE("empty concatenation is the single point 0") {
  const auto p = concat_decomposable(fixed_spec(1e-2), 0, 0, RngStream(1, 0));
  REQUIRE(p.values.size() == 1);
  CHECK(p.values[0] == 0.0);
  CHECK(p.boundaries == std::vector<std::int64_t>{0});
  CHECK(p.origin_index == 0);
}

TEST_CASE("fixed-duration pieces give Brownian motion with integer boundaries") {
  const double dt = 1e-2;
  const auto p = concat_decomposable(fixed_spec(dt), 5, 3, RngStream(2, 0));
  p.validate();
  REQUIRE(p.boundaries.size() == 9);
  for (std::int64_t k = -5; k <= 3; ++k) {
    const auto i = p.boundary_index(k);
    CHECK(p.time(i) == doctest::Approx(static_cast<double>(k)));
    CHECK(p.values[static_cast<std::size_t>(i)] == p.boundary_values[static_cast<std::size_t>(k + 5)]);
  }
  CHECK(p.values[static_cast<std::size_t>(p.origin_index)] == 0.0);
  CHECK_FALSE(p.repeated_boundaries);

  // unit increments pooled over many paths, t >= S_{-5}
  std::vector<double> inc;
  for (int s = 0; s < 300; ++s) {
    const auto q = concat_decomposable(fixed_spec(dt), 5, 3, RngStream(3, static_cast<std::uint64_t>(s)));
    for (std::size_t i = 0; i + 100 < q.values.size(); i += 100) inc.push_back(q.values[i + 100] - q.values[i]);
  }
  CHECK(ks_test(inc, normal_cdf).pass);
}

TEST_CASE("forward window equals the restriction of the concatenation") {
  const auto spec = integrable_spec(1e-3);
  const RngStream rng(4, 0);
  const auto full = concat_decomposable(spec, 5, 12, rng);
  const auto a = full.boundary_index(-3);
  const double h = 2.0;
  const auto H = std::llround(h / spec.dt);
  REQUIRE(a + H <= full.boundary_index(12));
  const auto w = forward_window(spec, -3, h, rng);
  REQUIRE(w.values.size() == static_cast<std::size_t>(H + 1));
  const double base = full.values[static_cast<std::size_t>(a)];
  for (std::int64_t i = 0; i <= H; ++i)
    CHECK(w.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(full.values[static_cast<std::size_t>(a + i)] - base).epsilon(1e-12));

  const auto b = backward_window(spec, 1.5, rng);
  CHECK(b.grid.t0 == doctest::Approx(-1.5));
  CHECK(b.back() == 0.0);
  const auto full_b = concat_decomposable(spec, pieces_to_reach(spec, 1.5, rng), 0, rng);
  CHECK(b.front() == doctest::Approx(full_b.values[static_cast<std::size_t>(full_b.origin_index - 1500)]));
}

TEST_CASE("window and materialization options") {
  const auto spec = integrable_spec(1e-3);
  ConcatOptions o;
  o.boundaries_only = true;
  const auto bo = concat_decomposable(spec, 20, 0, RngStream(5, 0), o);
  CHECK(bo.values.empty());
  CHECK(bo.boundaries.size() == 21);
  CHECK(bo.boundary_values.back() == 0.0);
  ConcatOptions tiny;
  tiny.max_values = 10;
  CHECK_THROWS_AS(concat_decomposable(spec, 20, 0, RngStream(5, 0), tiny), SafetyCapError);
}

TEST_CASE("Bessel example") {
  const auto p = sample_bessel_example(6, 1e-3, RngStream(6, 0));
  for (std::int64_t k = -6; k <= 0; ++k)
    CHECK(p.boundary_values[static_cast<std::size_t>(k + 6)] == static_cast<double>(-k));
  for (std::size_t i = 0; i <= static_cast<std::size_t>(p.origin_index); ++i) CHECK(p.values[i] >= 0.0);
  CHECK_THROWS_AS(sample_bessel_example(0, 1e-3, RngStream(6, 0)), PreconditionError);
}

TEST_CASE("skew fBM: local time at boundaries and beta = 1 matches the Bessel example") {
  const auto s = sample_skew_fbm({0.3, 1e-3}, 4, RngStream(7, 0), 1);
  for (std::int64_t k = -4; k <= 1; ++k)
    CHECK(s.local_time[static_cast<std::size_t>(s.path.boundary_index(k))] == doctest::Approx(static_cast<double>(k)));
  CHECK(std::is_sorted(s.local_time.begin(), s.local_time.end()));

  // X_{-1} from both samplers; the skew walk is lattice valued, so dither it
  const double dt = 1e-3;
  std::vector<double> skew, bessel;
  RngCursor jitter(RngStream(8, 99));
  const auto sspec = skew_spec({1.0, dt}, std::int64_t{1} << 50);
  const auto bspec = bessel_spec(dt, std::int64_t{1} << 50);
  for (int i = 0; i < 3000; ++i) {
    const auto a = backward_window(sspec, 1.0, RngStream(8, static_cast<std::uint64_t>(i)));
    skew.push_back(a.front() + (2.0 * jitter.uniform() - 1.0) * std::sqrt(dt));
    const auto b = backward_window(bspec, 1.0, RngStream(9, static_cast<std::uint64_t>(i)));
    bessel.push_back(b.front());
  }
  CHECK(ks_two_sample(skew, bessel).pass);
}

TEST_CASE("max range schedule") {
  const auto sch = MaxRangeSchedule::default_schedule();
  CHECK(sch.levels == std::vector<double>{4, 16, 64, 256, 1024});
  int plus = 0, minus = 0, zero = 0, n = 100000;
  for (int i = 0; i < n; ++i) {
    const double y = draw_maxrange_y(sch, (i + 0.5) / n);
    plus += y == 4.0;
    minus += y == -4.0;
    zero += y == 0.0;
  }
  // P(Y = n_1) = P(Y = -n_1) = 2^-2
  CHECK(plus == doctest::Approx(0.25 * n).epsilon(1e-3));
  CHECK(minus == doctest::Approx(0.25 * n).epsilon(1e-3));
  CHECK(zero == doctest::Approx((1.0 - 0.5 - 2.0 / 32 - 2.0 / 1024) * n).epsilon(1e-2));

  const MaxRangeSchedule small{{0.25, 0.5}};
  const auto p = sample_maxrange_fbm(small, 30, 1e-2, RngStream(10, 0));
  for (std::size_t k = 0; k + 1 < p.boundaries.size(); ++k) CHECK(p.boundaries[k + 1] - p.boundaries[k] >= 100);
  CHECK_THROWS_AS((MaxRangeSchedule{{2.0, 1.0}}.validate()), PreconditionError);
}

TEST_CASE("integrable pieces: mean duration 1 and fair displacement") {
  const auto spec = integrable_spec(1e-4);
  ConcatOptions o;
  o.boundaries_only = true;
  const auto p = concat_decomposable(spec, 10000, 0, RngStream(11, 0), o);
  const double mean_t = p.horizon_neg / 10000.0;
  CHECK(mean_t == doctest::Approx(1.0).epsilon(0.025));
  int up = 0;
  for (std::size_t k = 0; k + 1 < p.boundary_values.size(); ++k) {
    const double d = p.boundary_values[k + 1] - p.boundary_values[k];
    CHECK(std::abs(d) == doctest::Approx(1.0));
    up += d > 0;
  }
  CHECK(std::abs(up - 5000) < 150);
  PieceSpec bad = bessel_spec(1e-3);
  CHECK_THROWS_AS(sample_integrable_fbm(bad, 1, 0, RngStream(1, 1)), PreconditionError);
}

TEST_CASE("heavy-tailed pieces") {
  const double c1 = heavy_c1(0.5);
  CHECK(eigen::lambda0({c1, eigen::kInf}).lambda0 == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(c1 < 1.0);
  const double dt = 1e-2;
  std::vector<double> t;
  for (int i = 0; i < 20000; ++i) {
    GridPiece piece(ParabolicDriftHit{c1}, dt, std::int64_t{1} << 50, RngStream(12, static_cast<std::uint64_t>(i)));
    t.push_back(static_cast<double>(piece.duration()) * dt);
  }
  // P(T > t) ~ t^(-0.75): least squares slope of log survival over [10, 1000]
  std::sort(t.begin(), t.end());
  std::vector<double> lx, ly;
  for (double x = 10.0; x <= 1000.0; x *= 1.5) {
    const auto above = t.end() - std::upper_bound(t.begin(), t.end(), x);
    lx.push_back(std::log(x));
    ly.push_back(std::log(static_cast<double>(above) / static_cast<double>(t.size())));
  }
  const double mx = mean(lx), my = mean(ly);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  CHECK(-sxy / sxx == doctest::Approx(0.75).epsilon(0.1 / 0.75));

  const auto p = sample_nonbbm_heavy(0.5, c1, 5, 1e-2, RngStream(13, 0));
  for (std::int64_t k = -5; k < 0; ++k) {
    const auto a = p.boundary_index(k), b = p.boundary_index(k + 1);
    const double base = p.values[static_cast<std::size_t>(a)];
    for (auto i = a; i <= b; ++i) {
      const double age = static_cast<double>(i - a) * 1e-2;
      CHECK(p.values[static_cast<std::size_t>(i)] - base + 1.0 - c1 * std::sqrt(age) >= -1e-9);
    }
  }
  CHECK_THROWS_AS(heavy_c1(1.5), PreconditionError);
}

TEST_CASE("windowed schedule") {
  const auto d = default_windowed_schedule();
  CHECK(d.k == std::vector<std::int64_t>{3, 4, 5});
  CHECK(d.pieces(3) == 12);
  CHECK(d.block_of(1) == 0);
  CHECK(d.block_of(4) == 1);
  CHECK(d.block_of(12) == 2);
  CHECK(d.block_of(13) == -1);
  CHECK_THROWS_AS(d.pieces(4), PreconditionError);
  CHECK_THROWS_AS((WindowedSchedule{{0.5, 0.5}, {1, 1}, {1.0, 1.0}}.validate()), PreconditionError);

  SUBCASE("tails are zero-length, heads fraction p, block mean of T is 1") {
    const double dt = 1e-3;
    WindowedSchedule s{{1.0 / 2.532}, {10000}, {1.0}};
    const auto spec = windowed_spec(s, dt);
    const RngStream rng(14, 0);
    std::vector<double> t;
    int heads = 0;
    for (std::int64_t i = 1; i <= 10000; ++i) {
      auto piece = make_piece(spec, -i, rng);
      const auto steps = piece->duration();
      if (steps > 0) {
        ++heads;
        CHECK(steps >= 1000);
      }
      t.push_back(static_cast<double>(steps) * dt);
    }
    const double p = s.p[0];
    CHECK(std::abs(heads - 10000 * p) < 3 * std::sqrt(10000 * p * (1 - p)));
    CHECK(mean(t) == doctest::Approx(1.0).epsilon(0.1));
  }

  SUBCASE("concatenation repeats boundaries for tails") {
    const auto p = sample_nonbbm_windowed(d, 3, 1e-2, RngStream(15, 0), 2);
    CHECK(p.boundaries.size() == 15);
    CHECK(std::is_sorted(p.boundaries.begin(), p.boundaries.end()));
    // positive pieces have T = 1
    CHECK(p.boundaries[14] - p.boundaries[12] == 200);
  }
}

TEST_CASE("sampler registry") {
  for (const auto& id : sampler_ids()) {
    if (id == "generic") continue;
    CHECK_NOTHROW(sampler_spec(id, nlohmann::json::object(), 1e-3));
  }
  CHECK_THROWS_AS(sampler_spec("teleport", nlohmann::json::object(), 1e-3), ConfigError);
  CHECK_THROWS_AS(sampler_spec("generic", nlohmann::json::object(), 1e-3), ConfigError);
  CHECK_THROWS_AS(sampler_spec("skew_fbm", {{"beta", 2.0}}, 1e-3), ConfigError);
  CHECK_THROWS_AS(sampler_spec("skew_fbm", {{"beta", "big"}}, 1e-3), ConfigError);
  const auto g = sampler_spec("generic", {{"rule", {{"kind", "hit_level"}, {"level", -2.0}}}}, 1e-3);
  CHECK(std::get<HitLevel>(g.rule).level == -2.0);
}
