#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbmlab/construct_frw.hpp"
#include "fbmlab/pieces.hpp"
#include "fbmlab/rng.hpp"

namespace fbmlab {

inline constexpr double kAlpha = 0.01;

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = true;
  std::int64_t n_samples = 0;
  std::string notes;

  nlohmann::json to_json() const;
  static TestReport from_json(const nlohmann::json& j);
};

std::string report_table(const std::vector<TestReport>& reports);

double normal_cdf(double x);
// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);
double chi_square_survival(double x, double dof);
double bessel3_cdf(double r, double t);

TestReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                   const std::string& name = "ks", double alpha = kAlpha);
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b,
                         const std::string& name = "ks_two_sample", double alpha = kAlpha);
// Pearson correlation of (x_i, y_i); rho * sqrt(N) is compared with N(0,1).
TestReport lag1_test(std::span<const double> x, std::span<const double> y, const std::string& name = "lag1",
                     double alpha = kAlpha);
TestReport runs_test(std::span<const std::int8_t> signs, const std::string& name = "runs",
                     double alpha = kAlpha);
TestReport chi_square_counts(std::span<const std::int64_t> counts, std::span<const double> probs,
                             const std::string& name = "chi_square", double alpha = kAlpha);
// Holm step-down over the parts: passes iff every p > alpha / m.
TestReport holm(const std::string& name, const std::vector<TestReport>& parts, double alpha = kAlpha);

TestReport chi_square_coins(std::span<const std::int8_t> values, double alpha = kAlpha);
TestReport bessel3_marginal_test(std::span<const double> samples, double t, double alpha = kAlpha);

struct ForwardnessOptions {
  double lag = 1.0;
  bool dither = false;            // jitter lattice-valued increments
  bool negative_control = false;  // use backward increments from time 0
  double alpha = kAlpha;
  int threads = 0;                // 0: default_threads()
};
// Pools the unit-lag increments of X_{S_n + t} - X_{S_n}, t in [0, horizon],
// over n_paths independent paths: KS against N(0,1) plus lag-1 correlation.
TestReport test_forwardness(const PieceSpec& spec, std::int64_t n, std::int64_t n_paths, double horizon,
                            const RngStream& rng, const ForwardnessOptions& opts = {});

struct DriftRow {
  double t, estimate, std_error, theory;
};
using DriftCurve = std::vector<DriftRow>;
DriftCurve drift_curve(double beta, std::vector<double> ts, std::int64_t n_paths, const RngStream& rng,
                       double dt = 1e-3, int threads = 0);

struct LilResult {
  TestReport report;
  std::vector<double> max_ratio;  // per path
};
LilResult lil_envelope(const PieceSpec& spec, std::int64_t horizon, std::int64_t n_paths, const RngStream& rng,
                       double threshold = 1.1, double required_fraction = 0.95, int threads = 0);

// Cross-seed test that the coins right after S_{-n} are fair and independent:
// chi-square on the pattern of the first `width` values, plus lag-1.
TestReport shifted_coins_values(const std::vector<std::vector<std::int8_t>>& heads, double alpha = kAlpha);
// V_k for k = S_{-level}, ..., S_{-level} + width - 1.
std::vector<std::int8_t> shifted_coins(const IncrementSeq& seq, std::int64_t level, int width = 4);
TestReport shifted_coins_test(const std::vector<IncrementSeq>& seqs, std::int64_t level, int width = 4,
                              double alpha = kAlpha);

}  // namespace fbmlab
