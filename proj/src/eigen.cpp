#include "fbmlab/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fbmlab/errors.hpp"

namespace fbmlab::eigen {

namespace {

constexpr double kLambdaMax = 50.0;

struct Shot {
  bool zero_inside;
  double end_value;
};

// RK4 for (psi, psi') with psi(c1) = 0, psi'(c1) = 1.
Shot shoot(double a, double b, double lambda, std::int64_t n, std::vector<double>* samples,
           std::int64_t every) {
  const double h = (b - a) / static_cast<double>(n);
  double y = 0.0, p = 1.0;
  auto f = [lambda](double x, double y_, double p_) { return x * p_ - 2.0 * lambda * y_; };
  if (samples) samples->push_back(y);
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = a + static_cast<double>(i) * h;
    const double k1y = p, k1p = f(x, y, p);
    const double k2y = p + 0.5 * h * k1p, k2p = f(x + 0.5 * h, y + 0.5 * h * k1y, p + 0.5 * h * k1p);
    const double k3y = p + 0.5 * h * k2p, k3p = f(x + 0.5 * h, y + 0.5 * h * k2y, p + 0.5 * h * k2p);
    const double k4y = p + h * k3p, k4p = f(x + h, y + h * k3y, p + h * k3p);
    y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    if (samples && (i + 1) % every == 0) samples->push_back(y);
    if (!samples && y <= 0.0) return {true, y};
  }
  return {y <= 0.0, y};
}

}  // namespace

double Interval::lo() const { return std::isinf(c1) ? -truncation_bound : c1; }
double Interval::hi() const { return std::isinf(c2) ? truncation_bound : c2; }

void Interval::validate() const {
  require(!std::isnan(c1) && !std::isnan(c2), "Interval: NaN endpoint");
  require(c1 < c2, "Interval: c1 < c2 required");
  require(truncation_bound >= 6.0, "Interval: truncation bound must be >= 6");
  require(lo() < hi(), "Interval: truncated interval is empty");
}

EigenResult lambda0(const Interval& iv, double ode_step, double tol, int psi_points) {
  iv.validate();
  require(tol > 0.0, "lambda0: tol must be positive");
  const double a = iv.lo(), b = iv.hi(), width = b - a;
  if (ode_step <= 0.0) ode_step = 1e-4 * width;
  require(ode_step <= 1e-3 * width * (1 + 1e-12), "lambda0: ode_step must be <= 1e-3 * width");
  const auto n = static_cast<std::int64_t>(std::ceil(width / ode_step));
  double lo = 0.0, hi = kLambdaMax;
  if (shoot(a, b, lo, n, nullptr, 0).zero_inside)
    throw InfeasibleError("lambda0: psi already vanishes at lambda = 0");
  if (!shoot(a, b, hi, n, nullptr, 0).zero_inside)
    throw InfeasibleError("lambda0: no eigenvalue below " + std::to_string(kLambdaMax) + " on [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (shoot(a, b, mid, n, nullptr, 0).zero_inside)
      hi = mid;
    else
      lo = mid;
  }
  EigenResult r;
  r.lambda0 = 0.5 * (lo + hi);
  r.ode_step = width / static_cast<double>(n);
  r.bisection_width = hi - lo;
  // psi at lambda just below the threshold is positive on (c1, c2)
  std::vector<double> full;
  full.reserve(static_cast<std::size_t>(n + 1));
  shoot(a, b, lo, n, &full, 1);
  const int pts = std::max(psi_points, 3);
  double peak = 0.0;
  for (double v : full) peak = std::max(peak, std::abs(v));
  for (int i = 0; i < pts; ++i) {
    const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(i) * static_cast<double>(n) / (pts - 1)));
    r.x.push_back(a + static_cast<double>(idx) * r.ode_step);
    r.psi.push_back(peak > 0 ? full[idx] / peak : 0.0);
  }
  for (std::size_t i = 2; i + 1 < full.size(); ++i)
    if ((full[i] > 0) != (full[i - 1] > 0)) ++r.interior_sign_changes;
  return r;
}

double inverse_lambda0_c1(double target, double tol) {
  require(target > 0.5 && target < 1.0, "inverse_lambda0_c1: target must lie in (0.5, 1)");
  double lo = 0.0, hi = 1.0;  // lambda0(0, inf) = 1/2, lambda0(1, inf) = 1
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (lambda0({mid, kInf}, 0.0, 1e-11).lambda0 < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

long double erfi_ld(long double x) {
  // 2/sqrt(pi) * sum x^(2k+1) / (k! (2k+1)); all terms share the sign of x
  const long double x2 = x * x;
  long double term = x;  // x^(2k+1)/k!
  long double sum = x;
  for (int k = 1; k < 1000; ++k) {
    term *= x2 / k;
    const long double add = term / (2 * k + 1);
    sum += add;
    if (std::abs(add) <= 1e-21L * std::abs(sum)) break;
  }
  return 2.0L / std::sqrt(std::numbers::pi_v<long double>) * sum;
}

}  // namespace

double erfi(double x) {
  require(std::abs(x) <= 10.0, "erfi: |x| <= 10 required");
  return static_cast<double>(erfi_ld(x));
}

// Extended precision: the two large terms cancel near the root.
double psi_closed_form(double x) {
  const long double xl = x;
  const long double s = std::sqrt(2.0L * std::numbers::pi_v<long double>);
  const long double e = erfi_ld(xl / std::numbers::sqrt2_v<long double>);
  return static_cast<double>(2.0L * std::exp(0.5L * xl * xl) * xl + s * e * (1.0L - xl * xl));
}

double find_cprime2(double tol) {
  require(tol >= 1e-8, "find_cprime2: tol must be >= 1e-8");
  double lo = 1.0, hi = 4.0;
  double flo = psi_closed_form(lo), fhi = psi_closed_form(hi);
  if ((flo > 0) == (fhi > 0)) throw InfeasibleError("find_cprime2: no sign change on (1, 4)");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = psi_closed_form(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace fbmlab::eigen
