#pragma once

#include <limits>
#include <vector>

namespace fbmlab::eigen {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double c1 = -1.0;  // may be -inf
  double c2 = 1.0;   // may be +inf
  double truncation_bound = 8.0;

  double lo() const;
  double hi() const;
  void validate() const;
};

struct EigenResult {
  double lambda0 = 0.0;
  std::vector<double> x;
  std::vector<double> psi;  // scaled to max 1
  double ode_step = 0.0;
  double bisection_width = 0.0;
  int interior_sign_changes = 0;
};

// Ground state of A = (1/2)(d^2/dx^2 - x d/dx) with Dirichlet conditions:
// shoots psi'' = x psi' - 2 lambda psi from c1 and bisects lambda in [0, 50]
// on whether psi vanishes inside (c1, c2]. ode_step <= 0 picks 1e-4 * width.
EigenResult lambda0(const Interval& iv, double ode_step = 0.0, double tol = 1e-10,
                    int psi_points = 201);

// c1 in (0, 1) with lambda0(c1, inf) = target, by bisection.
double inverse_lambda0_c1(double target, double tol = 1e-7);

double erfi(double x);
double psi_closed_form(double x);
double find_cprime2(double tol = 1e-8);

}  // namespace fbmlab::eigen
