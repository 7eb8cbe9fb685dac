#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "dirac/core.hpp"
#include "dirac/potential.hpp"

namespace dirac {

inline constexpr double kDefaultTol = 1e-10;

// Fundamental matrix at x = pi: columns are c(pi, lambda) and s(pi, lambda),
// i.e. M = [[c1, s1], [c2, s2]], together with its lambda-derivative.
struct MonodromyResult {
  Complex lambda{};
  Mat2 M;
  Mat2 dM_dlambda;  // zero when the derivative was not requested
  double est_error = 0.0;
  double liouville_defect = 0.0;  // |det M - exp(2 pi b)|
  long steps = 0;
};

// Samples of both fundamental solutions on a grid in [0, pi].
struct SolutionTrace {
  std::vector<double> xgrid;
  std::vector<Vec2> c_values;
  std::vector<Vec2> s_values;
  MonodromyResult monodromy;  // values at x = pi from the same integration
};

// Integrates y' = (-lambda J + J Q(x)) y with y(0) = I over [0, pi] by an
// adaptive Dormand-Prince 5(4) scheme with steps aligned to the breakpoints
// of Q. The variational system for d/dlambda is carried along when requested.
// Throws IntegrationError when the step size underflows.
MonodromyResult integrate_fundamental(const PotentialQ& q, Complex lambda, double tol = kDefaultTol,
                                      bool with_derivative = true);

// M(pi, lambda) from a Taylor-series integration carried out in quad
// precision. det M is formed before rounding, so the Wronskian keeps double
// accuracy even where |M|^2 exceeds |W| by many orders of magnitude.
struct ExtendedMonodromy {
  Complex lambda{};
  Mat2 M;
  Complex wronskian{};
  long steps = 0;
  int max_order = 0;
};

ExtendedMonodromy integrate_fundamental_extended(const PotentialQ& q, Complex lambda);

Complex discriminant(const MonodromyResult& m);  // c1(pi) + s2(pi)
Complex wronskian(const MonodromyResult& m);     // det M

// xgrid must be sorted and lie in [0, pi]; otherwise DomainError.
SolutionTrace solution_trace(const PotentialQ& q, Complex lambda, std::span<const double> xgrid,
                             double tol = kDefaultTol);

// CSV with columns x, Re/Im c1, c2, s1, s2.
void write_trace_csv(std::ostream& out, const SolutionTrace& trace);

}  // namespace dirac
