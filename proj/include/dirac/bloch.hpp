#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dirac/contour.hpp"
#include "dirac/monodromy.hpp"
#include "dirac/potential.hpp"
#include "dirac/quadrature.hpp"

namespace dirac {

// Eigenvalue of L_t(Q) with its lattice label (n, j): j = 1 pairs with the
// reference point 2n - (t + ib), j = 2 with 2n + (t + ib).
struct BlochEigenvalue {
  double t = 0.0;
  int n = 0;
  int j = 0;
  Complex lambda{};
  int multiplicity = 1;
  double residual = 0.0;  // |Delta(lambda, t)|
  bool converged = true;
};

inline Complex lattice_reference(int n, int j, double t, Complex b) {
  const double s = j == 1 ? -1.0 : 1.0;
  return 2.0 * n + s * (t + 1i * b);
}

struct CharacteristicValue {
  Complex value{};
  Complex derivative{};  // d/dlambda, zero unless requested
  MonodromyResult monodromy;
};

// Delta(lambda, t) = exp(2 i pi t) - exp(i pi t) F(lambda) + W(pi, lambda).
Complex char_value(const PotentialQ& q, Complex lambda, double t, double tol = kDefaultTol);
CharacteristicValue char_value_with_derivative(const PotentialQ& q, Complex lambda, double t,
                                               double tol = kDefaultTol);

struct SolverOptions {
  double tol = 1e-12;                // integration tolerance for refinement
  double winding_tol = 1e-8;         // integration tolerance for contour sampling
  int circle_samples = 24;
  int max_newton = 40;
  double cluster_separation = 1e-5;  // closer roots are reported as one multiple eigenvalue
};

// Newton stopping rule: |Delta| <= 1e-11 (1 + |exp(2 pi b)|) with a step below 1e-12.
double residual_tolerance(const PotentialQ& q);

struct NewtonResult {
  Complex lambda{};
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Newton iteration on Delta(., t) from `start`; iterates leaving the disc
// |z - start| <= max_radius abort the run (converged = false).
NewtonResult newton_refine(const PotentialQ& q, double t, Complex start, double max_radius,
                           const SolverOptions& opt = {});

// All eigenvalues in the rectangle with multiplicities (argument principle with
// adaptive bisection, then Newton). Results sorted by (Re, Im) and labelled by
// the nearest lattice reference points.
std::vector<BlochEigenvalue> eigenvalues_in_rect(const PotentialQ& q, double t, const Rect& rect,
                                                 const SolverOptions& opt = {});

// Total zero count of Delta(., t) inside the rectangle.
int count_in_rect(const PotentialQ& q, double t, const Rect& rect, const SolverOptions& opt = {});

struct LatticeScan {
  std::vector<BlochEigenvalue> found;
  std::vector<std::pair<int, int>> missing;  // (n, j) slots with no root in the disc
  double radius = 1.0;
  bool precondition_warning = false;         // condition (Re b != 0) fails
};

// For n in [n_min, n_max] and j in {1, 2}, search the disc of radius
// min(1, |Re b|) about the lattice reference point. With `certify` the disc is
// first checked by a winding count; without it Newton runs directly from the
// reference point.
LatticeScan eigenvalues_near_lattice(const PotentialQ& q, double t, int n_min, int n_max,
                                     const SolverOptions& opt = {}, bool certify = true);

// Labels eigenvalues in place by nearest free lattice slot; a root of
// multiplicity m occupies m slots and keeps the label of the closest one.
void assign_lattice_indices(std::vector<BlochEigenvalue>& evs, double t, Complex b);

// phi(x) = x1 c(x) + x2 s(x)
struct ModeCoefficients {
  Complex x1{};
  Complex x2{};
  bool used_second_row = false;
};

// Null vector of (M - exp(i pi t) I) x = 0. Uses row one when |s1| > 1e-8 |M|, otherwise
// row two; throws DegenerateEigenvectorError if neither row determines it.
ModeCoefficients eigenvector_coefficients(const Mat2& M, double t);

struct SampledMode {
  Complex lambda{};
  ModeCoefficients coeffs;
  std::vector<Vec2> values;  // on the requested grid
  Vec2 at_zero{};
  Vec2 at_pi{};
};

SampledMode eigenfunction(const PotentialQ& q, double t, const BlochEigenvalue& ev,
                          std::span<const double> xgrid, double tol = kDefaultTol,
                          bool normalize = false, const QuadratureGrid* norm_grid = nullptr);

// Eigenfunction of the adjoint problem L_t(Q*) for the eigenvalue nearest
// conj(lambda). Throws AdjointPairingError if that eigenvalue is farther than
// 1e-6 from conj(lambda).
SampledMode adjoint_eigenfunction(const PotentialQ& q, double t, const BlochEigenvalue& ev,
                                  std::span<const double> xgrid, double tol = kDefaultTol);

// Evaluates x1 c(x) + x2 s(x) at arbitrary real points (reduced to one period
// by quasi-periodicity).
std::vector<Vec2> evaluate_mode(const PotentialQ& q, Complex lambda, const ModeCoefficients& coeffs,
                                double t, std::span<const double> points, double tol = kDefaultTol);

inline constexpr double kAlphaFloor = 1e-10;

struct Eigenpair {
  BlochEigenvalue eigenvalue;
  QuadratureGrid grid;     // on [0, pi]
  std::vector<Vec2> phi;
  std::vector<Vec2> phi_star;
  ModeCoefficients phi_coeffs;
  ModeCoefficients phi_star_coeffs;
  Complex adjoint_lambda{};
  Complex alpha{};
  bool degenerate = false;  // |alpha| below kAlphaFloor
};

Eigenpair make_eigenpair(const PotentialQ& q, double t, const BlochEigenvalue& ev,
                         const QuadratureGrid& grid, double tol = kDefaultTol);

// (f, g) = integral of <f, g> on the grid.
Complex l2_inner(const QuadratureGrid& grid, std::span<const Vec2> f, std::span<const Vec2> g);
double l2_norm(const QuadratureGrid& grid, std::span<const Vec2> f);

// alpha = (phi, phi_star).
Complex pairing_alpha(const Eigenpair& pair);
Complex cross_pairing(const Eigenpair& a, const Eigenpair& b);

struct Theorem1Row {
  double t = 0.0;
  int n = 0;
  int j = 0;
  Complex lambda{};
  double scaled_value_error = 0.0;     // n |lambda - reference|
  double scaled_function_error = 0.0;  // n ||phi - leading term||
  double scaled_corrected_error = 0.0; // n ||phi - phase-corrected leading term||
  Complex alpha_ratio{};               // (phi, phi*) / 2pi, both unnormalised
};

struct Theorem1Report {
  bool declined = false;  // condition on Re b fails
  std::vector<Theorem1Row> rows;
  std::vector<std::pair<int, int>> missing;
  double max_scaled_value_error = 0.0;
  double max_scaled_function_error = 0.0;
  double max_value_slope = 0.0;     // log-log slope of n r_val(n) vs n, worst series
  double max_function_slope = 0.0;
  double max_scaled_corrected_error = 0.0;
  double max_corrected_slope = 0.0;  // diagnostic only, not part of `pass`
  double max_alpha_deviation = 0.0;  // max |alpha / 2pi - 1|
  // Smallest N in the scanned range with every slot |n| >= N found and simple.
  int simple_threshold = 0;
  bool pass = false;
};

inline constexpr double kTheorem1SlopeLimit = 0.1;
// Scaled errors below this are roundoff and are clamped before fitting.
inline constexpr double kTheorem1ErrorFloor = 1e-8;

// Leading term of the eigenfunction asymptotics, d_j exp(a(x)) exp(i((-1)^j 2n + t + ib) x).
Vec2 leading_eigenfunction(const PotentialQ& q, int n, int j, double t, double x);
// Adjoint analogue, d_j exp(-conj a(x)) exp(i((-1)^j 2n + t - i conj b) x).
Vec2 leading_adjoint_eigenfunction(const PotentialQ& q, int n, int j, double t, double x);

// theta(x) = (1/2) integral_0^x (a1 + a4). The part of JQ commuting with J
// rotates solutions by theta, which the leading term above omits.
Complex diagonal_phase(const PotentialQ& q, double x);
// Leading term times exp(-i theta) for j = 2 and exp(i theta) for j = 1.
Vec2 corrected_leading_eigenfunction(const PotentialQ& q, int n, int j, double t, double x);

Theorem1Report verify_theorem1(const PotentialQ& q, std::span<const double> t_grid, int n_min,
                               int n_max, const SolverOptions& opt = {});

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y, double floor = 0.0);

std::vector<double> default_t_grid(int count = 33);

// CSV export: t, n, j, re, im, multiplicity, residual.
void write_eigenvalue_csv(std::ostream& out, std::span<const BlochEigenvalue> evs);
std::vector<BlochEigenvalue> read_eigenvalue_csv(std::istream& in);

}  // namespace dirac
