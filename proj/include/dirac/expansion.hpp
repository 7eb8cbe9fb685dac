#pragma once

#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirac/bloch.hpp"

namespace dirac {

// A 2-vector function on a finite support, sampled in batches. Values outside
// [lo, hi] are zero.
struct TargetFunction {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breaks;  // points of reduced smoothness inside the support
  std::function<std::vector<Vec2>(std::span<const double>)> sample;
  std::string description;

  std::vector<Vec2> operator()(std::span<const double> x) const;
};

TargetFunction zero_target(double lo, double hi);
// amplitude * exp(-((x - center) / scale)^2)
TargetFunction gaussian_target(double center, double scale, Vec2 amplitude, double lo, double hi);
// amplitude * exp(i omega x)
TargetFunction exponential_target(Complex omega, Vec2 amplitude, double lo, double hi);
// amplitude * sum_k coeffs[k] x^k
TargetFunction polynomial_target(std::vector<Complex> coeffs, Vec2 amplitude, double lo, double hi);
// Linear interpolation of (x, f1, f2) samples; x strictly increasing.
TargetFunction sampled_target(std::vector<double> x, std::vector<Vec2> f);
// Gaussian-tapered normalised mode: exp(-((x - center) / scale)^2) Psi_{k,j,t}(x).
TargetFunction mode_packet_target(const PotentialQ& q, int k, int j, double t, double center, double scale,
                                  double lo, double hi, double tol = 1e-12);
// Psi_{k,j,t} itself on [lo, hi] (no taper).
TargetFunction mode_target(const PotentialQ& q, int k, int j, double t, double lo, double hi,
                           double tol = 1e-12);

// CSV columns: x, Re f1, Im f1, Re f2, Im f2.
TargetFunction read_target_csv(std::istream& in);
// JSON spec: {"type": "gaussian" | "exponential" | "polynomial" | "zero" | "mode" | "packet", ...}.
TargetFunction target_from_json(const nlohmann::json& j, const PotentialQ& q);

// Eigenpair with the biorthogonal normalisation Psi = Phi/||Phi||,
// X = Phi* ||Phi|| / conj(alpha), so (Psi, X) = 1.
struct NormalizedPair {
  Eigenpair pair;
  double phi_norm = 0.0;
  Complex psi_scale{};  // Psi = psi_scale * Phi
  Complex x_scale{};    // X = x_scale * Phi*
};

NormalizedPair normalize_pair(Eigenpair pair);
NormalizedPair normalized_eigenpair(const PotentialQ& q, double t, const BlochEigenvalue& ev,
                                    double tol = 1e-12, int grid_points = 512);

// Phi (or Phi*, with `adjoint`) at arbitrary x by Phi(x + m pi) = exp(i pi t m) Phi(x).
std::vector<Vec2> bloch_extend(const PotentialQ& q, const Eigenpair& pair, std::span<const double> x,
                               bool adjoint = false, double tol = 1e-12);
Vec2 bloch_extend(const PotentialQ& q, const Eigenpair& pair, double x, bool adjoint = false,
                  double tol = 1e-12);

// Quadrature grid over [lo, hi] with breaks at the multiples of pi, the
// potential's breakpoints (shifted per period) and the extra breaks.
QuadratureGrid line_grid(const PotentialQ& q, double lo, double hi, std::span<const double> extra = {});

// a(t) = (f, X) over the support of f.
Complex coefficient(const PotentialQ& q, const TargetFunction& f, const NormalizedPair& np, double tol = 1e-12);

struct ExpansionHole {
  double t = 0.0;
  int k = 0;
  int j = 0;
  std::string reason;
};

struct ExpansionResult {
  int K = 0;
  std::vector<double> t_nodes;
  std::vector<double> t_weights;
  // coefficients[(k + K) * 2 + (j - 1)][t index]
  std::vector<std::vector<Complex>> coefficients;
  QuadratureGrid window;  // sample grid of [a, b]
  std::vector<Vec2> reconstruction;
  double l2_error = 0.0;
  double target_norm = 0.0;
  std::vector<ExpansionHole> holes;
  bool complete = true;
};

struct ExpansionOptions {
  double tol = 1e-12;
  int grid_points = 512;
};

// f ~ 1/2 sum_{|k| <= K, j} integral over (-1, 1] of a_{k,j}(t) Psi_{k,j,t} dt with
// Gauss-Legendre in t. Throws DomainError if Re b = 0 or t_nodes < 8.
ExpansionResult reconstruct(const PotentialQ& q, const TargetFunction& f, int K, int t_nodes, double a,
                            double b, const ExpansionOptions& opt = {});

// One eigenpair computation serves every K in the sweep.
std::vector<ExpansionResult> reconstruct_sweep(const PotentialQ& q, const TargetFunction& f,
                                               std::span<const int> Ks, int t_nodes, double a, double b,
                                               const ExpansionOptions& opt = {});

void write_function_csv(std::ostream& out, std::span<const double> x, std::span<const Vec2> f);
nlohmann::json sweep_summary_json(std::span<const ExpansionResult> results, double a, double b);

}  // namespace dirac
