#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirac/bloch.hpp"
#include "dirac/potential.hpp"

namespace dirac {

// 1 + sum_{s=1..terms} [1/(4s^2+4sx+1) + 1/(4s^2-4sx+1)] + 1/(2 terms).
// The last term bounds the remainder from above.
double series_bound_lemma1(double x, long terms);
// 1/rb^2 + sum_{s=1..terms} [1/(4s^2+4sx+rb^2) + 1/(4s^2-4sx+rb^2)] + 1/(2 terms).
double series_bound_lemma2(double x, double rb, long terms);

enum class Regime { none, lemma1, lemma2 };
std::string to_string(Regime r);

// Regime selected by |Re b| alone: lemma1 for |Re b| >= 1, lemma2 for 0 < |Re b| < 1.
Regime regime_for(const PotentialQ& q);

struct CircleCertificate {
  double t = 0.0;
  int k = 0;
  int j = 0;  // 1: centre 2k - (t + ib), 2: centre 2k + (t + ib)
  Complex center{};
  double radius = 0.0;
  double min_abs_delta = 0.0;
  int winding = 0;
  bool passed = false;
};

// Zero floor on the certificate circles: 1e-10 (1 + |exp(2 pi b)|).
double certificate_floor(const PotentialQ& q);

// Both centres for each k in [k_min, k_max]; radius 1 (lemma1) or |Re b| (lemma2).
// Empty when the regime precondition on |Re b| fails.
std::vector<CircleCertificate> circle_certificates(const PotentialQ& q, double t, int k_min, int k_max,
                                                   Regime regime, int samples = 32);

// ||Phi|| ||Phi*|| / |alpha|; infinity when alpha is degenerate.
double projection_norm(const Eigenpair& pair);

// Operator norm of f -> sum_{p in D} (f, Phi*_p) Phi_p / alpha_p, from the
// weighted QR factors of the sampled families. Pairs must share one grid.
double e_gamma_norm(std::span<const Eigenpair> pairs);

struct IndexedNorm {
  double value = 0.0;
  int grid_points = 0;
  bool refined = false;  // doubling changed the value by less than 1e-6
};

// e_gamma_norm for the index set D at fibre t, starting at 512 quadrature
// points and doubling until successive values agree to 1e-6.
IndexedNorm e_gamma_norm(const PotentialQ& q, double t, std::span<const std::pair<int, int>> D,
                         double tol = 1e-12, int max_points = 4096);
// Same for many index sets at one fibre, sharing the eigenpair computations.
std::vector<IndexedNorm> e_gamma_norms(const PotentialQ& q, double t,
                                       std::span<const std::vector<std::pair<int, int>>> sets,
                                       double tol = 1e-12, int max_points = 4096);

struct Singularity {
  double t = 0.0;
  Complex lambda{};
  std::string reason;  // "multiplicity" or "degenerate_alpha"
};

enum class Verdict { spectral, asymptotically_spectral, inconclusive, fails_condition_2 };
std::string to_string(Verdict v);
// 0 spectral, 3 asymptotically spectral, 2 Re b = 0, 4 inconclusive.
int exit_code(Verdict v);

struct ClassifyOptions {
  int k_min = -8;
  int k_max = 8;
  int certificate_samples = 32;
  int projection_t_stride = 4;  // every stride-th t of the grid enters the norm scan
  int random_sets = 20;         // random index sets per sampled t
  std::uint64_t seed = 0x5eed5eedULL;
  SolverOptions solver;
};

struct NormSample {
  double t = 0.0;
  int size = 0;
  double value = 0.0;
};

struct SpectralityReport {
  ConditionMargin condition2;
  ConditionMargin lemma1[2];
  ConditionMargin lemma2[2];
  ShiftReport remark2;
  Regime regime = Regime::none;
  bool margins_pass = false;
  bool used_shift = false;
  std::vector<CircleCertificate> certificates;
  bool certificates_pass = false;
  std::vector<Singularity> singularities;
  std::vector<NormSample> index_set_norms;
  double projection_sup = 0.0;   // sup of rank-one projection norms
  double e_gamma_sup = 0.0;      // sup over sampled index sets
  std::vector<std::pair<double, std::pair<int, int>>> missing;
  Verdict verdict = Verdict::inconclusive;
};

SpectralityReport classify(const PotentialQ& q, std::span<const double> t_grid,
                           const ClassifyOptions& opt = {});

nlohmann::json to_json(const SpectralityReport& r);
void write_certificate_csv(std::ostream& out, std::span<const CircleCertificate> certs);

}  // namespace dirac
