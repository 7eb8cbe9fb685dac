#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirac/core.hpp"

namespace dirac {

// c * exp(i*2*m*x)
struct FourierTerm {
  int harmonic = 0;
  Complex coefficient{};
};

// Constant `value` on [x0, x1) within one period [0, pi).
struct PiecewiseTerm {
  double x0 = 0.0;
  double x1 = 0.0;
  Complex value{};
};

// A pi-periodic complex function: a finite Fourier sum plus a piecewise
// constant part whose pieces lie in [0, pi) without overlap. Uncovered parts of
// the period contribute zero.
class PeriodicFunction {
 public:
  PeriodicFunction() = default;
  PeriodicFunction(std::vector<FourierTerm> fourier, std::vector<PiecewiseTerm> pieces);

  static PeriodicFunction constant(Complex c) { return PeriodicFunction({{0, c}}, {}); }

  Complex operator()(double x) const { return fourier_value(x) + piecewise_value(x); }
  Complex fourier_value(double x) const;
  // Value of the piecewise part at x reduced modulo pi (left-closed pieces).
  Complex piecewise_value(double x) const;

  // Exact integral over [0, x] for x in [0, pi].
  Complex integral(double x) const;
  Complex period_integral() const { return integral(kPi); }

  // Pointwise complex conjugate.
  PeriodicFunction conjugate() const;
  PeriodicFunction operator+(const PeriodicFunction& o) const;
  PeriodicFunction scaled(Complex s) const;

  const std::vector<FourierTerm>& fourier() const { return fourier_; }
  const std::vector<PiecewiseTerm>& pieces() const { return pieces_; }
  // Interior jump locations in (0, pi).
  std::vector<double> breakpoints() const;
  bool is_zero() const { return fourier_.empty() && pieces_.empty(); }

 private:
  std::vector<FourierTerm> fourier_;
  std::vector<PiecewiseTerm> pieces_;
};

// Q = [[a1, a2], [a3, a4]].
struct PotentialQ {
  PeriodicFunction a1, a2, a3, a4;

  Complex eval(int r, int c, double x) const;
  // Union of breakpoints of all four entries, sorted.
  std::vector<double> breakpoints() const;
  // Conjugate-transpose potential [[conj a1, conj a3], [conj a2, conj a4]]
  // generating the adjoint operator.
  PotentialQ adjoint() const;
  // Q + c*I
  PotentialQ shifted(Complex c) const;
};

PotentialQ build_Qb(Complex b);

// b = (1 / 2pi) * integral over [0, pi] of (a3 - a2).
Complex mean_b(const PotentialQ& q);
// a(x) = (1/2) * integral over [0, x] of (a3 - a2); throws DomainError off [0, pi].
Complex accumulate_a(const PotentialQ& q, double x);

enum class Branch { plus, minus };
inline double sign_of(Branch b) { return b == Branch::plus ? 1.0 : -1.0; }
inline const char* to_string(Branch b) { return b == Branch::plus ? "+" : "-"; }

struct ConditionMargin {
  double value = 0.0;
  double threshold = 0.0;
  bool satisfied = false;
  Branch branch = Branch::plus;
  bool precondition_failed = false;
};

// Floor below which |Re integral(a3 - a2)| counts as zero.
inline constexpr double kCondition2Floor = 1e-12;

// satisfied <=> |Re integral(a3 - a2)| > floor. Threshold reported as 0.
ConditionMargin check_condition_2(const PotentialQ& q);

// integral over [0, pi] of |a1 + s*i*(a2 + b)|^2 + |a3 - b + s*i*a4|^2.
double branch_integral(const PotentialQ& q, Branch branch, Complex shift = {});

// Simplicity conditions for |Re b| >= 1 (threshold 4/pi) and 0 < |Re b| < 1
// (threshold 2pi / (2/(Re b)^2 + pi^2/3)). The precondition on Re b is
// reported, not enforced.
ConditionMargin lemma1_margin(const PotentialQ& q, Branch branch);
ConditionMargin lemma2_margin(const PotentialQ& q, Branch branch);
double lemma1_threshold();
double lemma2_threshold(double re_b);

struct BranchShift {
  Complex a_opt{};
  double value = 0.0;
};

struct ShiftReport {
  BranchShift plus;
  BranchShift minus;
  // Single shift minimising the larger of the two branch integrals.
  Complex a_minmax{};
  double minmax_value = 0.0;
  double threshold = 0.0;  // regime threshold for the current Re b (0 if Re b = 0)
  bool passes = false;
};

ShiftReport shifted_margins(const PotentialQ& q);

// JSON schema: {"a1": {"fourier": [[m, re, im], ...], "piecewise": [[x0, x1, re, im], ...]}, ...}
PotentialQ potential_from_json(const nlohmann::json& j);
nlohmann::json potential_to_json(const PotentialQ& q);
PotentialQ load_potential(const std::string& path);

nlohmann::json to_json(const ConditionMargin& m);

}  // namespace dirac
