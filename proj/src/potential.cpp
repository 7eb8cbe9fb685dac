#include "dirac/potential.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "dirac/quadrature.hpp"

namespace dirac {

namespace {

constexpr double kEdgeTol = 1e-14;

double reduce_period(double x) {
  double r = x - kPi * std::floor(x / kPi);
  if (r >= kPi) r -= kPi;
  if (r < 0.0) r = 0.0;
  return r;
}

}  // namespace

PeriodicFunction::PeriodicFunction(std::vector<FourierTerm> fourier,
                                   std::vector<PiecewiseTerm> pieces) {
  std::map<int, Complex> merged;
  for (const auto& t : fourier) merged[t.harmonic] += t.coefficient;
  for (const auto& [m, c] : merged)
    if (c != Complex{}) fourier_.push_back({m, c});

  for (const auto& p : pieces) {
    if (!(p.x0 >= -kEdgeTol && p.x1 <= kPi + kEdgeTol && p.x0 < p.x1))
      throw DomainError("piecewise term must satisfy 0 <= x0 < x1 <= pi");
    if (p.value != Complex{})
      pieces_.push_back({std::max(0.0, p.x0), std::min(kPi, p.x1), p.value});
  }
  std::sort(pieces_.begin(), pieces_.end(),
            [](const PiecewiseTerm& a, const PiecewiseTerm& b) { return a.x0 < b.x0; });
  for (std::size_t i = 1; i < pieces_.size(); ++i)
    if (pieces_[i].x0 < pieces_[i - 1].x1 - kEdgeTol)
      throw DomainError("piecewise terms overlap");
}

Complex PeriodicFunction::fourier_value(double x) const {
  Complex s{};
  for (const auto& t : fourier_) {
    if (t.harmonic == 0)
      s += t.coefficient;
    else
      s += t.coefficient * std::polar(1.0, 2.0 * t.harmonic * x);
  }
  return s;
}

Complex PeriodicFunction::piecewise_value(double x) const {
  if (pieces_.empty()) return {};
  const double r = reduce_period(x);
  for (const auto& p : pieces_)
    if (r >= p.x0 && r < p.x1) return p.value;
  return {};
}

Complex PeriodicFunction::integral(double x) const {
  Complex s{};
  for (const auto& t : fourier_) {
    if (t.harmonic == 0)
      s += t.coefficient * x;
    else
      s += t.coefficient * (std::polar(1.0, 2.0 * t.harmonic * x) - 1.0) /
           Complex(0.0, 2.0 * t.harmonic);
  }
  for (const auto& p : pieces_) {
    const double len = std::min(x, p.x1) - p.x0;
    if (len > 0.0) s += p.value * len;
  }
  return s;
}

PeriodicFunction PeriodicFunction::conjugate() const {
  std::vector<FourierTerm> f;
  for (const auto& t : fourier_) f.push_back({-t.harmonic, std::conj(t.coefficient)});
  std::vector<PiecewiseTerm> p;
  for (const auto& t : pieces_) p.push_back({t.x0, t.x1, std::conj(t.value)});
  return {std::move(f), std::move(p)};
}

PeriodicFunction PeriodicFunction::operator+(const PeriodicFunction& o) const {
  std::vector<FourierTerm> f = fourier_;
  f.insert(f.end(), o.fourier_.begin(), o.fourier_.end());

  std::vector<double> cuts{0.0, kPi};
  for (const auto* src : {&pieces_, &o.pieces_})
    for (const auto& p : *src) {
      cuts.push_back(p.x0);
      cuts.push_back(p.x1);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<PiecewiseTerm> p;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const Complex v = piecewise_value(mid) + o.piecewise_value(mid);
    if (v != Complex{}) p.push_back({cuts[i], cuts[i + 1], v});
  }
  return {std::move(f), std::move(p)};
}

PeriodicFunction PeriodicFunction::scaled(Complex s) const {
  std::vector<FourierTerm> f;
  for (const auto& t : fourier_) f.push_back({t.harmonic, s * t.coefficient});
  std::vector<PiecewiseTerm> p;
  for (const auto& t : pieces_) p.push_back({t.x0, t.x1, s * t.value});
  return {std::move(f), std::move(p)};
}

std::vector<double> PeriodicFunction::breakpoints() const {
  std::vector<double> b;
  for (const auto& p : pieces_) {
    if (p.x0 > kEdgeTol) b.push_back(p.x0);
    if (p.x1 < kPi - kEdgeTol) b.push_back(p.x1);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

Complex PotentialQ::eval(int r, int c, double x) const {
  const PeriodicFunction* f[4] = {&a1, &a2, &a3, &a4};
  return (*f[2 * r + c])(x);
}

std::vector<double> PotentialQ::breakpoints() const {
  std::vector<double> b;
  for (const auto* f : {&a1, &a2, &a3, &a4}) {
    const auto fb = f->breakpoints();
    b.insert(b.end(), fb.begin(), fb.end());
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

PotentialQ PotentialQ::adjoint() const {
  return {a1.conjugate(), a3.conjugate(), a2.conjugate(), a4.conjugate()};
}

PotentialQ PotentialQ::shifted(Complex c) const {
  const auto s = PeriodicFunction::constant(c);
  return {a1 + s, a2, a3, a4 + s};
}

PotentialQ build_Qb(Complex b) {
  return {PeriodicFunction{}, PeriodicFunction::constant(-b), PeriodicFunction::constant(b),
          PeriodicFunction{}};
}

Complex mean_b(const PotentialQ& q) {
  return (q.a3.period_integral() - q.a2.period_integral()) / (2.0 * kPi);
}

Complex accumulate_a(const PotentialQ& q, double x) {
  if (!(x >= 0.0 && x <= kPi)) throw DomainError("accumulate_a: x must lie in [0, pi]");
  return 0.5 * (q.a3.integral(x) - q.a2.integral(x));
}

ConditionMargin check_condition_2(const PotentialQ& q) {
  ConditionMargin m;
  m.value = std::abs((q.a3.period_integral() - q.a2.period_integral()).real());
  m.threshold = 0.0;
  m.satisfied = m.value > kCondition2Floor;
  return m;
}

double branch_integral(const PotentialQ& q, Branch branch, Complex shift) {
  const double s = sign_of(branch);
  const Complex b = mean_b(q);
  const Complex si(0.0, s);
  auto integrand = [&](double x) {
    const Complex u = q.a1(x) + shift + si * (q.a2(x) + b);
    const Complex v = q.a3(x) - b + si * (q.a4(x) + shift);
    return std::norm(u) + std::norm(v);
  };
  const auto br = q.breakpoints();
  return integrate_adaptive(integrand, 0.0, kPi, br);
}

double lemma1_threshold() { return 4.0 / kPi; }

double lemma2_threshold(double re_b) {
  return 2.0 * kPi / (2.0 / (re_b * re_b) + kPi * kPi / 3.0);
}

ConditionMargin lemma1_margin(const PotentialQ& q, Branch branch) {
  ConditionMargin m;
  m.branch = branch;
  m.value = branch_integral(q, branch);
  m.threshold = lemma1_threshold();
  m.satisfied = m.value <= m.threshold;
  m.precondition_failed = !(std::abs(mean_b(q).real()) >= 1.0);
  return m;
}

ConditionMargin lemma2_margin(const PotentialQ& q, Branch branch) {
  ConditionMargin m;
  m.branch = branch;
  const double rb = std::abs(mean_b(q).real());
  m.value = branch_integral(q, branch);
  m.precondition_failed = !(rb > kCondition2Floor / (2.0 * kPi) && rb < 1.0);
  m.threshold = rb > 0.0 ? lemma2_threshold(rb) : 0.0;
  m.satisfied = m.value <= m.threshold;
  return m;
}

ShiftReport shifted_margins(const PotentialQ& q) {
  const Complex b = mean_b(q);
  const Complex i1 = q.a1.period_integral();
  const Complex i2 = q.a2.period_integral();
  const Complex i3 = q.a3.period_integral();
  const Complex i4 = q.a4.period_integral();

  // Branch integrand is |a + p|^2 + |a + r|^2 with p = a1 + s i (a2 + b) and
  // r = a4 - s i (a3 - b); its minimiser is minus the mean of (p + r) / 2.
  auto branch_opt = [&](Branch br) {
    const Complex si(0.0, sign_of(br));
    const Complex ip = i1 + si * (i2 + kPi * b);
    const Complex ir = i4 - si * (i3 - kPi * b);
    BranchShift out;
    out.a_opt = -(ip + ir) / (2.0 * kPi);
    out.value = branch_integral(q, br, out.a_opt);
    return out;
  };

  ShiftReport rep;
  rep.plus = branch_opt(Branch::plus);
  rep.minus = branch_opt(Branch::minus);

  // Both branch integrals are m_s + 2pi |a - a_s|^2, so the min-max point lies
  // on the segment joining the two minimisers. Golden-section search along it.
  auto worst = [&](double tau) {
    const Complex a = rep.plus.a_opt + tau * (rep.minus.a_opt - rep.plus.a_opt);
    const double fp = rep.plus.value + 2.0 * kPi * std::norm(a - rep.plus.a_opt);
    const double fm = rep.minus.value + 2.0 * kPi * std::norm(a - rep.minus.a_opt);
    return std::max(fp, fm);
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = worst(x1), f2 = worst(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = worst(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = worst(x2);
    }
  }
  double tau = 0.5 * (lo + hi);
  for (double end : {0.0, 1.0})
    if (worst(end) < worst(tau)) tau = end;
  rep.a_minmax = rep.plus.a_opt + tau * (rep.minus.a_opt - rep.plus.a_opt);
  rep.minmax_value = worst(tau);

  const double rb = std::abs(b.real());
  if (rb >= 1.0)
    rep.threshold = lemma1_threshold();
  else if (rb > kCondition2Floor / (2.0 * kPi))
    rep.threshold = lemma2_threshold(rb);
  else
    rep.threshold = 0.0;
  rep.passes = rep.threshold > 0.0 && rep.minmax_value <= rep.threshold;
  return rep;
}

namespace {

PeriodicFunction function_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_object()) throw ParseError(std::string("potential entry '") + key + "' must be an object");
  std::vector<FourierTerm> f;
  std::vector<PiecewiseTerm> p;
  if (j.contains("fourier")) {
    for (const auto& t : j.at("fourier")) {
      if (!t.is_array() || t.size() != 3)
        throw ParseError(std::string(key) + ".fourier entries must be [m, re, im]");
      f.push_back({t[0].get<int>(), {t[1].get<double>(), t[2].get<double>()}});
    }
  }
  if (j.contains("piecewise")) {
    for (const auto& t : j.at("piecewise")) {
      if (!t.is_array() || t.size() != 4)
        throw ParseError(std::string(key) + ".piecewise entries must be [x0, x1, re, im]");
      p.push_back({t[0].get<double>(), t[1].get<double>(), {t[2].get<double>(), t[3].get<double>()}});
    }
  }
  try {
    return {std::move(f), std::move(p)};
  } catch (const DomainError& e) {
    throw ParseError(std::string(key) + ": " + e.what());
  }
}

nlohmann::json function_to_json(const PeriodicFunction& f) {
  nlohmann::json j;
  j["fourier"] = nlohmann::json::array();
  for (const auto& t : f.fourier())
    j["fourier"].push_back({t.harmonic, t.coefficient.real(), t.coefficient.imag()});
  j["piecewise"] = nlohmann::json::array();
  for (const auto& t : f.pieces())
    j["piecewise"].push_back({t.x0, t.x1, t.value.real(), t.value.imag()});
  return j;
}

}  // namespace

PotentialQ potential_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("potential must be a JSON object");
  PotentialQ q;
  PeriodicFunction* dst[4] = {&q.a1, &q.a2, &q.a3, &q.a4};
  const char* keys[4] = {"a1", "a2", "a3", "a4"};
  for (int k = 0; k < 4; ++k) {
    if (!j.contains(keys[k])) throw ParseError(std::string("potential is missing key '") + keys[k] + "'");
    try {
      *dst[k] = function_from_json(j.at(keys[k]), keys[k]);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string(keys[k]) + ": " + e.what());
    }
  }
  return q;
}

nlohmann::json potential_to_json(const PotentialQ& q) {
  return {{"a1", function_to_json(q.a1)},
          {"a2", function_to_json(q.a2)},
          {"a3", function_to_json(q.a3)},
          {"a4", function_to_json(q.a4)}};
}

PotentialQ load_potential(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open potential file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed JSON in '" + path + "': " + e.what());
  }
  return potential_from_json(j);
}

nlohmann::json to_json(const ConditionMargin& m) {
  return {{"value", m.value},
          {"threshold", m.threshold},
          {"satisfied", m.satisfied},
          {"branch", to_string(m.branch)},
          {"precondition_failed", m.precondition_failed}};
}

}  // namespace dirac
