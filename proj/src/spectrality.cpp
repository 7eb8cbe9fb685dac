#include "dirac/spectrality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>

#include <Eigen/Dense>

#include "dirac/parallel.hpp"

namespace dirac {

namespace {

double series_sum(double x, double c, double lead, long terms) {
  // Smallest terms first keeps the rounding error at the level of the last ulp.
  double s = 0.0;
  for (long k = terms; k >= 1; --k) {
    const double d = static_cast<double>(k);
    s += 1.0 / (4.0 * d * d + 4.0 * d * x + c) + 1.0 / (4.0 * d * d - 4.0 * d * x + c);
  }
  return lead + s + 1.0 / (2.0 * static_cast<double>(terms));
}

}  // namespace

double series_bound_lemma1(double x, long terms) {
  if (std::abs(x) > 1.0) throw DomainError("series_bound_lemma1 needs |x| <= 1");
  if (terms < 1) throw DomainError("series_bound_lemma1 needs terms >= 1");
  return series_sum(x, 1.0, 1.0, terms);
}

double series_bound_lemma2(double x, double rb, long terms) {
  if (!(rb > 0.0 && rb < 1.0)) throw DomainError("series_bound_lemma2 needs 0 < rb < 1");
  if (std::abs(x) > rb) throw DomainError("series_bound_lemma2 needs |x| <= rb");
  if (terms < 1) throw DomainError("series_bound_lemma2 needs terms >= 1");
  return series_sum(x, rb * rb, 1.0 / (rb * rb), terms);
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::lemma1: return "lemma1";
    case Regime::lemma2: return "lemma2";
    default: return "none";
  }
}

Regime regime_for(const PotentialQ& q) {
  const double rb = std::abs(mean_b(q).real());
  if (rb >= 1.0) return Regime::lemma1;
  if (rb > kCondition2Floor / (2.0 * kPi)) return Regime::lemma2;
  return Regime::none;
}

double certificate_floor(const PotentialQ& q) {
  return 1e-10 * (1.0 + std::abs(std::exp(2.0 * kPi * mean_b(q))));
}

std::vector<CircleCertificate> circle_certificates(const PotentialQ& q, double t, int k_min, int k_max,
                                                   Regime regime, int samples) {
  std::vector<CircleCertificate> out;
  if (regime == Regime::none || regime != regime_for(q) || k_max < k_min) return out;
  const Complex b = mean_b(q);
  const double radius = regime == Regime::lemma1 ? 1.0 : std::abs(b.real());
  const double floor = certificate_floor(q);
  for (int k = k_min; k <= k_max; ++k)
    for (int j = 1; j <= 2; ++j) {
      CircleCertificate c;
      c.t = t;
      c.k = k;
      c.j = j;
      c.center = lattice_reference(k, j, t, b);
      c.radius = radius;
      out.push_back(c);
    }
  WindingOptions wopt;
  wopt.initial_samples = samples;
  wopt.zero_floor = floor;
  parallel_for(out.size(), [&](std::size_t i) {
    auto& c = out[i];
    const AnalyticFn f = [&q, t](Complex z) { return char_value(q, z, t, 1e-8); };
    try {
      const auto w = winding_on_circle(f, c.center, c.radius, wopt);
      c.winding = w.winding;
      c.min_abs_delta = w.min_abs;
    } catch (const ContourError&) {
      c.winding = 0;
      c.min_abs_delta = 0.0;
    }
    c.passed = c.min_abs_delta > floor && c.winding == 1;
  });
  return out;
}

double projection_norm(const Eigenpair& pair) {
  if (pair.degenerate) return std::numeric_limits<double>::infinity();
  return l2_norm(pair.grid, pair.phi) * l2_norm(pair.grid, pair.phi_star) / std::abs(pair.alpha);
}

double e_gamma_norm(std::span<const Eigenpair> pairs) {
  if (pairs.empty()) return 0.0;
  const auto& grid = pairs.front().grid;
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto m = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXcd A(2 * n, m), B(2 * n, m);
  Eigen::VectorXcd inv_alpha(m);
  for (Eigen::Index p = 0; p < m; ++p) {
    const auto& e = pairs[static_cast<std::size_t>(p)];
    if (e.degenerate || e.grid.size() != grid.size()) return std::numeric_limits<double>::infinity();
    inv_alpha(p) = 1.0 / e.alpha;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sw = std::sqrt(grid.weights[static_cast<std::size_t>(i)]);
      const auto u = static_cast<std::size_t>(i);
      A(2 * i, p) = sw * e.phi[u].v0;
      A(2 * i + 1, p) = sw * e.phi[u].v1;
      B(2 * i, p) = sw * e.phi_star[u].v0;
      B(2 * i + 1, p) = sw * e.phi_star[u].v1;
    }
  }
  auto r_factor = [m](const Eigen::MatrixXcd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(X);
    Eigen::MatrixXcd R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    return R;
  };
  const Eigen::MatrixXcd RA = r_factor(A);
  const Eigen::MatrixXcd RB = r_factor(B);
  const Eigen::MatrixXcd T = RA * inv_alpha.asDiagonal() * RB.adjoint();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(T);
  return svd.singularValues()(0);
}

namespace {

// Eigenpairs of the given lattice slots at a given grid size, built on demand.
class PairCache {
 public:
  PairCache(const PotentialQ& q, double t, std::vector<BlochEigenvalue> evs, double tol)
      : q_(q), t_(t), evs_(std::move(evs)), tol_(tol) {}

  const std::vector<Eigenpair>& at(int points) {
    auto it = cache_.find(points);
    if (it != cache_.end()) return it->second;
    const auto grid = period_grid(q_.breakpoints(), points);
    std::vector<Eigenpair> pairs(evs_.size());
    parallel_for(evs_.size(), [&](std::size_t i) { pairs[i] = make_eigenpair(q_, t_, evs_[i], grid, tol_); });
    return cache_.emplace(points, std::move(pairs)).first->second;
  }

  std::size_t size() const { return evs_.size(); }
  const BlochEigenvalue& eigenvalue(std::size_t i) const { return evs_[i]; }

 private:
  const PotentialQ& q_;
  double t_;
  std::vector<BlochEigenvalue> evs_;
  double tol_;
  std::map<int, std::vector<Eigenpair>> cache_;
};

IndexedNorm refined_norm(PairCache& cache, std::span<const std::size_t> members, int max_points) {
  auto value_at = [&](int points) {
    const auto& all = cache.at(points);
    std::vector<Eigenpair> sel;
    sel.reserve(members.size());
    for (auto i : members) sel.push_back(all[i]);
    return e_gamma_norm(sel);
  };
  IndexedNorm out;
  int points = 512;
  double prev = value_at(points);
  while (points < max_points) {
    const double next = value_at(2 * points);
    points *= 2;
    if (!std::isfinite(next) || std::abs(next - prev) < 1e-6) {
      out.refined = std::isfinite(next);
      prev = next;
      break;
    }
    prev = next;
  }
  out.value = prev;
  out.grid_points = points;
  return out;
}

}  // namespace

IndexedNorm e_gamma_norm(const PotentialQ& q, double t, std::span<const std::pair<int, int>> D,
                         double tol, int max_points) {
  const std::vector<std::vector<std::pair<int, int>>> one{{D.begin(), D.end()}};
  return e_gamma_norms(q, t, one, tol, max_points).front();
}

std::vector<IndexedNorm> e_gamma_norms(const PotentialQ& q, double t,
                                       std::span<const std::vector<std::pair<int, int>>> sets, double tol,
                                       int max_points) {
  std::vector<IndexedNorm> out(sets.size());
  bool any = false;
  int lo = 0, hi = 0;
  for (const auto& D : sets)
    for (const auto& [n, j] : D) {
      lo = any ? std::min(lo, n) : n;
      hi = any ? std::max(hi, n) : n;
      any = true;
    }
  if (!any) return out;
  SolverOptions opt;
  opt.tol = tol;
  const auto scan = eigenvalues_near_lattice(q, t, lo, hi, opt, true);
  std::vector<BlochEigenvalue> evs;
  std::map<std::pair<int, int>, std::size_t> index;
  for (const auto& e : scan.found)
    if (e.multiplicity == 1) {
      index[{e.n, e.j}] = evs.size();
      evs.push_back(e);
    }
  PairCache cache(q, t, evs, tol);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (sets[s].empty()) continue;
    std::vector<std::size_t> members;
    bool ok = true;
    for (const auto& key : sets[s]) {
      auto it = index.find(key);
      if (it == index.end()) {
        ok = false;
        break;
      }
      members.push_back(it->second);
    }
    out[s] = ok ? refined_norm(cache, members, max_points)
                : IndexedNorm{std::numeric_limits<double>::infinity(), 0, false};
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::spectral: return "spectral";
    case Verdict::asymptotically_spectral: return "asymptotically_spectral";
    case Verdict::fails_condition_2: return "fails_condition_2";
    default: return "inconclusive";
  }
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::spectral: return 0;
    case Verdict::asymptotically_spectral: return 3;
    case Verdict::fails_condition_2: return 2;
    default: return 4;
  }
}

SpectralityReport classify(const PotentialQ& q, std::span<const double> t_grid, const ClassifyOptions& opt) {
  SpectralityReport rep;
  rep.condition2 = check_condition_2(q);
  rep.lemma1[0] = lemma1_margin(q, Branch::plus);
  rep.lemma1[1] = lemma1_margin(q, Branch::minus);
  rep.lemma2[0] = lemma2_margin(q, Branch::plus);
  rep.lemma2[1] = lemma2_margin(q, Branch::minus);
  rep.remark2 = shifted_margins(q);
  if (!rep.condition2.satisfied) {
    rep.verdict = Verdict::fails_condition_2;
    return rep;
  }
  rep.regime = regime_for(q);
  bool lemma_pass = false;
  if (rep.regime == Regime::lemma1) lemma_pass = rep.lemma1[0].satisfied && rep.lemma1[1].satisfied;
  if (rep.regime == Regime::lemma2) lemma_pass = rep.lemma2[0].satisfied && rep.lemma2[1].satisfied;
  rep.margins_pass = lemma_pass || rep.remark2.passes;
  rep.used_shift = !lemma_pass && rep.remark2.passes;

  bool multiple_on_circle = false;
  if (rep.margins_pass) {
    const PotentialQ qc = rep.used_shift ? q.shifted(rep.remark2.a_minmax) : q;
    rep.certificates_pass = true;
    for (double t : t_grid) {
      auto certs = circle_certificates(qc, t, opt.k_min, opt.k_max, rep.regime, opt.certificate_samples);
      for (const auto& c : certs) {
        if (!c.passed) rep.certificates_pass = false;
        if (c.winding >= 2) {
          multiple_on_circle = true;
          rep.singularities.push_back({t, c.center, "multiplicity"});
        }
      }
      rep.certificates.insert(rep.certificates.end(), certs.begin(), certs.end());
    }
  }

  std::mt19937_64 rng(opt.seed);
  const int stride = std::max(1, opt.projection_t_stride);
  for (std::size_t ti = 0; ti < t_grid.size(); ti += static_cast<std::size_t>(stride)) {
    const double t = t_grid[ti];
    const auto scan = eigenvalues_near_lattice(q, t, opt.k_min, opt.k_max, opt.solver, true);
    for (const auto& m : scan.missing) rep.missing.push_back({t, m});
    std::vector<BlochEigenvalue> simple;
    for (const auto& e : scan.found) {
      if (e.multiplicity > 1)
        rep.singularities.push_back({t, e.lambda, "multiplicity"});
      else
        simple.push_back(e);
    }
    PairCache cache(q, t, simple, opt.solver.tol);
    std::vector<std::size_t> usable;
    {
      const auto& base = cache.at(512);
      for (std::size_t i = 0; i < base.size(); ++i) {
        if (base[i].degenerate) {
          rep.singularities.push_back({t, base[i].eigenvalue.lambda, "degenerate_alpha"});
          continue;
        }
        rep.projection_sup = std::max(rep.projection_sup, projection_norm(base[i]));
        usable.push_back(i);
      }
    }
    if (usable.empty()) continue;
    for (int s = 0; s < opt.random_sets; ++s) {
      std::vector<std::size_t> pick = usable;
      std::shuffle(pick.begin(), pick.end(), rng);
      std::uniform_int_distribution<std::size_t> size_dist(1, pick.size());
      pick.resize(size_dist(rng));
      std::sort(pick.begin(), pick.end());
      const auto v = refined_norm(cache, pick, 4096);
      rep.index_set_norms.push_back({t, static_cast<int>(pick.size()), v.value});
      rep.e_gamma_sup = std::max(rep.e_gamma_sup, v.value);
    }
  }

  if (rep.margins_pass && rep.certificates_pass && rep.singularities.empty())
    rep.verdict = Verdict::spectral;
  else if (rep.margins_pass && !rep.certificates_pass && !multiple_on_circle)
    rep.verdict = Verdict::inconclusive;
  else
    rep.verdict = Verdict::asymptotically_spectral;
  return rep;
}

namespace {

nlohmann::json complex_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const SpectralityReport& r) {
  nlohmann::json j;
  j["verdict"] = to_string(r.verdict);
  j["exit_code"] = exit_code(r.verdict);
  j["condition2"] = to_json(r.condition2);
  j["regime"] = to_string(r.regime);
  j["lemma1"] = {to_json(r.lemma1[0]), to_json(r.lemma1[1])};
  j["lemma2"] = {to_json(r.lemma2[0]), to_json(r.lemma2[1])};
  j["remark2"] = {{"a_plus", complex_json(r.remark2.plus.a_opt)},
                  {"value_plus", r.remark2.plus.value},
                  {"a_minus", complex_json(r.remark2.minus.a_opt)},
                  {"value_minus", r.remark2.minus.value},
                  {"a_minmax", complex_json(r.remark2.a_minmax)},
                  {"minmax_value", r.remark2.minmax_value},
                  {"threshold", r.remark2.threshold},
                  {"passes", r.remark2.passes}};
  j["margins_pass"] = r.margins_pass;
  j["used_shift"] = r.used_shift;
  std::size_t failed = 0;
  for (const auto& c : r.certificates) failed += c.passed ? 0 : 1;
  j["certificates"] = {{"count", r.certificates.size()}, {"failed", failed}, {"all_passed", r.certificates_pass}};
  auto& s = j["singularities"] = nlohmann::json::array();
  for (const auto& x : r.singularities)
    s.push_back({{"t", x.t}, {"lambda", complex_json(x.lambda)}, {"reason", x.reason}});
  auto& m = j["missing"] = nlohmann::json::array();
  for (const auto& [t, nj] : r.missing) m.push_back({{"t", t}, {"n", nj.first}, {"j", nj.second}});
  j["projection_sup"] = finite_or_null(r.projection_sup);
  j["e_gamma_sup"] = finite_or_null(r.e_gamma_sup);
  auto& ns = j["index_set_norms"] = nlohmann::json::array();
  for (const auto& x : r.index_set_norms) ns.push_back({{"t", x.t}, {"size", x.size}, {"value", finite_or_null(x.value)}});
  return j;
}

void write_certificate_csv(std::ostream& out, std::span<const CircleCertificate> certs) {
  out << "t,k,j,center_re,center_im,radius,min_abs_delta,winding,passed\n";
  char buf[320];
  for (const auto& c : certs) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%d,%d\n", c.t, c.k, c.j, c.center.real(),
                  c.center.imag(), c.radius, c.min_abs_delta, c.winding, c.passed ? 1 : 0);
    out << buf;
  }
}

}  // namespace dirac
