#include "dirac/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "dirac/parallel.hpp"

namespace dirac {

std::vector<Vec2> TargetFunction::operator()(std::span<const double> x) const {
  std::vector<double> inside;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] >= lo && x[i] <= hi) {
      inside.push_back(x[i]);
      where.push_back(i);
    }
  std::vector<Vec2> out(x.size());
  if (inside.empty() || !sample) return out;
  const auto v = sample(inside);
  for (std::size_t i = 0; i < where.size(); ++i) out[where[i]] = v[i];
  return out;
}

namespace {

void check_support(double lo, double hi) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("target support must be a finite interval");
}

template <class Scalar>
TargetFunction pointwise(double lo, double hi, Scalar fn, std::string desc) {
  check_support(lo, hi);
  TargetFunction f;
  f.lo = lo;
  f.hi = hi;
  f.description = std::move(desc);
  f.sample = [fn](std::span<const double> x) {
    std::vector<Vec2> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = fn(x[i]);
    return v;
  };
  return f;
}

BlochEigenvalue locate(const PotentialQ& q, int k, int j, double t, double tol) {
  SolverOptions opt;
  opt.tol = tol;
  const auto scan = eigenvalues_near_lattice(q, t, k, k, opt, true);
  for (const auto& e : scan.found)
    if (e.n == k && e.j == j) {
      if (e.multiplicity != 1) throw DomainError("requested mode is not simple");
      return e;
    }
  throw DomainError("no eigenvalue found for the requested mode");
}

}  // namespace

TargetFunction zero_target(double lo, double hi) {
  return pointwise(lo, hi, [](double) { return Vec2{}; }, "zero");
}

TargetFunction gaussian_target(double center, double scale, Vec2 amplitude, double lo, double hi) {
  if (!(scale > 0.0)) throw DomainError("gaussian scale must be positive");
  return pointwise(
      lo, hi,
      [=](double x) {
        const double u = (x - center) / scale;
        return std::exp(-u * u) * amplitude;
      },
      "gaussian");
}

TargetFunction exponential_target(Complex omega, Vec2 amplitude, double lo, double hi) {
  return pointwise(lo, hi, [=](double x) { return std::exp(1i * omega * x) * amplitude; }, "exponential");
}

TargetFunction polynomial_target(std::vector<Complex> coeffs, Vec2 amplitude, double lo, double hi) {
  return pointwise(
      lo, hi,
      [c = std::move(coeffs), amplitude](double x) {
        Complex p{};
        for (auto it = c.rbegin(); it != c.rend(); ++it) p = p * x + *it;
        return p * amplitude;
      },
      "polynomial");
}

TargetFunction sampled_target(std::vector<double> x, std::vector<Vec2> f) {
  if (x.size() < 2 || x.size() != f.size()) throw ParseError("sampled target needs at least two samples");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw ParseError("sample abscissae must be strictly increasing");
  TargetFunction t;
  t.lo = x.front();
  t.hi = x.back();
  t.breaks.assign(x.begin() + 1, x.end() - 1);
  t.description = "samples";
  t.sample = [xs = std::move(x), fs = std::move(f)](std::span<const double> p) {
    std::vector<Vec2> v(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto it = std::upper_bound(xs.begin(), xs.end(), p[i]);
      std::size_t r = static_cast<std::size_t>(it - xs.begin());
      r = std::clamp<std::size_t>(r, 1, xs.size() - 1);
      const double w = (p[i] - xs[r - 1]) / (xs[r] - xs[r - 1]);
      v[i] = (1.0 - w) * fs[r - 1] + w * fs[r];
    }
    return v;
  };
  return t;
}

TargetFunction mode_target(const PotentialQ& q, int k, int j, double t, double lo, double hi, double tol) {
  check_support(lo, hi);
  auto np = std::make_shared<NormalizedPair>(normalized_eigenpair(q, t, locate(q, k, j, t, tol), tol));
  TargetFunction f;
  f.lo = lo;
  f.hi = hi;
  f.description = "mode";
  f.sample = [q, np, tol](std::span<const double> x) {
    auto v = bloch_extend(q, np->pair, x, false, tol);
    for (auto& e : v) e = np->psi_scale * e;
    return v;
  };
  return f;
}

TargetFunction mode_packet_target(const PotentialQ& q, int k, int j, double t, double center, double scale,
                                  double lo, double hi, double tol) {
  if (!(scale > 0.0)) throw DomainError("packet scale must be positive");
  auto f = mode_target(q, k, j, t, lo, hi, tol);
  f.description = "packet";
  f.sample = [inner = f.sample, center, scale](std::span<const double> x) {
    auto v = inner(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = (x[i] - center) / scale;
      v[i] = std::exp(-u * u) * v[i];
    }
    return v;
  };
  return f;
}

TargetFunction read_target_csv(std::istream& in) {
  std::vector<double> xs;
  std::vector<Vec2> fs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    double x, a, b, c, d;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &x, &a, &b, &c, &d) != 5) {
      if (xs.empty()) continue;  // header
      throw ParseError("malformed target CSV row: " + line);
    }
    xs.push_back(x);
    fs.push_back({Complex(a, b), Complex(c, d)});
  }
  return sampled_target(std::move(xs), std::move(fs));
}

TargetFunction target_from_json(const nlohmann::json& j, const PotentialQ& q) {
  try {
    const std::string type = j.at("type");
    auto support = j.value("support", std::vector<double>{});
    auto amp = [&] {
      if (!j.contains("amplitude")) return Vec2{1.0, 0.0};
      const auto& a = j.at("amplitude");
      return Vec2{Complex(a.at(0).at(0), a.at(0).at(1)), Complex(a.at(1).at(0), a.at(1).at(1))};
    };
    auto need_support = [&] {
      if (support.size() != 2) throw ParseError("target needs \"support\": [lo, hi]");
    };
    if (type == "csv") {
      std::ifstream in(j.at("path").get<std::string>());
      if (!in) throw ParseError("cannot open target CSV");
      return read_target_csv(in);
    }
    need_support();
    if (type == "zero") return zero_target(support[0], support[1]);
    if (type == "gaussian")
      return gaussian_target(j.value("center", 0.0), j.value("scale", 1.0), amp(), support[0], support[1]);
    if (type == "exponential") {
      const auto w = j.value("omega", std::vector<double>{0.0, 0.0});
      return exponential_target(Complex(w.at(0), w.at(1)), amp(), support[0], support[1]);
    }
    if (type == "polynomial") {
      std::vector<Complex> c;
      for (const auto& e : j.at("coefficients")) c.emplace_back(e.at(0), e.at(1));
      return polynomial_target(std::move(c), amp(), support[0], support[1]);
    }
    if (type == "mode")
      return mode_target(q, j.at("k"), j.at("j"), j.at("t"), support[0], support[1]);
    if (type == "packet")
      return mode_packet_target(q, j.at("k"), j.at("j"), j.at("t"), j.value("center", 0.5 * (support[0] + support[1])),
                                j.value("scale", 2.0), support[0], support[1]);
    throw ParseError("unknown target type: " + type);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("target spec: ") + e.what());
  }
}

NormalizedPair normalize_pair(Eigenpair pair) {
  NormalizedPair np;
  np.phi_norm = l2_norm(pair.grid, pair.phi);
  np.psi_scale = 1.0 / np.phi_norm;
  np.x_scale = np.phi_norm / std::conj(pair.alpha);
  np.pair = std::move(pair);
  return np;
}

NormalizedPair normalized_eigenpair(const PotentialQ& q, double t, const BlochEigenvalue& ev, double tol,
                                    int grid_points) {
  return normalize_pair(make_eigenpair(q, t, ev, period_grid(q.breakpoints(), grid_points), tol));
}

std::vector<Vec2> bloch_extend(const PotentialQ& q, const Eigenpair& pair, std::span<const double> x, bool adjoint,
                               double tol) {
  const double t = pair.eigenvalue.t;
  if (adjoint) return evaluate_mode(q.adjoint(), pair.adjoint_lambda, pair.phi_star_coeffs, t, x, tol);
  return evaluate_mode(q, pair.eigenvalue.lambda, pair.phi_coeffs, t, x, tol);
}

Vec2 bloch_extend(const PotentialQ& q, const Eigenpair& pair, double x, bool adjoint, double tol) {
  const double p[1] = {x};
  return bloch_extend(q, pair, p, adjoint, tol)[0];
}

QuadratureGrid line_grid(const PotentialQ& q, double lo, double hi, std::span<const double> extra) {
  std::vector<double> breaks(extra.begin(), extra.end());
  const auto qb = q.breakpoints();
  const long m0 = static_cast<long>(std::floor(lo / kPi));
  const long m1 = static_cast<long>(std::ceil(hi / kPi));
  for (long m = m0; m <= m1; ++m) {
    breaks.push_back(m * kPi);
    for (double b : qb) breaks.push_back(m * kPi + b);
  }
  return composite_grid(lo, hi, breaks, 32, kPi / 16);
}

namespace {

// Coefficient against a target already sampled on grid g.
Complex coefficient_on(const PotentialQ& q, const QuadratureGrid& g, std::span<const Vec2> fv,
                       const NormalizedPair& np, double tol) {
  const auto X = bloch_extend(q, np.pair, g.nodes, true, tol);
  Complex s{};
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] * inner(fv[i], X[i]);
  return s * std::conj(np.x_scale);
}

}  // namespace

Complex coefficient(const PotentialQ& q, const TargetFunction& f, const NormalizedPair& np, double tol) {
  if (np.pair.degenerate) throw AdjointPairingError("degenerate pairing; coefficient skipped");
  const auto g = line_grid(q, f.lo, f.hi, f.breaks);
  return coefficient_on(q, g, f(g.nodes), np, tol);
}

std::vector<ExpansionResult> reconstruct_sweep(const PotentialQ& q, const TargetFunction& f, std::span<const int> Ks,
                                               int t_nodes, double a, double b, const ExpansionOptions& opt) {
  if (!check_condition_2(q).satisfied) throw DomainError("expansion requires condition (2): Re b != 0");
  if (t_nodes < 8) throw DomainError("expansion needs at least 8 t-nodes");
  if (Ks.empty()) throw DomainError("no truncation order given");
  if (!(b > a)) throw DomainError("window must have positive length");
  int kmax = 0;
  for (int K : Ks) {
    if (K < 0) throw DomainError("truncation order must be non-negative");
    kmax = std::max(kmax, K);
  }
  const auto& rule = gauss_legendre(t_nodes);
  const auto fgrid = line_grid(q, f.lo, f.hi, f.breaks);
  const auto fvals = f(fgrid.nodes);
  const auto wgrid = line_grid(q, a, b);
  const auto target = f(wgrid.nodes);
  const std::size_t rows = static_cast<std::size_t>(2 * (2 * kmax + 1));
  const std::size_t nt = static_cast<std::size_t>(t_nodes);

  struct NodeWork {
    std::vector<std::vector<Vec2>> level;  // contribution by |k|
    std::vector<Complex> coeff;            // by row
    std::vector<ExpansionHole> holes;
  };
  std::vector<NodeWork> work(nt);
  SolverOptions sopt;
  sopt.tol = opt.tol;
  parallel_for(nt, [&](std::size_t ti) {
    const double t = rule.nodes[ti];
    auto& w = work[ti];
    w.level.assign(static_cast<std::size_t>(kmax + 1), std::vector<Vec2>(wgrid.size()));
    w.coeff.assign(rows, Complex{});
    const auto scan = eigenvalues_near_lattice(q, t, -kmax, kmax, sopt, false);
    const auto grid = period_grid(q.breakpoints(), opt.grid_points);
    for (int k = -kmax; k <= kmax; ++k)
      for (int j = 1; j <= 2; ++j) {
        auto it = std::find_if(scan.found.begin(), scan.found.end(),
                               [k, j](const BlochEigenvalue& e) { return e.n == k && e.j == j; });
        if (it == scan.found.end()) {
          w.holes.push_back({t, k, j, "missing"});
          continue;
        }
        if (it->multiplicity != 1) {
          w.holes.push_back({t, k, j, "multiple"});
          continue;
        }
        try {
          const auto np = normalize_pair(make_eigenpair(q, t, *it, grid, opt.tol));
          if (np.pair.degenerate) {
            w.holes.push_back({t, k, j, "degenerate_alpha"});
            continue;
          }
          const Complex c = coefficient_on(q, fgrid, fvals, np, opt.tol);
          w.coeff[static_cast<std::size_t>((k + kmax) * 2 + (j - 1))] = c;
          const auto psi = bloch_extend(q, np.pair, wgrid.nodes, false, opt.tol);
          const Complex scale = 0.5 * rule.weights[ti] * c * np.psi_scale;
          auto& acc = w.level[static_cast<std::size_t>(std::abs(k))];
          for (std::size_t i = 0; i < psi.size(); ++i) acc[i] += scale * psi[i];
        } catch (const Error& e) {
          w.holes.push_back({t, k, j, e.what()});
        }
      }
  });

  std::vector<ExpansionResult> out;
  for (int K : Ks) {
    ExpansionResult r;
    r.K = K;
    r.t_nodes = rule.nodes;
    r.t_weights = rule.weights;
    r.window = wgrid;
    r.coefficients.assign(static_cast<std::size_t>(2 * (2 * K + 1)), std::vector<Complex>(nt));
    r.reconstruction.assign(wgrid.size(), Vec2{});
    for (std::size_t ti = 0; ti < nt; ++ti) {
      for (int lvl = 0; lvl <= K; ++lvl) {
        const auto& acc = work[ti].level[static_cast<std::size_t>(lvl)];
        for (std::size_t i = 0; i < acc.size(); ++i) r.reconstruction[i] = r.reconstruction[i] + acc[i];
      }
      for (int k = -K; k <= K; ++k)
        for (int j = 1; j <= 2; ++j)
          r.coefficients[static_cast<std::size_t>((k + K) * 2 + (j - 1))][ti] =
              work[ti].coeff[static_cast<std::size_t>((k + kmax) * 2 + (j - 1))];
      for (const auto& h : work[ti].holes)
        if (std::abs(h.k) <= K) r.holes.push_back(h);
    }
    r.complete = r.holes.empty();
    std::vector<Vec2> diff(wgrid.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = target[i] - r.reconstruction[i];
    r.l2_error = l2_norm(wgrid, diff);
    r.target_norm = l2_norm(wgrid, target);
    out.push_back(std::move(r));
  }
  return out;
}

ExpansionResult reconstruct(const PotentialQ& q, const TargetFunction& f, int K, int t_nodes, double a, double b,
                            const ExpansionOptions& opt) {
  const int Ks[1] = {K};
  return std::move(reconstruct_sweep(q, f, Ks, t_nodes, a, b, opt).front());
}

void write_function_csv(std::ostream& out, std::span<const double> x, std::span<const Vec2> f) {
  out << "x,re_f1,im_f1,re_f2,im_f2\n";
  char buf[256];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", x[i], f[i].v0.real(), f[i].v0.imag(),
                  f[i].v1.real(), f[i].v1.imag());
    out << buf;
  }
}

nlohmann::json sweep_summary_json(std::span<const ExpansionResult> results, double a, double b) {
  nlohmann::json j;
  j["window"] = {a, b};
  auto& rows = j["results"] = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json h = nlohmann::json::array();
    for (const auto& x : r.holes) h.push_back({{"t", x.t}, {"k", x.k}, {"j", x.j}, {"reason", x.reason}});
    rows.push_back({{"K", r.K},
                    {"t_nodes", r.t_nodes.size()},
                    {"l2_error", r.l2_error},
                    {"target_norm", r.target_norm},
                    {"complete", r.complete},
                    {"holes", h}});
  }
  return j;
}

}  // namespace dirac
