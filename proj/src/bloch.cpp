#include "dirac/bloch.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace dirac {

namespace {

Complex unit_phase(double t) { return std::polar(1.0, kPi * t); }

double zero_floor(const PotentialQ& q) {
  return 1e-13 * (1.0 + std::abs(std::exp(2.0 * kPi * mean_b(q))));
}

AnalyticFn delta_fn(const PotentialQ& q, double t, double tol) {
  return [&q, t, tol](Complex z) { return char_value(q, z, t, tol); };
}

AnalyticFn log_derivative_fn(const PotentialQ& q, double t, double tol) {
  return [&q, t, tol](Complex z) {
    const auto cv = char_value_with_derivative(q, z, t, tol);
    return cv.derivative / cv.value;
  };
}

struct ClusterResult {
  bool resolved = false;          // power sums consistent with the expected count
  std::vector<Complex> roots;
  Complex mean{};
  double spread = 0.0;
};

ClusterResult resolve_cluster(const PotentialQ& q, double t, Complex center, double radius,
                              int count, const SolverOptions& opt) {
  ClusterResult out;
  const auto g = log_derivative_fn(q, t, std::max(opt.tol, 1e-10));
  std::vector<Complex> prev;
  for (int nodes = 32; nodes <= 512; nodes *= 2) {
    auto p = circle_power_sums(g, center, radius, count, nodes);
    const bool stable = !prev.empty() && std::abs(p[0] - prev[0]) <= 1e-6 &&
                        std::abs(p[1] - prev[1]) <= 1e-8 * radius * (1 + count);
    prev = p;
    if (!stable) continue;
    if (std::abs(p[0] - static_cast<double>(count)) > 0.05) return out;
    out.resolved = true;
    out.mean = center + p[1] / static_cast<double>(count);
    for (auto r : roots_from_power_sums(p, count)) {
      out.roots.push_back(center + r);
      out.spread = std::max(out.spread, std::abs(center + r - out.mean));
    }
    return out;
  }
  return out;
}

class RectSolver {
 public:
  RectSolver(const PotentialQ& q, double t, const SolverOptions& opt) : q_(q), t_(t), opt_(opt) {
    wopt_.initial_samples = 8;
    wopt_.zero_floor = zero_floor(q);
  }

  int count(const Rect& r) const { return winding_on_rect(delta_fn(q_, t_, opt_.winding_tol), r, wopt_).winding; }

  void solve(const Rect& r, int n, int depth = 0) {
    if (n <= 0) return;
    if (depth > 80) throw ContourError("eigenvalue search did not converge; rectangle too deep");
    const double diam = r.diameter();
    if (n == 1 && diam <= 2.5) {
      const auto nr = newton_refine(q_, t_, r.center(), diam, opt_);
      if (nr.converged && r.contains(nr.lambda, 1e-12 * (1.0 + diam))) {
        push(nr.lambda, 1, nr.residual, true);
        return;
      }
    }
    if (n >= 2 && diam <= 0.5) {
      const auto cl = resolve_cluster(q_, t_, r.center(), 0.5 * diam * 1.05, n, opt_);
      if (cl.resolved && cl.spread <= opt_.cluster_separation) {
        push(cl.mean, n, std::abs(char_value(q_, cl.mean, t_, opt_.tol)), true);
        return;
      }
      if (cl.resolved && diam <= 1e-4) {
        for (auto z : cl.roots) {
          const auto nr = newton_refine(q_, t_, z, diam, opt_);
          push(nr.converged ? nr.lambda : z, 1, nr.residual, nr.converged);
        }
        return;
      }
    }
    if (n == 1 && diam <= 1e-7) {
      const auto cl = resolve_cluster(q_, t_, r.center(), diam, 1, opt_);
      push(cl.resolved ? cl.mean : r.center(), 1, std::abs(char_value(q_, r.center(), t_, opt_.tol)), false);
      return;
    }
    static constexpr double kFractions[] = {0.5371, 0.4629, 0.5893, 0.4107, 0.6571, 0.3429};
    const bool vertical_cut = r.width() >= r.height();
    for (double f : kFractions) {
      Rect a = r, b = r;
      if (vertical_cut) {
        a.re1 = b.re0 = r.re0 + f * r.width();
      } else {
        a.im1 = b.im0 = r.im0 + f * r.height();
      }
      int na = 0, nb = 0;
      try {
        na = count(a);
        nb = count(b);
      } catch (const ContourError&) {
        continue;
      }
      if (na < 0 || nb < 0 || na + nb != n) continue;
      solve(a, na, depth + 1);
      solve(b, nb, depth + 1);
      return;
    }
    throw ContourError("every trial split of the rectangle passes through an eigenvalue");
  }

  std::vector<BlochEigenvalue> take() { return std::move(found_); }

 private:
  void push(Complex z, int mult, double residual, bool converged) {
    BlochEigenvalue ev;
    ev.t = t_;
    ev.lambda = z;
    ev.multiplicity = mult;
    ev.residual = residual;
    ev.converged = converged;
    found_.push_back(ev);
  }

  const PotentialQ& q_;
  double t_;
  SolverOptions opt_;
  WindingOptions wopt_;
  std::vector<BlochEigenvalue> found_;
};

}  // namespace

Complex char_value(const PotentialQ& q, Complex lambda, double t, double tol) {
  const auto m = integrate_fundamental(q, lambda, tol, false);
  const Complex e = unit_phase(t);
  return e * e - e * discriminant(m) + wronskian(m);
}

CharacteristicValue char_value_with_derivative(const PotentialQ& q, Complex lambda, double t,
                                               double tol) {
  CharacteristicValue cv;
  cv.monodromy = integrate_fundamental(q, lambda, tol, true);
  const Mat2& M = cv.monodromy.M;
  const Mat2& D = cv.monodromy.dM_dlambda;
  const Complex e = unit_phase(t);
  cv.value = e * e - e * M.trace() + M.det();
  const Complex dW = D(0, 0) * M(1, 1) + M(0, 0) * D(1, 1) - D(0, 1) * M(1, 0) - M(0, 1) * D(1, 0);
  cv.derivative = -e * D.trace() + dW;
  return cv;
}

double residual_tolerance(const PotentialQ& q) {
  return 1e-11 * (1.0 + std::abs(std::exp(2.0 * kPi * mean_b(q))));
}

NewtonResult newton_refine(const PotentialQ& q, double t, Complex start, double max_radius,
                           const SolverOptions& opt) {
  const double rtol = residual_tolerance(q);
  NewtonResult out;
  Complex z = start;
  auto cv = char_value_with_derivative(q, z, t, opt.tol);
  double prev_step = std::numeric_limits<double>::infinity();
  int evals = 1;
  while (evals < opt.max_newton) {
    out.iterations = evals;
    out.lambda = z;
    out.residual = std::abs(cv.value);
    if (cv.value == Complex{}) {
      out.converged = true;
      return out;
    }
    if (cv.derivative == Complex{}) return out;
    const Complex step = cv.value / cv.derivative;
    const double ss = std::abs(step);
    if (out.residual <= rtol && (ss <= 1e-12 * (1.0 + std::abs(z)) || ss >= 0.5 * prev_step)) {
      out.converged = true;
      return out;
    }
    // Damped step: halve until the residual decreases and the iterate stays in the disc.
    double damp = 1.0;
    bool moved = false;
    for (int h = 0; h < 12 && evals < opt.max_newton; ++h, damp *= 0.5) {
      const Complex z1 = z - damp * step;
      if (!std::isfinite(z1.real()) || !std::isfinite(z1.imag()) || std::abs(z1 - start) > max_radius) continue;
      auto cv1 = char_value_with_derivative(q, z1, t, opt.tol);
      ++evals;
      if (std::abs(cv1.value) < out.residual || out.residual <= rtol) {
        z = z1;
        cv = std::move(cv1);
        moved = true;
        break;
      }
    }
    if (!moved) return out;
    prev_step = damp * ss;
  }
  out.lambda = z;
  out.residual = std::abs(cv.value);
  return out;
}

int count_in_rect(const PotentialQ& q, double t, const Rect& rect, const SolverOptions& opt) {
  return RectSolver(q, t, opt).count(rect);
}

std::vector<BlochEigenvalue> eigenvalues_in_rect(const PotentialQ& q, double t, const Rect& rect,
                                                 const SolverOptions& opt) {
  if (!(rect.re1 > rect.re0 && rect.im1 > rect.im0)) throw DomainError("rectangle must have positive extent");
  Rect r = rect;
  const double jitter = 1e-3 * (1.0 + std::max(rect.width(), rect.height()));
  for (int attempt = 0;; ++attempt) {
    try {
      RectSolver solver(q, t, opt);
      solver.solve(r, solver.count(r));
      auto evs = solver.take();
      assign_lattice_indices(evs, t, mean_b(q));
      std::sort(evs.begin(), evs.end(), [](const BlochEigenvalue& a, const BlochEigenvalue& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
      });
      return evs;
    } catch (const ContourError&) {
      if (attempt >= 3) throw;
      const double d = jitter * (attempt + 1);
      r = {rect.re0 - d, rect.re1 + 0.7 * d, rect.im0 - 0.6 * d, rect.im1 + 0.9 * d};
    }
  }
}

LatticeScan eigenvalues_near_lattice(const PotentialQ& q, double t, int n_min, int n_max,
                                     const SolverOptions& opt, bool certify) {
  LatticeScan scan;
  const Complex b = mean_b(q);
  const double rb = std::abs(b.real());
  scan.precondition_warning = !check_condition_2(q).satisfied;
  scan.radius = scan.precondition_warning ? 1.0 : std::min(1.0, rb);
  WindingOptions wopt;
  wopt.initial_samples = opt.circle_samples;
  wopt.zero_floor = zero_floor(q);

  for (int n = n_min; n <= n_max; ++n) {
    for (int j = 1; j <= 2; ++j) {
      const Complex c = lattice_reference(n, j, t, b);
      BlochEigenvalue ev;
      ev.t = t;
      ev.n = n;
      ev.j = j;
      int w = 1;
      if (certify) {
        try {
          w = winding_on_circle(delta_fn(q, t, opt.winding_tol), c, scan.radius, wopt).winding;
        } catch (const ContourError&) {
          w = -1;
        }
      }
      if (w == 0 || w < 0) {
        scan.missing.push_back({n, j});
        continue;
      }
      if (w >= 2) {
        const auto cl = resolve_cluster(q, t, c, scan.radius, w, opt);
        ev.lambda = cl.resolved ? cl.mean : c;
        ev.multiplicity = w;
        ev.residual = std::abs(char_value(q, ev.lambda, t, opt.tol));
        ev.converged = cl.resolved;
        scan.found.push_back(ev);
        continue;
      }
      auto nr = newton_refine(q, t, c, scan.radius, opt);
      if (!nr.converged && certify) {
        // The root is certified inside the disc; locate it by subdividing the enclosing square.
        const double r = scan.radius;
        try {
          RectSolver solver(q, t, opt);
          const Rect box{c.real() - r, c.real() + r, c.imag() - r, c.imag() + r};
          solver.solve(box, solver.count(box));
          for (const auto& e : solver.take())
            if (e.multiplicity == 1 && e.converged && std::abs(e.lambda - c) <= r) {
              nr.lambda = e.lambda;
              nr.residual = e.residual;
              nr.converged = true;
            }
        } catch (const ContourError&) {
        }
      }
      if (!nr.converged || std::abs(nr.lambda - c) > scan.radius) {
        scan.missing.push_back({n, j});
        continue;
      }
      ev.lambda = nr.lambda;
      ev.residual = nr.residual;
      scan.found.push_back(ev);
    }
  }
  return scan;
}

void assign_lattice_indices(std::vector<BlochEigenvalue>& evs, double t, Complex b) {
  struct Candidate {
    double dist;
    std::size_t idx;
    int n, j;
  };
  std::vector<Candidate> cand;
  const Complex z = t + 1i * b;
  for (std::size_t i = 0; i < evs.size(); ++i) {
    for (int j = 1; j <= 2; ++j) {
      const double s = j == 1 ? -1.0 : 1.0;
      const int n0 = static_cast<int>(std::lround((evs[i].lambda.real() - s * z.real()) / 2.0));
      for (int n = n0 - 2; n <= n0 + 2; ++n)
        cand.push_back({std::abs(evs[i].lambda - lattice_reference(n, j, t, b)), i, n, j});
    }
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& c) {
    if (a.dist != c.dist) return a.dist < c.dist;
    if (a.n != c.n) return a.n < c.n;
    return a.j < c.j;
  });
  std::map<std::pair<int, int>, bool> taken;
  std::vector<int> slots(evs.size(), 0);
  for (const auto& c : cand) {
    auto& ev = evs[c.idx];
    if (slots[c.idx] >= ev.multiplicity || taken[{c.n, c.j}]) continue;
    taken[{c.n, c.j}] = true;
    if (slots[c.idx] == 0) {
      ev.n = c.n;
      ev.j = c.j;
    }
    ++slots[c.idx];
  }
}

ModeCoefficients eigenvector_coefficients(const Mat2& M, double t) {
  const Complex e = unit_phase(t);
  const double thr = 1e-8 * std::max(M.max_abs(), std::numeric_limits<double>::min());
  ModeCoefficients c;
  if (std::abs(M(0, 1)) > thr) {
    c.x1 = 1.0;
    c.x2 = (e - M(0, 0)) / M(0, 1);
  } else if (std::abs(M(1, 0)) > thr) {
    c.x1 = (e - M(1, 1)) / M(1, 0);
    c.x2 = 1.0;
    c.used_second_row = true;
  } else {
    throw DegenerateEigenvectorError(
        "both s1(pi) and c2(pi) vanish: eigenvalue is not simple or mislabelled");
  }
  return c;
}

namespace {

SampledMode sample_mode(const PotentialQ& q, double t, Complex lambda, std::span<const double> xgrid,
                        double tol) {
  const auto tr = solution_trace(q, lambda, xgrid, tol);
  SampledMode m;
  m.lambda = lambda;
  m.coeffs = eigenvector_coefficients(tr.monodromy.M, t);
  m.values.resize(xgrid.size());
  for (std::size_t i = 0; i < xgrid.size(); ++i)
    m.values[i] = m.coeffs.x1 * tr.c_values[i] + m.coeffs.x2 * tr.s_values[i];
  m.at_zero = {m.coeffs.x1, m.coeffs.x2};
  m.at_pi = tr.monodromy.M * m.at_zero;
  return m;
}

void require_simple(const BlochEigenvalue& ev) {
  if (ev.multiplicity != 1) throw DomainError("eigenfunction requires a simple eigenvalue");
}

}  // namespace

SampledMode eigenfunction(const PotentialQ& q, double t, const BlochEigenvalue& ev,
                          std::span<const double> xgrid, double tol, bool normalize,
                          const QuadratureGrid* norm_grid) {
  require_simple(ev);
  auto m = sample_mode(q, t, ev.lambda, xgrid, tol);
  if (normalize) {
    if (norm_grid == nullptr || norm_grid->nodes.size() != xgrid.size())
      throw DomainError("normalisation needs the quadrature grid matching xgrid");
    const double nrm = l2_norm(*norm_grid, m.values);
    const double s = 1.0 / nrm;
    for (auto& v : m.values) v = s * v;
    m.coeffs.x1 *= s;
    m.coeffs.x2 *= s;
    m.at_zero = s * m.at_zero;
    m.at_pi = s * m.at_pi;
  }
  return m;
}

SampledMode adjoint_eigenfunction(const PotentialQ& q, double t, const BlochEigenvalue& ev,
                                  std::span<const double> xgrid, double tol) {
  require_simple(ev);
  const PotentialQ qa = q.adjoint();
  SolverOptions opt;
  opt.tol = tol;
  const Complex target = std::conj(ev.lambda);
  const auto nr = newton_refine(qa, t, target, 0.5, opt);
  if (!nr.converged || std::abs(nr.lambda - target) > 1e-6)
    throw AdjointPairingError("adjoint eigenvalue not found within 1e-6 of conj(lambda)");
  return sample_mode(qa, t, nr.lambda, xgrid, tol);
}

std::vector<Vec2> evaluate_mode(const PotentialQ& q, Complex lambda, const ModeCoefficients& coeffs,
                                double t, std::span<const double> points, double tol) {
  std::vector<double> reduced(points.size());
  std::vector<long> cell(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double m = std::floor(points[i] / kPi);
    double r = points[i] - m * kPi;
    if (r >= kPi) {
      r -= kPi;
      m += 1.0;
    }
    if (r < 0.0) r = 0.0;
    reduced[i] = r;
    cell[i] = static_cast<long>(m);
  }
  std::vector<double> sorted = reduced;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const auto tr = solution_trace(q, lambda, sorted, tol);
  std::vector<Vec2> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto k = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), reduced[i]) - sorted.begin());
    const Vec2 v = coeffs.x1 * tr.c_values[k] + coeffs.x2 * tr.s_values[k];
    out[i] = std::polar(1.0, kPi * t * static_cast<double>(cell[i])) * v;
  }
  return out;
}

Complex l2_inner(const QuadratureGrid& grid, std::span<const Vec2> f, std::span<const Vec2> g) {
  Complex s{};
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * inner(f[i], g[i]);
  return s;
}

double l2_norm(const QuadratureGrid& grid, std::span<const Vec2> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * norm_sq(f[i]);
  return std::sqrt(s);
}

Eigenpair make_eigenpair(const PotentialQ& q, double t, const BlochEigenvalue& ev,
                         const QuadratureGrid& grid, double tol) {
  Eigenpair p;
  p.eigenvalue = ev;
  p.grid = grid;
  const auto phi = eigenfunction(q, t, ev, grid.nodes, tol);
  const auto star = adjoint_eigenfunction(q, t, ev, grid.nodes, tol);
  p.phi = phi.values;
  p.phi_coeffs = phi.coeffs;
  p.phi_star = star.values;
  p.phi_star_coeffs = star.coeffs;
  p.adjoint_lambda = star.lambda;
  p.alpha = pairing_alpha(p);
  p.degenerate = std::abs(p.alpha) < kAlphaFloor * l2_norm(grid, p.phi) * l2_norm(grid, p.phi_star);
  return p;
}

Complex pairing_alpha(const Eigenpair& pair) { return l2_inner(pair.grid, pair.phi, pair.phi_star); }

Complex cross_pairing(const Eigenpair& a, const Eigenpair& b) { return l2_inner(a.grid, a.phi, b.phi_star); }

Vec2 leading_eigenfunction(const PotentialQ& q, int n, int j, double t, double x) {
  const Complex b = mean_b(q);
  const double sj = j == 1 ? -1.0 : 1.0;
  const Complex d1 = j == 1 ? Complex(0.0, 1.0) : Complex(0.0, -1.0);
  const Complex e = std::exp(accumulate_a(q, x) + 1i * (sj * 2.0 * n + t + 1i * b) * x);
  return {e, d1 * e};
}

Vec2 leading_adjoint_eigenfunction(const PotentialQ& q, int n, int j, double t, double x) {
  const Complex b = mean_b(q);
  const double sj = j == 1 ? -1.0 : 1.0;
  const Complex d1 = j == 1 ? Complex(0.0, 1.0) : Complex(0.0, -1.0);
  const Complex e = std::exp(-std::conj(accumulate_a(q, x)) + 1i * (sj * 2.0 * n + t - 1i * std::conj(b)) * x);
  return {e, d1 * e};
}

Complex diagonal_phase(const PotentialQ& q, double x) { return 0.5 * (q.a1.integral(x) + q.a4.integral(x)); }

Vec2 corrected_leading_eigenfunction(const PotentialQ& q, int n, int j, double t, double x) {
  const double s = j == 1 ? 1.0 : -1.0;
  return std::exp(Complex(0, s) * diagonal_phase(q, x)) * leading_eigenfunction(q, n, j, t, x);
}

double loglog_slope(std::span<const double> x, std::span<const double> y, double floor) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max({y[i], floor, std::numeric_limits<double>::min()}));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

Theorem1Report verify_theorem1(const PotentialQ& q, std::span<const double> t_grid, int n_min,
                               int n_max, const SolverOptions& opt) {
  Theorem1Report rep;
  if (!check_condition_2(q).satisfied) {
    rep.declined = true;
    return rep;
  }
  const auto grid = period_grid(q.breakpoints());
  const Complex b = mean_b(q);
  int worst_bad = std::numeric_limits<int>::min();
  for (double t : t_grid) {
    const auto scan = eigenvalues_near_lattice(q, t, n_min, n_max, opt, true);
    for (const auto& m : scan.missing) {
      rep.missing.push_back(m);
      worst_bad = std::max(worst_bad, std::abs(m.first));
    }
    for (const auto& ev : scan.found)
      if (ev.multiplicity != 1) worst_bad = std::max(worst_bad, std::abs(ev.n));
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> val_series, fun_series, cor_series;
    for (const auto& ev : scan.found) {
      if (ev.multiplicity != 1 || ev.n == 0) continue;
      const double an = std::abs(ev.n);
      Theorem1Row row;
      row.t = t;
      row.n = ev.n;
      row.j = ev.j;
      row.lambda = ev.lambda;
      row.scaled_value_error = an * std::abs(ev.lambda - lattice_reference(ev.n, ev.j, t, b));
      const auto phi = eigenfunction(q, t, ev, grid.nodes, opt.tol);
      std::vector<Vec2> diff(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i)
        diff[i] = phi.values[i] - leading_eigenfunction(q, ev.n, ev.j, t, grid.nodes[i]);
      row.scaled_function_error = an * l2_norm(grid, diff);
      for (std::size_t i = 0; i < grid.size(); ++i)
        diff[i] = phi.values[i] - corrected_leading_eigenfunction(q, ev.n, ev.j, t, grid.nodes[i]);
      row.scaled_corrected_error = an * l2_norm(grid, diff);
      rep.max_scaled_corrected_error = std::max(rep.max_scaled_corrected_error, row.scaled_corrected_error);
      const auto star = adjoint_eigenfunction(q, t, ev, grid.nodes, opt.tol);
      row.alpha_ratio = l2_inner(grid, phi.values, star.values) / (2.0 * kPi);
      rep.max_alpha_deviation = std::max(rep.max_alpha_deviation, std::abs(row.alpha_ratio - 1.0));
      auto& cs = cor_series[ev.n > 0 ? ev.j : -ev.j];
      cs.first.push_back(an);
      cs.second.push_back(row.scaled_corrected_error);
      rep.rows.push_back(row);
      rep.max_scaled_value_error = std::max(rep.max_scaled_value_error, row.scaled_value_error);
      rep.max_scaled_function_error = std::max(rep.max_scaled_function_error, row.scaled_function_error);
      auto& vs = val_series[ev.n > 0 ? ev.j : -ev.j];
      vs.first.push_back(an);
      vs.second.push_back(row.scaled_value_error);
      auto& fs = fun_series[ev.n > 0 ? ev.j : -ev.j];
      fs.first.push_back(an);
      fs.second.push_back(row.scaled_function_error);
    }
    for (const auto& [j, s] : val_series)
      rep.max_value_slope = std::max(rep.max_value_slope, loglog_slope(s.first, s.second, kTheorem1ErrorFloor));
    for (const auto& [j, s] : fun_series)
      rep.max_function_slope = std::max(rep.max_function_slope, loglog_slope(s.first, s.second, kTheorem1ErrorFloor));
    for (const auto& [j, s] : cor_series)
      rep.max_corrected_slope = std::max(rep.max_corrected_slope, loglog_slope(s.first, s.second, kTheorem1ErrorFloor));
  }
  int smallest = std::numeric_limits<int>::max();
  for (int n = n_min; n <= n_max; ++n)
    if (n != 0) smallest = std::min(smallest, std::abs(n));
  rep.simple_threshold = worst_bad == std::numeric_limits<int>::min() ? smallest : worst_bad + 1;
  rep.pass = rep.missing.empty() && !rep.rows.empty() && rep.max_value_slope <= kTheorem1SlopeLimit &&
             rep.max_function_slope <= kTheorem1SlopeLimit;
  return rep;
}

std::vector<double> default_t_grid(int count) {
  std::vector<double> g;
  for (int i = 1; i <= count; ++i) g.push_back(-1.0 + 2.0 * i / count);
  return g;
}

void write_eigenvalue_csv(std::ostream& out, std::span<const BlochEigenvalue> evs) {
  out << "t,n,j,re,im,multiplicity,residual\n";
  char buf[256];
  for (const auto& e : evs) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%.17g,%.17g,%d,%.17g\n", e.t, e.n, e.j, e.lambda.real(),
                  e.lambda.imag(), e.multiplicity, e.residual);
    out << buf;
  }
}

std::vector<BlochEigenvalue> read_eigenvalue_csv(std::istream& in) {
  std::vector<BlochEigenvalue> evs;
  std::string line;
  if (!std::getline(in, line)) return evs;
  if (line.rfind("t,n,j", 0) != 0) throw ParseError("eigenvalue CSV header not recognised");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    BlochEigenvalue e;
    double re = 0, im = 0;
    if (std::sscanf(line.c_str(), "%lf,%d,%d,%lf,%lf,%d,%lf", &e.t, &e.n, &e.j, &re, &im, &e.multiplicity,
                    &e.residual) != 7)
      throw ParseError("malformed eigenvalue CSV row: " + line);
    e.lambda = {re, im};
    evs.push_back(e);
  }
  return evs;
}

}  // namespace dirac
