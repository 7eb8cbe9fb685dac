#include "dirac/monodromy.hpp"

#include <algorithm>
#include <functional>
#include <cstdio>

namespace dirac {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// Potential entries split into the smooth Fourier part (evaluated pointwise)
// and the piecewise-constant part (fixed on each integration segment).
class Coefficients {
 public:
  Coefficients(const PotentialQ& q, Complex lambda) : lambda_(lambda) {
    const PeriodicFunction* f[4] = {&q.a1, &q.a2, &q.a3, &q.a4};
    for (int k = 0; k < 4; ++k) {
      for (const auto& t : f[k]->fourier()) {
        if (t.harmonic == 0)
          const_[k] += t.coefficient;
        else
          terms_[k].push_back(t);
      }
      fn_[k] = f[k];
    }
  }

  void enter_segment(double x0, double x1) {
    const double mid = 0.5 * (x0 + x1);
    for (int k = 0; k < 4; ++k) seg_[k] = const_[k] + fn_[k]->piecewise_value(mid);
  }

  // Returns A(x) = -lambda J + J Q(x) = [[a3, a4 - lambda], [lambda - a1, -a2]].
  Mat2 matrix(double x) const {
    Complex a[4];
    for (int k = 0; k < 4; ++k) {
      a[k] = seg_[k];
      for (const auto& t : terms_[k]) a[k] += t.coefficient * std::polar(1.0, 2.0 * t.harmonic * x);
    }
    return {{a[2], a[3] - lambda_, lambda_ - a[0], -a[1]}};
  }

 private:
  Complex lambda_;
  const PeriodicFunction* fn_[4]{};
  Complex const_[4]{};
  Complex seg_[4]{};
  std::vector<FourierTerm> terms_[4];
};

template <int N>
using State = std::array<Complex, N>;

// N = 4: fundamental matrix only. N = 8: matrix followed by its lambda-derivative.
template <int N>
State<N> rhs(const Mat2& A, const State<N>& y) {
  State<N> d;
  d[0] = A.m[0] * y[0] + A.m[1] * y[2];
  d[1] = A.m[0] * y[1] + A.m[1] * y[3];
  d[2] = A.m[2] * y[0] + A.m[3] * y[2];
  d[3] = A.m[2] * y[1] + A.m[3] * y[3];
  if constexpr (N == 8) {
    // d/dx (dY) = A dY + (dA/dlambda) Y with dA/dlambda = -J = [[0, -1], [1, 0]].
    d[4] = A.m[0] * y[4] + A.m[1] * y[6] - y[2];
    d[5] = A.m[0] * y[5] + A.m[1] * y[7] - y[3];
    d[6] = A.m[2] * y[4] + A.m[3] * y[6] + y[0];
    d[7] = A.m[2] * y[5] + A.m[3] * y[7] + y[1];
  }
  return d;
}

template <int N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> ks) {
  State<N> r = y;
  for (const auto& [coef, k] : ks) {
    if (coef == 0.0) continue;
    const double s = h * coef;
    for (int i = 0; i < N; ++i) r[i] += s * (*k)[i];
  }
  return r;
}

struct RunResult {
  long steps = 0;
  double err_sum = 0.0;
};

template <int N>
RunResult run(const PotentialQ& q, Complex lambda, double tol, std::span<const double> stops,
              State<N>& y, const std::function<void(std::size_t, const State<N>&)>& on_stop) {
  if (!(tol > 0.0)) throw DomainError("integration tolerance must be positive");
  Coefficients coef(q, lambda);
  const double hmax = 0.1 / (1.0 + std::abs(lambda));
  double h = hmax;
  RunResult out;
  double x = 0.0;

  auto scale_of = [](const State<N>& a, const State<N>& b, int lo, int hi) {
    double m = 0.0;
    for (int i = lo; i < hi; ++i) m = std::max({m, std::abs(a[i]), std::abs(b[i])});
    return 1.0 + m;
  };

  for (std::size_t s = 0; s < stops.size(); ++s) {
    const double xend = stops[s];
    if (xend > x) {
      coef.enter_segment(x, xend);
      Mat2 A0 = coef.matrix(x);
      State<N> k1 = rhs<N>(A0, y);
      while (x < xend) {
        const double remaining = xend - x;
        const bool last = h >= remaining * (1.0 - 1e-12);
        const double hs = last ? remaining : h;
        const State<N> k2 = rhs<N>(coef.matrix(x + c2 * hs), axpy<N>(y, hs, {{a21, &k1}}));
        const State<N> k3 = rhs<N>(coef.matrix(x + c3 * hs), axpy<N>(y, hs, {{a31, &k1}, {a32, &k2}}));
        const State<N> k4 =
            rhs<N>(coef.matrix(x + c4 * hs), axpy<N>(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State<N> k5 = rhs<N>(coef.matrix(x + c5 * hs),
                                   axpy<N>(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State<N> k6 = rhs<N>(
            coef.matrix(x + hs), axpy<N>(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const State<N> ynew =
            axpy<N>(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const Mat2 Anew = coef.matrix(last ? xend : x + hs);
        const State<N> k7 = rhs<N>(Anew, ynew);

        double err = 0.0;
        double err_abs = 0.0;
        const double sc0 = tol * scale_of(y, ynew, 0, 4);
        const double sc1 = N == 8 ? tol * scale_of(y, ynew, 4, N) : 1.0;
        for (int i = 0; i < N; ++i) {
          const Complex e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                  e7 * k7[i]);
          err = std::max(err, std::abs(e) / (i < 4 ? sc0 : sc1));
          if (i < 4) err_abs = std::max(err_abs, std::abs(e));
        }

        const double fac = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
        if (err <= 1.0) {
          x = last ? xend : x + hs;
          y = ynew;
          k1 = k7;
          out.err_sum += err_abs;
          ++out.steps;
          if (!last || fac < 1.0) h = std::min(hmax, hs * fac);
        } else {
          h = hs * fac;
          if (h < 1e-14 * kPi)
            throw IntegrationError("step size underflow while integrating the fundamental system");
        }
      }
    }
    on_stop(s, y);
  }
  return out;
}

std::vector<double> stop_points(const PotentialQ& q, std::span<const double> outputs) {
  std::vector<double> stops = q.breakpoints();
  stops.insert(stops.end(), outputs.begin(), outputs.end());
  stops.push_back(kPi);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  return stops;
}

template <int N>
State<N> initial_state() {
  State<N> y{};
  y[0] = 1.0;
  y[3] = 1.0;
  return y;
}

Mat2 as_mat(const Complex* p) { return {{p[0], p[1], p[2], p[3]}}; }

void finish(MonodromyResult& r, const PotentialQ& q, const RunResult& run_result) {
  r.steps = run_result.steps;
  r.liouville_defect = std::abs(r.M.det() - std::exp(2.0 * kPi * mean_b(q)));
  r.est_error = run_result.err_sum + r.liouville_defect;
}

}  // namespace

MonodromyResult integrate_fundamental(const PotentialQ& q, Complex lambda, double tol,
                                      bool with_derivative) {
  MonodromyResult r;
  r.lambda = lambda;
  const auto stops = stop_points(q, {});
  if (with_derivative) {
    auto y = initial_state<8>();
    const auto rr = run<8>(q, lambda, tol, stops, y, [](std::size_t, const State<8>&) {});
    r.M = as_mat(y.data());
    r.dM_dlambda = as_mat(y.data() + 4);
    finish(r, q, rr);
  } else {
    auto y = initial_state<4>();
    const auto rr = run<4>(q, lambda, tol, stops, y, [](std::size_t, const State<4>&) {});
    r.M = as_mat(y.data());
    finish(r, q, rr);
  }
  return r;
}

Complex discriminant(const MonodromyResult& m) { return m.M.trace(); }
Complex wronskian(const MonodromyResult& m) { return m.M.det(); }

SolutionTrace solution_trace(const PotentialQ& q, Complex lambda, std::span<const double> xgrid,
                             double tol) {
  for (std::size_t i = 0; i < xgrid.size(); ++i) {
    if (!(xgrid[i] >= 0.0 && xgrid[i] <= kPi)) throw DomainError("solution_trace: grid point outside [0, pi]");
    if (i > 0 && xgrid[i] < xgrid[i - 1]) throw DomainError("solution_trace: grid must be sorted");
  }
  SolutionTrace tr;
  tr.xgrid.assign(xgrid.begin(), xgrid.end());
  tr.c_values.resize(xgrid.size());
  tr.s_values.resize(xgrid.size());

  const auto stops = stop_points(q, xgrid);
  // Map each stop to the output indices sharing its abscissa.
  std::size_t next = 0;
  auto y = initial_state<4>();
  const auto rr = run<4>(q, lambda, tol, stops, y, [&](std::size_t s, const State<4>& st) {
    while (next < xgrid.size() && xgrid[next] <= stops[s]) {
      tr.c_values[next] = {st[0], st[2]};
      tr.s_values[next] = {st[1], st[3]};
      ++next;
    }
  });
  // Points at x = 0 are never passed as stops beyond the first; fill them.
  for (std::size_t i = 0; i < xgrid.size() && xgrid[i] == 0.0; ++i) {
    tr.c_values[i] = {1.0, 0.0};
    tr.s_values[i] = {0.0, 1.0};
  }
  tr.monodromy.lambda = lambda;
  tr.monodromy.M = as_mat(y.data());
  finish(tr.monodromy, q, rr);
  return tr;
}

void write_trace_csv(std::ostream& out, const SolutionTrace& trace) {
  out << "x,re_c1,im_c1,re_c2,im_c2,re_s1,im_s1,re_s2,im_s2\n";
  char buf[64];
  auto put = [&](double v, bool last) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << (last ? '\n' : ',');
  };
  for (std::size_t i = 0; i < trace.xgrid.size(); ++i) {
    put(trace.xgrid[i], false);
    const auto& c = trace.c_values[i];
    const auto& s = trace.s_values[i];
    put(c.v0.real(), false);
    put(c.v0.imag(), false);
    put(c.v1.real(), false);
    put(c.v1.imag(), false);
    put(s.v0.real(), false);
    put(s.v0.imag(), false);
    put(s.v1.real(), false);
    put(s.v1.imag(), true);
  }
}

}  // namespace dirac
