#include "dirac/contour.hpp"

#include <limits>
#include <Eigen/Dense>

namespace dirac {

namespace {

struct Tracker {
  const AnalyticFn& f;
  const std::function<Complex(double)>& path;
  const WindingOptions& opt;
  WindingResult res;

  Complex eval(double s) {
    const Complex v = f(path(s));
    ++res.evaluations;
    const double a = std::abs(v);
    res.min_abs = std::min(res.min_abs, a);
    if (!(a > opt.zero_floor) || !std::isfinite(a))
      throw ContourError("contour passes through a zero of the function; jitter the contour");
    return v;
  }

  double phase(double s0, Complex f0, double s1, Complex f1, int depth) {
    const double d = std::arg(f1 / f0);
    if (std::abs(d) <= opt.max_phase_step) return d;
    if (depth >= opt.max_depth)
      throw ContourError("argument of the function not resolved on the contour; jitter the contour");
    const double sm = 0.5 * (s0 + s1);
    const Complex fm = eval(sm);
    return phase(s0, f0, sm, fm, depth + 1) + phase(sm, fm, s1, f1, depth + 1);
  }
};

}  // namespace

WindingResult winding_number(const AnalyticFn& f, const std::function<Complex(double)>& path,
                             const WindingOptions& opt) {
  Tracker tr{f, path, opt, {}};
  tr.res.min_abs = std::numeric_limits<double>::infinity();
  const int n = std::max(3, opt.initial_samples);
  const Complex first = tr.eval(0.0);
  Complex prev = first;
  double total = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    const Complex cur = i == n ? first : tr.eval(s);
    total += tr.phase(static_cast<double>(i - 1) / n, prev, s, cur, 0);
    prev = cur;
  }
  tr.res.winding = static_cast<int>(std::lround(total / (2.0 * kPi)));
  return tr.res;
}

WindingResult winding_on_circle(const AnalyticFn& f, Complex center, double radius,
                                const WindingOptions& opt) {
  auto path = [=](double s) { return center + std::polar(radius, 2.0 * kPi * s); };
  return winding_number(f, path, opt);
}

WindingResult winding_on_rect(const AnalyticFn& f, const Rect& r, WindingOptions opt,
                              double max_segment) {
  const double w = r.width(), h = r.height();
  const double per = 2.0 * (w + h);
  // Corner parameters so that every corner is hit exactly.
  const double s1 = w / per, s2 = (w + h) / per, s3 = (2 * w + h) / per;
  auto path = [=](double s) -> Complex {
    if (s <= s1) return {r.re0 + w * (s / s1), r.im0};
    if (s <= s2) return {r.re1, r.im0 + h * ((s - s1) / (s2 - s1))};
    if (s <= s3) return {r.re1 - w * ((s - s2) / (s3 - s2)), r.im1};
    return {r.re0, r.im1 - h * ((s - s3) / (1.0 - s3))};
  };
  opt.initial_samples = std::max(opt.initial_samples, static_cast<int>(std::ceil(per / max_segment)));
  return winding_number(f, path, opt);
}

std::vector<Complex> circle_power_sums(const AnalyticFn& log_derivative, Complex center,
                                       double radius, int kmax, int nodes) {
  std::vector<Complex> p(kmax + 1);
  for (int m = 0; m < nodes; ++m) {
    const Complex u = std::polar(1.0, 2.0 * kPi * m / nodes);
    const Complex z = center + radius * u;
    const Complex g = log_derivative(z) * radius * u;  // dz / (i dtheta)
    Complex zk = 1.0;
    for (int k = 0; k <= kmax; ++k) {
      p[k] += zk * g;
      zk *= radius * u;
    }
  }
  for (auto& v : p) v /= static_cast<double>(nodes);
  return p;
}

std::vector<Complex> roots_from_power_sums(const std::vector<Complex>& p, int n) {
  if (n <= 0) return {};
  // Elementary symmetric functions e_k via Newton's identities.
  std::vector<Complex> e(n + 1);
  e[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    Complex s{};
    for (int i = 1; i <= k; ++i) s += (i % 2 == 1 ? 1.0 : -1.0) * e[k - i] * p[i];
    e[k] = s / static_cast<double>(k);
  }
  if (n == 1) return {e[1]};
  // Monic polynomial z^n - e1 z^{n-1} + e2 z^{n-2} - ...
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k <= n; ++k) C(0, k - 1) = (k % 2 == 1 ? 1.0 : -1.0) * e[k];
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C);
  std::vector<Complex> roots;
  for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

}  // namespace dirac
