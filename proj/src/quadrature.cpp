#include "dirac/quadrature.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace dirac {

namespace {

GaussLegendreRule build_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

std::vector<double> piece_bounds(double lo, double hi, std::span<const double> breaks) {
  std::vector<double> b{lo, hi};
  for (double x : breaks)
    if (x > lo && x < hi) b.push_back(x);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be positive");
  static std::mutex mu;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

QuadratureGrid composite_grid(double lo, double hi, std::span<const double> breaks,
                              int points_per_panel, double max_panel) {
  const auto& rule = gauss_legendre(points_per_panel);
  QuadratureGrid g;
  const auto b = piece_bounds(lo, hi, breaks);
  for (std::size_t p = 0; p + 1 < b.size(); ++p) {
    const double len = b[p + 1] - b[p];
    const int panels = std::max(1, static_cast<int>(std::ceil(len / max_panel - 1e-12)));
    const double h = len / panels;
    for (int q = 0; q < panels; ++q) {
      const double a = b[p] + q * h;
      for (int i = 0; i < points_per_panel; ++i) {
        g.nodes.push_back(a + 0.5 * h * (rule.nodes[i] + 1.0));
        g.weights.push_back(0.5 * h * rule.weights[i]);
      }
    }
  }
  return g;
}

QuadratureGrid period_grid(std::span<const double> breaks, int total_points) {
  constexpr int kPerPanel = 32;
  const int panels = std::max(1, total_points / kPerPanel);
  return composite_grid(0.0, kPi, breaks, kPerPanel, kPi / panels);
}

double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          std::span<const double> breaks, int start_points, double rel_tol,
                          int max_points) {
  const auto b = piece_bounds(lo, hi, breaks);
  auto estimate = [&](int n) {
    const auto& rule = gauss_legendre(n);
    double sum = 0.0;
    for (std::size_t p = 0; p + 1 < b.size(); ++p) {
      const double half = 0.5 * (b[p + 1] - b[p]);
      const double mid = 0.5 * (b[p + 1] + b[p]);
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
      sum += half * s;
    }
    return sum;
  };
  int n = start_points;
  double prev = estimate(n);
  while (n < max_points) {
    n *= 2;
    const double cur = estimate(n);
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur) || cur == prev) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace dirac
