#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dirac/core.hpp"

namespace dirac {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule. Results are cached per n.
const GaussLegendreRule& gauss_legendre(int n);

// Nodes and weights of a composite rule on some interval.
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// Composite Gauss-Legendre over [lo, hi]. `breaks` (any order, points outside
// the interval ignored) become panel boundaries; each piece is then split into
// panels of width at most `max_panel` carrying `points_per_panel` nodes.
QuadratureGrid composite_grid(double lo, double hi, std::span<const double> breaks,
                              int points_per_panel, double max_panel);

// Grid on [0, pi] with roughly `total_points` nodes, aligned to `breaks`.
QuadratureGrid period_grid(std::span<const double> breaks, int total_points = 512);

// Composite Gauss-Legendre on the pieces delimited by `breaks`, starting at
// `start_points` per piece and doubling until successive results agree to
// `rel_tol`. Returns the last estimate.
double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          std::span<const double> breaks, int start_points = 64,
                          double rel_tol = 1e-12, int max_points = 1 << 13);

}  // namespace dirac
