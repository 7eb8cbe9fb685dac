#pragma once

#include <functional>
#include <vector>

#include "dirac/core.hpp"

namespace dirac {

struct Rect {
  double re0 = 0.0, re1 = 0.0, im0 = 0.0, im1 = 0.0;

  Complex center() const { return {0.5 * (re0 + re1), 0.5 * (im0 + im1)}; }
  double width() const { return re1 - re0; }
  double height() const { return im1 - im0; }
  double diameter() const { return std::hypot(width(), height()); }
  bool contains(Complex z, double margin = 0.0) const {
    return z.real() >= re0 - margin && z.real() <= re1 + margin && z.imag() >= im0 - margin &&
           z.imag() <= im1 + margin;
  }
};

struct WindingOptions {
  int initial_samples = 32;
  double max_phase_step = kPi / 4;  // bisect segments whose phase jump exceeds this
  int max_depth = 16;
  double zero_floor = 0.0;          // |f| at or below this counts as a zero on the contour
};

struct WindingResult {
  int winding = 0;
  double min_abs = 0.0;
  long evaluations = 0;
};

using AnalyticFn = std::function<Complex(Complex)>;

// Number of zeros of f enclosed by the closed curve path(s), s in [0, 1],
// counted via the accumulated argument of f. Throws ContourError when f
// vanishes on the curve or the phase cannot be resolved.
WindingResult winding_number(const AnalyticFn& f, const std::function<Complex(double)>& path,
                             const WindingOptions& opt);

WindingResult winding_on_circle(const AnalyticFn& f, Complex center, double radius,
                                const WindingOptions& opt);
// Rectangle traversed counter-clockwise; samples are spread by arc length and
// the sample count is raised so segments are no longer than `max_segment`.
WindingResult winding_on_rect(const AnalyticFn& f, const Rect& r, WindingOptions opt,
                              double max_segment = 0.125);

// Power sums p_k = sum over enclosed zeros of (z - center)^k, k = 0..kmax,
// from the trapezoid rule for (1/2 pi i) * contour integral of
// (z - center)^k f'(z)/f(z) on the circle. `log_derivative` returns f'/f.
std::vector<Complex> circle_power_sums(const AnalyticFn& log_derivative, Complex center,
                                       double radius, int kmax, int nodes);

// Zeros of the monic polynomial whose power sums are p_1..p_n (Newton
// identities, then companion-matrix eigenvalues).
std::vector<Complex> roots_from_power_sums(const std::vector<Complex>& p, int n);

}  // namespace dirac
