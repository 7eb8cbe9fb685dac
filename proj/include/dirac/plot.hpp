#pragma once

#include <ostream>
#include <span>

#include "dirac/bloch.hpp"
#include "dirac/contour.hpp"

namespace dirac {

// Static scatter of eigenvalues over the rectangle, with the reference lines
// Im lambda = +-Re b and axis ticks.
void write_spectrum_svg(std::ostream& out, std::span<const BlochEigenvalue> evs, const Rect& view, double re_b);

}  // namespace dirac
