#include "dirac/plot.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace dirac {

namespace {

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double nice_step(double span) {
  const double raw = span / 8.0;
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * p >= raw) return m * p;
  return 10.0 * p;
}

}  // namespace

void write_spectrum_svg(std::ostream& out, std::span<const BlochEigenvalue> evs, const Rect& view, double re_b) {
  const double W = 800, H = 500, pad = 50;
  auto sx = [&](double re) { return pad + (re - view.re0) / view.width() * (W - 2 * pad); };
  auto sy = [&](double im) { return H - pad - (im - view.im0) / view.height() * (H - 2 * pad); };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = nice_step(view.width()), ys = nice_step(view.height());
  for (double v = std::ceil(view.re0 / xs) * xs; v <= view.re1 + 1e-12; v += xs) {
    const double x = sx(v);
    out << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << H - pad << "\" x2=\"" << fmt("%.2f", x) << "\" y2=\""
        << H - pad + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << H - pad + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt("%g", std::abs(v) < 1e-12 ? 0.0 : v) << "</text>\n";
  }
  for (double v = std::ceil(view.im0 / ys) * ys; v <= view.im1 + 1e-12; v += ys) {
    const double y = sy(v);
    out << "<line x1=\"" << pad - 5 << "\" y1=\"" << fmt("%.2f", y) << "\" x2=\"" << pad << "\" y2=\""
        << fmt("%.2f", y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << pad - 8 << "\" y=\"" << fmt("%.2f", y + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << fmt("%g", std::abs(v) < 1e-12 ? 0.0 : v) << "</text>\n";
  }
  for (double level : {re_b, -re_b}) {
    if (level < view.im0 || level > view.im1) continue;
    out << "<line x1=\"" << pad << "\" y1=\"" << fmt("%.2f", sy(level)) << "\" x2=\"" << W - pad << "\" y2=\""
        << fmt("%.2f", sy(level)) << "\" stroke=\"#c44\" stroke-dasharray=\"6,4\"/>\n";
  }
  for (const auto& e : evs) {
    if (!view.contains(e.lambda, 1e-9)) continue;
    out << "<circle cx=\"" << fmt("%.3f", sx(e.lambda.real())) << "\" cy=\"" << fmt("%.3f", sy(e.lambda.imag()))
        << "\" r=\"" << (e.multiplicity > 1 ? 4 : 2.5) << "\" fill=\"" << (e.j == 1 ? "#2a6fdb" : "#1d9a55")
        << "\"/>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" font-size=\"13\" text-anchor=\"middle\">Re lambda</text>\n";
  out << "<text x=\"14\" y=\"" << H / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << H / 2 << ")\">Im lambda</text>\n";
  out << "</svg>\n";
}

}  // namespace dirac
