#include <quadmath.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "dirac/monodromy.hpp"

namespace dirac {

namespace {

using R = __float128;

struct C {
  R re = 0, im = 0;
};

C operator+(C a, C b) { return {a.re + b.re, a.im + b.im}; }
C operator-(C a, C b) { return {a.re - b.re, a.im - b.im}; }
C operator*(C a, C b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
C operator*(R s, C a) { return {s * a.re, s * a.im}; }
R abs1(C a) { return fabsq(a.re) + fabsq(a.im); }
C to_c(Complex z) { return {z.real(), z.imag()}; }
Complex to_d(C z) { return {static_cast<double>(z.re), static_cast<double>(z.im)}; }

using M2 = std::array<C, 4>;

M2 mul(const M2& a, const M2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

R norm1(const M2& a) {
  R s = 0;
  for (const auto& z : a) s += abs1(z);
  return s;
}

// Entry of A(x) = sign * f(x) + shift.
struct Entry {
  R sign = 1;
  const PeriodicFunction* f = nullptr;
  C shift;
};

}  // namespace

ExtendedMonodromy integrate_fundamental_extended(const PotentialQ& q, Complex lambda) {
  const C lam = to_c(lambda);
  const std::array<Entry, 4> entries{Entry{1, &q.a3, {}}, Entry{1, &q.a4, C{} - lam},
                                     Entry{-1, &q.a1, lam}, Entry{-1, &q.a2, {}}};

  R scale = fabsq(lam.re) + fabsq(lam.im);
  for (const auto& e : entries) {
    for (const auto& t : e.f->fourier()) scale += std::abs(t.coefficient) + 2.0 * std::abs(t.harmonic);
    for (const auto& p : e.f->pieces()) scale += std::abs(p.value);
  }
  const R h_max = 0.5Q / std::max<R>(scale, 1);

  std::vector<R> edges{0};
  for (double b : q.breakpoints()) edges.push_back(b);
  edges.push_back(M_PIq);

  constexpr int kMaxOrder = 120;
  const R eps = 1e-36Q;
  ExtendedMonodromy out;
  out.lambda = lambda;
  M2 Y{C{1, 0}, C{}, C{}, C{1, 0}};
  std::vector<M2> Z, B;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const R xa = edges[p], xb = edges[p + 1];
    if (!(xb > xa)) continue;
    const double mid = static_cast<double>(0.5Q * (xa + xb));
    std::array<C, 4> konst;
    for (int i = 0; i < 4; ++i)
      konst[i] = entries[i].sign * to_c(entries[i].f->piecewise_value(mid)) + entries[i].shift;
    const long n = std::max<long>(1, static_cast<long>(ceilq((xb - xa) / h_max)));
    const R h = (xb - xa) / n;
    for (long s = 0; s < n; ++s) {
      const R x0 = xa + s * h;
      // term[e][m] = sign * c e^{i 2 m x0} (i 2 m h)^k / k! * h, advanced in k.
      std::array<std::vector<std::pair<C, C>>, 4> terms;
      for (int i = 0; i < 4; ++i)
        for (const auto& t : entries[i].f->fourier()) {
          const R arg = 2 * t.harmonic * x0;
          const C v = (entries[i].sign * h) * (to_c(t.coefficient) * C{cosq(arg), sinq(arg)});
          terms[i].push_back({v, C{0, 2 * t.harmonic * h}});
        }
      Z.assign(1, Y);
      B.clear();
      const R ynorm = norm1(Y);
      int k = 0;
      for (;; ++k) {
        if (k >= kMaxOrder) throw IntegrationError("Taylor series did not converge");
        M2 b{};
        for (int i = 0; i < 4; ++i) {
          if (k == 0) b[i] = h * konst[i];
          for (auto& [v, w] : terms[i]) {
            b[i] = b[i] + v;
            v = (1.0Q / (k + 1)) * (v * w);
          }
        }
        B.push_back(b);
        M2 next{};
        for (int i = 0; i <= k; ++i) {
          const M2 prod = mul(B[i], Z[k - i]);
          for (int e = 0; e < 4; ++e) next[e] = next[e] + prod[e];
        }
        const R inv = 1.0Q / (k + 1);
        for (auto& z : next) z = inv * z;
        Z.push_back(next);
        if (k >= 4 && norm1(Z[k + 1]) + norm1(Z[k]) <= eps * ynorm) break;
      }
      M2 y{};
      for (auto it = Z.rbegin(); it != Z.rend(); ++it)
        for (int e = 0; e < 4; ++e) y[e] = y[e] + (*it)[e];
      Y = y;
      out.max_order = std::max(out.max_order, k + 1);
      ++out.steps;
    }
  }
  for (int e = 0; e < 4; ++e) out.M.m[e] = to_d(Y[e]);
  out.wronskian = to_d(Y[0] * Y[3] - Y[1] * Y[2]);
  return out;
}

}  // namespace dirac
