#include <catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <sstream>

#include "dirac/expansion.hpp"

using namespace dirac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

BlochEigenvalue slot(const PotentialQ& q, double t, int n, int j) {
  for (const auto& e : eigenvalues_near_lattice(q, t, n, n).found)
    if (e.n == n && e.j == j) return e;
  FAIL("eigenvalue slot not found");
  return {};
}

PotentialQ wavy() {
  PotentialQ q = build_Qb({1.1, 0.2});
  q.a1 = PeriodicFunction({{1, {0.2, 0.1}}}, {});
  q.a2 = q.a2 + PeriodicFunction({{-1, 0.15}}, {{0.3, 1.2, 0.1}});
  return q;
}

TargetFunction sum_target(const TargetFunction& f, Complex c, const TargetFunction& g) {
  TargetFunction h;
  h.lo = std::min(f.lo, g.lo);
  h.hi = std::max(f.hi, g.hi);
  h.breaks = f.breaks;
  h.breaks.insert(h.breaks.end(), g.breaks.begin(), g.breaks.end());
  h.breaks.push_back(f.lo);
  h.breaks.push_back(f.hi);
  h.breaks.push_back(g.lo);
  h.breaks.push_back(g.hi);
  h.sample = [f, c, g](std::span<const double> x) {
    auto a = f(x);
    const auto b = g(x);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
    return a;
  };
  return h;
}

}  // namespace

TEST_CASE("bloch_extend reproduces the period samples and the Floquet factor", "[expansion]") {
  const PotentialQ q = wavy();
  for (double t : {0.35, 1.0}) {
    const auto ev = slot(q, t, 1, 2);
    const auto np = normalized_eigenpair(q, t, ev);
    const auto& g = np.pair.grid;
    const std::vector<double> xs(g.nodes.begin(), g.nodes.begin() + 20);
    const auto same = bloch_extend(q, np.pair, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::sqrt(norm_sq(same[i] - np.pair.phi[i])) < 1e-10);
    std::vector<double> moved;
    for (double x : xs) moved.push_back(x - 2.0 * kPi);
    const auto back = bloch_extend(q, np.pair, moved);
    const Complex f = std::exp(Complex(0, -2.0 * kPi * t));
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::sqrt(norm_sq(back[i] - f * same[i])) < 1e-10);
    if (t == 1.0) {
      const auto flip = bloch_extend(q, np.pair, xs[3] + kPi);
      CHECK(std::sqrt(norm_sq(flip + same[3])) < 1e-10);
    }
    const auto adj = bloch_extend(q, np.pair, xs, true);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::sqrt(norm_sq(adj[i] - np.pair.phi_star[i])) < 1e-10);
  }
}

TEST_CASE("normalised pair has unit pairing", "[expansion]") {
  const PotentialQ q = wavy();
  const auto np = normalized_eigenpair(q, -0.2, slot(q, -0.2, -2, 1));
  const auto& g = np.pair.grid;
  std::vector<Vec2> psi(g.size()), x(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    psi[i] = np.psi_scale * np.pair.phi[i];
    x[i] = np.x_scale * np.pair.phi_star[i];
  }
  CHECK(std::abs(l2_inner(g, psi, x) - 1.0) < 1e-12);
  CHECK_THAT(l2_norm(g, psi), WithinAbs(1.0, 1e-12));
}

TEST_CASE("Q_b modes are normalised plane waves", "[expansion]") {
  const PotentialQ q = build_Qb(1.2);
  const auto np = normalized_eigenpair(q, 0.4, slot(q, 0.4, 2, 2));
  for (double x : {-7.0, 0.1, 2.5, 11.0}) {
    const Vec2 psi = np.psi_scale * bloch_extend(q, np.pair, x);
    CHECK_THAT(std::abs(psi.v0), WithinAbs(1.0 / std::sqrt(2 * kPi), 1e-10));
    CHECK(std::abs(psi.v1 + Complex(0, 1) * psi.v0) < 1e-10);
  }
}

TEST_CASE("a mode on one period has coefficient one at its own index", "[expansion]") {
  const PotentialQ q = wavy();
  const double t = 0.45;
  const auto f = mode_target(q, 1, 2, t, 0.0, kPi);
  CHECK(std::abs(coefficient(q, f, normalized_eigenpair(q, t, slot(q, t, 1, 2))) - 1.0) < 1e-9);
  CHECK(std::abs(coefficient(q, f, normalized_eigenpair(q, t, slot(q, t, 2, 2)))) < 1e-9);
  CHECK(std::abs(coefficient(q, f, normalized_eigenpair(q, t, slot(q, t, 1, 1)))) < 1e-9);
}

TEST_CASE("Gaussian coefficients match the Fourier transform for Q_b", "[expansion]") {
  const PotentialQ q = build_Qb(1.2);
  const auto f = gaussian_target(0.0, 1.0, {1.0, 0.0}, -12.0, 12.0);
  for (double t : {-0.8, 0.3}) {
    for (int k : {-1, 0, 2}) {
      const auto np = normalized_eigenpair(q, t, slot(q, t, k, 2));
      const Complex a = coefficient(q, f, np);
      const double xi = 2.0 * k + t;
      const double expect = std::sqrt(kPi) * std::exp(-xi * xi / 4) / std::sqrt(2 * kPi);
      CHECK_THAT(std::abs(a), WithinAbs(expect, 1e-10));
      // a * Psi does not depend on the arbitrary phase of the eigenfunction.
      const Vec2 term = a * (np.psi_scale * bloch_extend(q, np.pair, 0.7));
      const Complex wave = std::exp(Complex(0, xi * 0.7)) / std::sqrt(2 * kPi);
      CHECK(std::abs(term.v0 - expect * wave) < 1e-10);
    }
  }
}

TEST_CASE("coefficients are linear in the target", "[expansion][property]") {
  const PotentialQ q = wavy();
  const auto f = gaussian_target(0.5, 0.8, {1.0, {0.0, 0.5}}, -5.0, 6.0);
  const auto g = polynomial_target({1.0, {0.0, -0.3}, 0.1}, {0.2, 1.0}, -1.0, 2.0);
  const Complex c{0.7, -1.3};
  const auto h = sum_target(f, c, g);
  for (auto [k, j] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{-2, 2}}) {
    const auto np = normalized_eigenpair(q, 0.6, slot(q, 0.6, k, j));
    const Complex lhs = coefficient(q, h, np);
    const Complex rhs = coefficient(q, f, np) + c * coefficient(q, g, np);
    CHECK(std::abs(lhs - rhs) < 1e-10 * (1 + std::abs(rhs)));
  }
}

TEST_CASE("zero target reconstructs to zero", "[expansion]") {
  const auto r = reconstruct(build_Qb(1.2), zero_target(-kPi, kPi), 2, 8, -kPi, kPi);
  CHECK(r.target_norm == 0.0);
  CHECK(r.l2_error == 0.0);
  for (const auto& v : r.reconstruction) CHECK(norm_sq(v) == 0.0);
}

TEST_CASE("reconstruction rejects bad input", "[expansion]") {
  const auto f = zero_target(0, 1);
  CHECK_THROWS_AS(reconstruct(PotentialQ{}, f, 2, 8, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(reconstruct(build_Qb(1.2), f, 2, 4, 0.0, 1.0), DomainError);
}

TEST_CASE("Q_b reconstruction equals the band-limited Fourier integral", "[expansion]") {
  const PotentialQ q = build_Qb(1.2);
  const auto f = gaussian_target(0.0, 1.0, {1.0, 0.0}, -12.0, 12.0);
  const int K = 2;
  const double W = 2.0 * K + 1.0;
  const auto r = reconstruct(q, f, K, 24, -kPi, kPi);
  REQUIRE(r.complete);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.window.size(); i += 7) {
    const double x = r.window.nodes[i];
    const std::vector<double> none;
    const double band =
        integrate_adaptive([x](double xi) { return std::sqrt(kPi) * std::exp(-xi * xi / 4) * std::cos(xi * x); }, -W, W,
                           none) /
        (2 * kPi);
    worst = std::max(worst, std::abs(r.reconstruction[i].v0 - band));
    worst = std::max(worst, std::abs(r.reconstruction[i].v1));
  }
  CHECK(worst < 1e-6);
  CHECK(r.l2_error > 1e-4);
}

TEST_CASE("sampled targets interpolate linearly and round trip through CSV", "[expansion]") {
  std::vector<double> x{0.0, 1.0, 2.5};
  std::vector<Vec2> v{{1.0, 0.0}, {3.0, {0.0, 2.0}}, {0.0, 1.0}};
  const auto f = sampled_target(x, v);
  const std::vector<double> probe{0.5, 1.75, -1.0, 3.0};
  const auto got = f(probe);
  CHECK(std::abs(got[0].v0 - 2.0) < 1e-15);
  CHECK(std::abs(got[0].v1 - Complex(0, 1)) < 1e-15);
  CHECK(std::abs(got[1].v0 - 1.5) < 1e-15);
  CHECK(norm_sq(got[2]) == 0.0);
  CHECK(norm_sq(got[3]) == 0.0);

  std::stringstream ss;
  write_function_csv(ss, x, v);
  const auto back = read_target_csv(ss);
  CHECK(back.lo == 0.0);
  CHECK(back.hi == 2.5);
  const auto again = back(probe);
  for (std::size_t i = 0; i < probe.size(); ++i) CHECK(norm_sq(again[i] - got[i]) == 0.0);
  std::stringstream bad("x,a\n1,2\n");
  CHECK_THROWS_AS(read_target_csv(bad), ParseError);
}

TEST_CASE("line grid integrates across period boundaries", "[expansion]") {
  const PotentialQ q = wavy();
  const auto g = line_grid(q, -kPi, 2 * kPi);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] * std::abs(g.nodes[i] - kPi);
  CHECK_THAT(s, WithinRel(2.5 * kPi * kPi, 1e-13));
}

TEST_CASE("targets from JSON", "[expansion]") {
  const PotentialQ q = build_Qb(1.2);
  const auto g = target_from_json(nlohmann::json::parse(R"({"type":"gaussian","center":0.5,"scale":2,"support":[-3,3]})"), q);
  const std::vector<double> x{0.5, 2.5};
  const auto v = g(x);
  CHECK(std::abs(v[0].v0 - 1.0) < 1e-15);
  CHECK(std::abs(v[1].v0 - std::exp(-1.0)) < 1e-15);
  CHECK_THROWS_AS(target_from_json(nlohmann::json::parse(R"({"type":"nope"})"), q), ParseError);
}
