#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dirac/bloch.hpp"

using namespace dirac;
using Catch::Matchers::WithinAbs;

namespace {

PotentialQ wavy() {
  PotentialQ q = build_Qb({0.8, 0.1});
  q.a1 = PeriodicFunction({{1, {0.2, 0.1}}, {-1, {0.0, -0.15}}}, {});
  q.a2 = q.a2 + PeriodicFunction({{2, 0.1}}, {{0.5, 1.5, {0.05, 0.0}}});
  q.a4 = PeriodicFunction({{1, {0.0, 0.1}}}, {});
  return q;
}

PotentialQ perturbed_qb(Complex b, Complex eps) {
  PotentialQ q = build_Qb(b);
  q.a1 = PeriodicFunction::constant(eps);
  return q;
}

const BlochEigenvalue* find_slot(const LatticeScan& s, int n, int j) {
  for (const auto& e : s.found)
    if (e.n == n && e.j == j) return &e;
  return nullptr;
}

// Relative L2 distance from phi to the span of ref on the grid.
double distance_up_to_scalar(const QuadratureGrid& g, std::span<const Vec2> phi, std::span<const Vec2> ref) {
  const Complex c = l2_inner(g, phi, ref) / l2_inner(g, ref, ref);
  std::vector<Vec2> d(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) d[i] = phi[i] - c * ref[i];
  return l2_norm(g, d) / l2_norm(g, phi);
}

}  // namespace

TEST_CASE("characteristic function vanishes on the free lattice", "[bloch]") {
  const PotentialQ zero;
  CHECK(std::abs(char_value(zero, 0.3, 0.3, 1e-12)) < 1e-11);
  CHECK(std::abs(char_value(zero, -0.3, 0.3, 1e-12)) < 1e-11);
  CHECK(std::abs(char_value(zero, 4.3, 0.3, 1e-12)) < 1e-10);
  CHECK(std::abs(char_value(zero, 1.0, 0.3)) > 0.1);
  const auto cv = char_value_with_derivative(zero, {1.1, 0.2}, 0.3);
  const double h = 1e-6;
  const Complex fd = (char_value(zero, Complex{1.1 + h, 0.2}, 0.3) - char_value(zero, Complex{1.1 - h, 0.2}, 0.3)) / (2 * h);
  CHECK(std::abs(cv.derivative - fd) < 1e-7);
}

TEST_CASE("zero potential eigenvalues are 2n +- t", "[bloch]") {
  const PotentialQ zero;
  for (double t : {-0.7, 0.3, 0.9}) {
    auto evs = eigenvalues_in_rect(zero, t, {-5.5, 5.5, -0.5, 0.5});
    std::size_t expected = 0;
    for (int n = -4; n <= 4; ++n)
      for (double s : {-t, t}) expected += std::abs(2.0 * n + s) < 5.5;
    REQUIRE(evs.size() == expected);
    for (const auto& e : evs) {
      CHECK(e.multiplicity == 1);
      CHECK(std::abs(e.lambda - lattice_reference(e.n, e.j, t, 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("t = 0 gives double eigenvalues for the zero potential", "[bloch]") {
  auto evs = eigenvalues_in_rect(PotentialQ{}, 0.0, {-5, 5, -0.5, 0.5});
  int total = 0;
  for (const auto& e : evs) {
    CHECK(e.multiplicity == 2);
    CHECK(std::abs(e.lambda - std::round(e.lambda.real())) < 1e-6);
    CHECK(static_cast<long>(std::round(e.lambda.real())) % 2 == 0);
    total += e.multiplicity;
  }
  CHECK(total == 10);
  CHECK(count_in_rect(PotentialQ{}, 0.0, {-5, 5, -0.5, 0.5}) == 10);
}

TEST_CASE("constant potential Q_b eigenvalues lie on the shifted lattice", "[bloch]") {
  for (Complex b : {Complex{1.2}, Complex{0.5, 0.3}, Complex{-0.7, 0.0}}) {
    for (double t : {-0.6, 0.25, 1.0}) {
      const auto scan = eigenvalues_near_lattice(build_Qb(b), t, -4, 4);
      CHECK(scan.missing.empty());
      CHECK(scan.found.size() == 18);
      for (const auto& e : scan.found) CHECK(std::abs(e.lambda - lattice_reference(e.n, e.j, t, b)) < 1e-10);
    }
  }
}

TEST_CASE("constant diagonal perturbation matches the quadratic closed form", "[bloch]") {
  const Complex b = 1.2, eps = 0.3;
  const double t = 0.4;
  const auto scan = eigenvalues_near_lattice(perturbed_qb(b, eps), t, -3, 3);
  REQUIRE(scan.missing.empty());
  for (int n = -3; n <= 3; ++n)
    for (int j = 1; j <= 2; ++j) {
      const Complex mu = lattice_reference(n, j, t, b);
      const Complex root = std::sqrt(eps * eps / 4.0 + mu * mu);
      const Complex l1 = eps / 2.0 + root, l2 = eps / 2.0 - root;
      const Complex expect = std::abs(l1 - mu) < std::abs(l2 - mu) ? l1 : l2;
      const auto* e = find_slot(scan, n, j);
      REQUIRE(e != nullptr);
      CHECK(std::abs(e->lambda - expect) < 1e-10);
    }
}

TEST_CASE("Q_b eigenfunctions are plane waves up to a scalar", "[bloch]") {
  const Complex b{0.5, 0.3};
  const PotentialQ q = build_Qb(b);
  const auto grid = period_grid({}, 256);
  for (double t : {-0.4, 0.7}) {
    const auto scan = eigenvalues_near_lattice(q, t, -3, 3);
    for (const auto& e : scan.found) {
      const auto phi = eigenfunction(q, t, e, grid.nodes, 1e-12);
      std::vector<Vec2> ref(grid.size());
      const Complex sgn = e.j == 2 ? Complex(0, -1) : Complex(0, 1);
      const double k = e.j == 2 ? 2.0 * e.n + t : -2.0 * e.n + t;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const Complex w = std::exp(Complex(0, k * grid.nodes[i]));
        ref[i] = {w, sgn * w};
      }
      CHECK(distance_up_to_scalar(grid, phi.values, ref) < 1e-9);
    }
  }
}

TEST_CASE("eigenfunctions satisfy the quasi-periodic condition", "[bloch][property]") {
  const PotentialQ q = wavy();
  const double t = 0.35;
  const auto scan = eigenvalues_near_lattice(q, t, -2, 2);
  for (const auto& e : scan.found) {
    if (e.multiplicity != 1) continue;
    const std::vector<double> xs{0.0, kPi};
    const auto phi = eigenfunction(q, t, e, xs, 1e-12);
    const Complex ph = std::exp(Complex(0, kPi * t));
    CHECK(std::abs(phi.at_pi.v0 - ph * phi.at_zero.v0) < 1e-8 * std::sqrt(norm_sq(phi.at_zero)));
    CHECK(std::abs(phi.at_pi.v1 - ph * phi.at_zero.v1) < 1e-8 * std::sqrt(norm_sq(phi.at_zero)));

    std::vector<double> pts{0.3, 1.7, 2.9}, shifted;
    for (double x : pts) shifted.push_back(x + 3 * kPi);
    const auto a = evaluate_mode(q, e.lambda, phi.coeffs, t, pts, 1e-12);
    const auto c = evaluate_mode(q, e.lambda, phi.coeffs, t, shifted, 1e-12);
    const Complex ph3 = std::exp(Complex(0, 3 * kPi * t));
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::sqrt(norm_sq(c[i] - ph3 * a[i])) < 1e-10 * (1 + std::sqrt(norm_sq(a[i]))));
  }
}

TEST_CASE("adjoint eigenvalues are conjugates and pairings are biorthogonal", "[bloch][property]") {
  const PotentialQ q = wavy();
  const double t = -0.45;
  const auto grid = period_grid(q.breakpoints(), 512);
  const auto scan = eigenvalues_near_lattice(q, t, -2, 2);
  std::vector<Eigenpair> pairs;
  for (const auto& e : scan.found)
    if (e.multiplicity == 1) pairs.push_back(make_eigenpair(q, t, e, grid, 1e-12));
  REQUIRE(pairs.size() >= 8);
  for (const auto& p : pairs) {
    CHECK(std::abs(p.adjoint_lambda - std::conj(p.eigenvalue.lambda)) < 1e-9);
    CHECK_FALSE(p.degenerate);
    CHECK(std::abs(pairing_alpha(p) - p.alpha) < 1e-12 * std::abs(p.alpha));
  }
  for (std::size_t a = 0; a < pairs.size(); ++a)
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      if (a == c) continue;
      const double scale = std::sqrt(std::abs(pairs[a].alpha) * std::abs(pairs[c].alpha));
      CHECK(std::abs(cross_pairing(pairs[a], pairs[c])) < 1e-8 * scale);
    }
}

TEST_CASE("Q_b pairing attains the Cauchy-Schwarz bound", "[bloch]") {
  const PotentialQ q = build_Qb(1.2);
  const auto grid = period_grid({}, 256);
  const auto scan = eigenvalues_near_lattice(q, 0.3, -2, 2);
  for (const auto& e : scan.found) {
    const auto p = make_eigenpair(q, 0.3, e, grid, 1e-12);
    CHECK_THAT(std::abs(p.alpha) / (l2_norm(grid, p.phi) * l2_norm(grid, p.phi_star)), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("adjoint construction rejects a non-eigenvalue", "[bloch]") {
  const PotentialQ q = build_Qb(1.2);
  BlochEigenvalue fake;
  fake.t = 0.3;
  fake.lambda = lattice_reference(1, 2, 0.3, 1.2) + 0.3;
  const std::vector<double> xs{0.0, 1.0};
  CHECK_THROWS_AS(adjoint_eigenfunction(q, 0.3, fake, xs), AdjointPairingError);
}

TEST_CASE("eigenvector coefficients fall back to the second row", "[bloch]") {
  const double t = 0.2;
  const Complex e = std::exp(Complex(0, kPi * t));
  const Mat2 lower{{e, 0.0, 0.5, 2.0}};
  const auto c = eigenvector_coefficients(lower, t);
  CHECK(c.used_second_row);
  CHECK(std::abs((lower(0, 0) - e) * c.x1 + lower(0, 1) * c.x2) < 1e-14);
  CHECK(std::abs(lower(1, 0) * c.x1 + (lower(1, 1) - e) * c.x2) < 1e-14);

  const Mat2 upper{{0.5, 0.25, 0.0, e}};
  const auto u = eigenvector_coefficients(upper, t);
  CHECK_FALSE(u.used_second_row);
  CHECK(std::abs((upper(0, 0) - e) * u.x1 + upper(0, 1) * u.x2) < 1e-14);

  const Mat2 scalar{{e, 0.0, 0.0, e}};
  CHECK_THROWS_AS(eigenvector_coefficients(scalar, t), DegenerateEigenvectorError);
}

TEST_CASE("lattice labels survive shuffling", "[bloch][property]") {
  const Complex b{0.5, 0.3};
  const double t = 0.6;
  auto evs = eigenvalues_near_lattice(build_Qb(b), t, -3, 3).found;
  auto shuffled = evs;
  std::mt19937_64 rng(5);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (auto& e : shuffled) e.n = e.j = 0;
  assign_lattice_indices(shuffled, t, b);
  for (const auto& e : shuffled) CHECK(std::abs(e.lambda - lattice_reference(e.n, e.j, t, b)) < 1e-9);
}

TEST_CASE("lattice scan warns when the mean has zero real part", "[bloch]") {
  const auto scan = eigenvalues_near_lattice(PotentialQ{}, 0.4, -1, 1);
  CHECK(scan.precondition_warning);
  CHECK(scan.radius == 1.0);
  CHECK(verify_theorem1(PotentialQ{}, std::vector<double>{0.3}, 8, 12).declined);
}

TEST_CASE("simplicity threshold is the smallest scanned index when every slot is simple", "[bloch]") {
  const auto rep = verify_theorem1(build_Qb(0.3), std::vector<double>{0.5}, -3, 3);
  CHECK(rep.simple_threshold == 1);
  CHECK(rep.missing.empty());
}

TEST_CASE("eigenvalue CSV round trip is exact", "[bloch]") {
  auto evs = eigenvalues_near_lattice(wavy(), 0.15, -2, 2).found;
  std::stringstream ss;
  write_eigenvalue_csv(ss, evs);
  const auto back = read_eigenvalue_csv(ss);
  REQUIRE(back.size() == evs.size());
  for (std::size_t i = 0; i < evs.size(); ++i) {
    CHECK(back[i].lambda == evs[i].lambda);
    CHECK(back[i].n == evs[i].n);
    CHECK(back[i].j == evs[i].j);
    CHECK(back[i].t == evs[i].t);
    CHECK(back[i].multiplicity == evs[i].multiplicity);
  }
}

TEST_CASE("log-log slope recovers power laws", "[bloch]") {
  std::vector<double> x, y, flat;
  for (int n = 8; n <= 40; n += 4) {
    x.push_back(n);
    y.push_back(3.0 * std::pow(n, 1.5));
    flat.push_back(1e-12 * n * n);
  }
  CHECK_THAT(loglog_slope(x, y), WithinAbs(1.5, 1e-12));
  CHECK_THAT(loglog_slope(x, flat), WithinAbs(2.0, 1e-12));
  CHECK_THAT(loglog_slope(x, flat, kTheorem1ErrorFloor), WithinAbs(0.0, 1e-12));
}

TEST_CASE("Q_b meets the leading asymptotics exactly", "[bloch]") {
  const auto rep = verify_theorem1(build_Qb(1.2), std::vector<double>{-0.3, 0.9}, 8, 16);
  CHECK(rep.missing.empty());
  CHECK(rep.max_scaled_value_error < 1e-7);
  CHECK(rep.max_scaled_function_error < 1e-6);
  CHECK(rep.max_alpha_deviation < 1e-9);
  CHECK(rep.simple_threshold == 8);
  CHECK(rep.pass);
}

TEST_CASE("diagonal phase correction tracks traceless and general diagonals", "[bloch]") {
  PotentialQ q = build_Qb(1.2);
  CHECK(std::abs(diagonal_phase(q, 1.0)) == 0.0);
  q.a1 = PeriodicFunction({{1, 0.1}}, {});
  const double x = 0.7;
  const Complex expect = 0.5 * 0.1 * (std::exp(Complex(0, 2 * x)) - 1.0) / Complex(0, 2);
  CHECK(std::abs(diagonal_phase(q, x) - expect) < 1e-15);
  const auto lead = leading_eigenfunction(q, 5, 2, 0.3, x);
  const auto cor = corrected_leading_eigenfunction(q, 5, 2, 0.3, x);
  CHECK(std::abs(cor.v0 - std::exp(Complex(0, -1) * expect) * lead.v0) < 1e-15);
}
