#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "dirac/monodromy.hpp"

using namespace dirac;
using Catch::Matchers::WithinAbs;

namespace {

double max_diff(const Mat2& a, const Mat2& b) { return (a - b).max_abs(); }

Mat2 rotation(Complex theta) {
  return {{std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)}};
}

// Classical fixed-step RK4 on y' = A(x) y with panels split at the breakpoints.
Mat2 rk4_monodromy(const PotentialQ& q, Complex lam, int steps_per_unit) {
  auto rhs = [&](double x, const Mat2& Y) {
    const Mat2 A{{q.a3(x), q.a4(x) - lam, lam - q.a1(x), -q.a2(x)}};
    return A * Y;
  };
  std::vector<double> pts{0.0};
  for (double b : q.breakpoints()) pts.push_back(b);
  pts.push_back(kPi);
  Mat2 Y = Mat2::identity();
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    const int n = std::max(1, static_cast<int>(std::ceil((pts[p + 1] - pts[p]) * steps_per_unit)));
    const double h = (pts[p + 1] - pts[p]) / n;
    // Evaluate the piecewise part strictly inside the panel.
    for (int i = 0; i < n; ++i) {
      const double x = pts[p] + i * h;
      const double xl = std::max(x, pts[p] + 1e-14), xr = std::min(x + h, pts[p + 1] - 1e-14);
      const Mat2 k1 = rhs(xl, Y);
      const Mat2 k2 = rhs(x + h / 2, Y + Complex(h / 2) * k1);
      const Mat2 k3 = rhs(x + h / 2, Y + Complex(h / 2) * k2);
      const Mat2 k4 = rhs(xr, Y + Complex(h) * k3);
      Y = Y + Complex(h / 6) * (k1 + Complex(2) * k2 + Complex(2) * k3 + k4);
    }
  }
  return Y;
}

PotentialQ wavy() {
  PotentialQ q;
  q.a1 = PeriodicFunction({{1, {0.3, 0.1}}}, {{0.4, 1.3, {0.2, 0.0}}});
  q.a2 = PeriodicFunction({{0, -0.7}, {-1, {0.1, -0.2}}}, {});
  q.a3 = PeriodicFunction({{0, {0.7, 0.1}}, {2, 0.15}}, {});
  q.a4 = PeriodicFunction({}, {{2.0, 2.8, {0.0, 0.4}}});
  return q;
}

}  // namespace

TEST_CASE("zero potential monodromy is a rotation") {
  const PotentialQ z;
  for (Complex lam : {Complex(1.0), Complex(0.0), Complex(0.5), Complex(3.3, 0.7), Complex(-12.0, -1.5)}) {
    const auto m = integrate_fundamental(z, lam);
    CHECK(max_diff(m.M, rotation(kPi * lam)) <= 1e-9 * (1 + m.M.max_abs()));
    CHECK(std::abs(wronskian(m) - 1.0) <= 1e-9 * (1 + m.M.max_abs()));
  }
  CHECK(std::abs(discriminant(integrate_fundamental(z, 0.0)) - 2.0) < 1e-12);
  CHECK(std::abs(discriminant(integrate_fundamental(z, 0.5))) < 1e-10);
}

TEST_CASE("Q_b monodromy closed form") {
  for (Complex b : {Complex(1.2), Complex(0.5, 0.3), Complex(-0.4, 0.0)}) {
    const auto q = build_Qb(b);
    for (Complex lam : {Complex(0.7), Complex(2.0, 1.0), Complex(-9.5, 0.4)}) {
      const auto m = integrate_fundamental(q, lam, 1e-12);
      const Mat2 exact = std::exp(kPi * b) * rotation(kPi * lam);
      CHECK(max_diff(m.M, exact) <= 1e-10 * (1 + exact.max_abs()) * (1 + std::abs(lam)));
      CHECK(std::abs(discriminant(m) - 2.0 * std::exp(kPi * b) * std::cos(kPi * lam)) <=
            1e-10 * (1 + exact.max_abs()) * (1 + std::abs(lam)));
      CHECK(std::abs(wronskian(m) - std::exp(2 * kPi * b)) <= 1e-9 * std::abs(std::exp(2 * kPi * b)) * (1 + std::abs(lam)));
    }
  }
}

TEST_CASE("nonconstant potential agrees with an RK4 oracle") {
  const auto q = wavy();
  for (Complex lam : {Complex(0.3), Complex(4.0, 0.5), Complex(-7.0, -1.0)}) {
    const auto m = integrate_fundamental(q, lam, 1e-12, false);
    const Mat2 ref = rk4_monodromy(q, lam, 4000);
    CHECK(max_diff(m.M, ref) <= 1e-8 * (1 + ref.max_abs()));
  }
}

TEST_CASE("Liouville identity holds to the integration tolerance") {
  const auto q = wavy();
  const Complex w = std::exp(2 * kPi * mean_b(q));
  for (Complex lam : {Complex(10, 3), Complex(1.0), Complex(-30.0, 0.5), Complex(95.0)}) {
    const auto m = integrate_fundamental(q, lam, 1e-12);
    CHECK(std::abs(wronskian(m) - w) <= 10 * 1e-12 * (1 + std::abs(lam)) * m.M.max_abs() * m.M.max_abs());
    CHECK(m.liouville_defect == Catch::Approx(std::abs(wronskian(m) - w)).margin(1e-300));
    CHECK(m.est_error >= m.liouville_defect);
  }
}

TEST_CASE("variational derivative matches central differences") {
  const auto q = wavy();
  for (Complex lam : {Complex(1.3), Complex(5.0, -0.8), Complex(-2.0, 1.5)}) {
    const auto m = integrate_fundamental(q, lam, 1e-13, true);
    const double h = 1e-5;
    const auto p = integrate_fundamental(q, lam + h, 1e-13, false);
    const auto n = integrate_fundamental(q, lam - h, 1e-13, false);
    const Mat2 fd = Complex(1 / (2 * h)) * (p.M - n.M);
    CHECK(max_diff(m.dM_dlambda, fd) <= 1e-6 * fd.max_abs());
    // Analytic in lambda: the derivative along the imaginary direction agrees.
    const auto pi_ = integrate_fundamental(q, lam + Complex(0, h), 1e-13, false);
    const auto ni_ = integrate_fundamental(q, lam - Complex(0, h), 1e-13, false);
    const Mat2 fdi = Complex(0, -1 / (2 * h)) * (pi_.M - ni_.M);
    CHECK(max_diff(m.dM_dlambda, fdi) <= 1e-6 * fdi.max_abs());
  }
}

TEST_CASE("solution trace: closed forms, initial data and validation") {
  const double xs[] = {0.0, kPi / 4, kPi / 2, kPi};
  const auto tz = solution_trace(PotentialQ{}, 2.0, xs);
  CHECK(std::abs(tz.c_values[0].v0 - 1.0) < 1e-15);
  CHECK(std::abs(tz.s_values[0].v1 - 1.0) < 1e-15);
  CHECK(std::abs(tz.c_values[1].v0) < 1e-9);
  CHECK(std::abs(tz.c_values[1].v1 - 1.0) < 1e-9);

  const Complex b(0.5, 0.3), lam(2.0, 1.0);
  const auto tb = solution_trace(build_Qb(b), lam, xs);
  const Complex e = std::exp(b * kPi / 2.0);
  CHECK(std::abs(tb.c_values[2].v0 - e * std::cos(lam * kPi / 2.0)) < 1e-9 * std::abs(e) * 10);
  CHECK(std::abs(tb.c_values[2].v1 - e * std::sin(lam * kPi / 2.0)) < 1e-9 * std::abs(e) * 10);
  CHECK(max_diff(Mat2{{tb.c_values[3].v0, tb.s_values[3].v0, tb.c_values[3].v1, tb.s_values[3].v1}},
                 tb.monodromy.M) < 1e-12);

  const double unsorted[] = {1.0, 0.5};
  CHECK_THROWS_AS(solution_trace(PotentialQ{}, 1.0, unsorted), DomainError);
  const double outside[] = {0.0, 4.0};
  CHECK_THROWS_AS(solution_trace(PotentialQ{}, 1.0, outside), DomainError);

  std::ostringstream csv;
  write_trace_csv(csv, tz);
  std::string header;
  std::istringstream in(csv.str());
  std::getline(in, header);
  CHECK(header.rfind("x,", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 4);
}

namespace {

// max_x |c1(x) - e^{a(x)} cos(lambda x - theta(x))| * lambda with theta = (1/2) int (a1 + a4).
std::vector<double> scaled_residuals(const PotentialQ& q, bool with_phase) {
  std::vector<double> xs;
  for (int i = 0; i <= 64; ++i) xs.push_back(kPi * i / 64);
  std::vector<double> out;
  for (double lam : {20.0, 40.0, 80.0, 160.0}) {
    const auto tr = solution_trace(q, lam, xs, 1e-11);
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Complex theta = with_phase ? 0.5 * (q.a1.integral(xs[i]) + q.a4.integral(xs[i])) : Complex{};
      const Complex lead = std::exp(accumulate_a(q, xs[i])) * std::cos(lam * xs[i] - theta);
      worst = std::max(worst, std::abs(tr.c_values[i].v0 - lead));
    }
    out.push_back(worst * lam);
  }
  return out;
}

}  // namespace

TEST_CASE("leading asymptotics of c1 with traceless diagonal decay like 1/lambda") {
  auto q = wavy();
  q.a4 = q.a1.scaled(-1.0);
  const auto s = scaled_residuals(q, false);
  INFO(s[0] << " " << s[1] << " " << s[2] << " " << s[3]);
  CHECK(s[3] <= 2.0 * s[0]);
  CHECK(s[3] <= 2.0 * s[2]);
}

TEST_CASE("a diagonal with nonzero running integral adds a phase to the leading term") {
  const auto q = wavy();
  const auto plain = scaled_residuals(q, false);
  const auto phased = scaled_residuals(q, true);
  INFO(plain[0] << " " << plain[3] << " / " << phased[0] << " " << phased[3]);
  // Without the phase the residual stays O(1), so lambda * residual grows linearly.
  CHECK(plain[3] >= 4.0 * plain[0]);
  CHECK(phased[3] <= 2.0 * phased[0]);
}

TEST_CASE("integration rejects nonpositive tolerance") {
  CHECK_THROWS_AS(integrate_fundamental(PotentialQ{}, 1.0, 0.0), DomainError);
}

TEST_CASE("extended-precision monodromy matches the Q_b closed form") {
  const Complex b{0.7, -0.2};
  for (Complex lam : {Complex{0.4, 0.3}, Complex{-30.0, 4.0}}) {
    const auto e = integrate_fundamental_extended(build_Qb(b), lam);
    const Mat2 expect = std::exp(kPi * b) * rotation(kPi * lam);
    CHECK(max_diff(e.M, expect) < 1e-13 * expect.max_abs());
  }
}

TEST_CASE("extended-precision Wronskian resolves large |Im lambda|") {
  const PotentialQ q = wavy();
  const Complex W = std::exp(2.0 * kPi * mean_b(q));
  const auto e = integrate_fundamental_extended(q, {-40.0, 5.0});
  CHECK(std::abs(e.wronskian - W) < 1e-10 * std::abs(W));
  const auto d = integrate_fundamental(q, {-40.0, 5.0}, 1e-12, false);
  CHECK(max_diff(e.M, d.M) < 1e-9 * e.M.max_abs());
  CHECK(e.M.max_abs() > 1e6);
}
