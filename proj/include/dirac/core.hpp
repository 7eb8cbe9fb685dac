#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dirac {

using Complex = std::complex<double>;
using namespace std::complex_literals;

inline constexpr double kPi = std::numbers::pi;

// Column 2-vector of complex values.
struct Vec2 {
  Complex v0{};
  Complex v1{};

  Complex& operator[](int i) { return i == 0 ? v0 : v1; }
  const Complex& operator[](int i) const { return i == 0 ? v0 : v1; }

  friend Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.v0 + b.v0, a.v1 + b.v1}; }
  friend Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.v0 - b.v0, a.v1 - b.v1}; }
  friend Vec2 operator*(Complex s, const Vec2& a) { return {s * a.v0, s * a.v1}; }
  Vec2& operator+=(const Vec2& o) {
    v0 += o.v0;
    v1 += o.v1;
    return *this;
  }
};

// Pointwise Hermitian product <a, b> = a0*conj(b0) + a1*conj(b1).
inline Complex inner(const Vec2& a, const Vec2& b) {
  return a.v0 * std::conj(b.v0) + a.v1 * std::conj(b.v1);
}
inline double norm_sq(const Vec2& a) { return std::norm(a.v0) + std::norm(a.v1); }

// Row-major 2x2 complex matrix.
struct Mat2 {
  std::array<Complex, 4> m{};

  static Mat2 identity() { return {{Complex{1.0}, Complex{}, Complex{}, Complex{1.0}}}; }

  Complex& operator()(int r, int c) { return m[2 * r + c]; }
  const Complex& operator()(int r, int c) const { return m[2 * r + c]; }

  Complex trace() const { return m[0] + m[3]; }
  Complex det() const { return m[0] * m[3] - m[1] * m[2]; }
  double max_abs() const {
    double r = 0.0;
    for (const auto& z : m) r = std::max(r, std::abs(z));
    return r;
  }
  Vec2 col(int c) const { return {m[c], m[2 + c]}; }

  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {{a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
             a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
  }
  friend Vec2 operator*(const Mat2& a, const Vec2& x) {
    return {a.m[0] * x.v0 + a.m[1] * x.v1, a.m[2] * x.v0 + a.m[3] * x.v1};
  }
  friend Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {{a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2], a.m[3] + b.m[3]}};
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {{a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2], a.m[3] - b.m[3]}};
  }
  friend Mat2 operator*(Complex s, const Mat2& a) {
    return {{s * a.m[0], s * a.m[1], s * a.m[2], s * a.m[3]}};
  }
};

// Error hierarchy. Every failure the library reports derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

// Raised when a contour passes through (or numerically too close to) a zero.
class ContourError : public Error {
 public:
  using Error::Error;
};

class DegenerateEigenvectorError : public Error {
 public:
  using Error::Error;
};

class AdjointPairingError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace dirac
