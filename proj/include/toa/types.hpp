#pragma once

// Common value types for the time-of-arrival library.
// Natural units throughout: hbar = c = 1, momenta and masses in inverse
// length, times and positions in length.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace toa {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kFourPi = 4.0 * kPi;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// Particle mass, m >= 0. m = 0 is the massless edge case.
class Mass {
 public:
  explicit Mass(double m) : m_(m) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("Mass: m must be finite and >= 0");
  }
  double value() const { return m_; }

 private:
  double m_;
};

// Marolf-type cut epsilon > 0 separating the low-momentum branch of f(k).
class RegularizationCut {
 public:
  explicit RegularizationCut(double eps) : eps_(eps) {
    if (!(eps > 0.0) || !std::isfinite(eps))
      throw std::invalid_argument("RegularizationCut: epsilon must be finite and > 0");
  }
  double epsilon() const { return eps_; }

 private:
  double eps_;
};

// Ordering exponent n of the arrival-time operator; n = 1/2 is the Hermitian ordering in 3-D.
class OrderingExponent {
 public:
  explicit OrderingExponent(double n = 0.5) : n_(n) {
    if (!std::isfinite(n)) throw std::invalid_argument("OrderingExponent: n must be finite");
  }
  double value() const { return n_; }
  bool is_hermitian() const { return n_ == 0.5; }

 private:
  double n_;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid mismatch, under-resolved derivative, or a failed discretization self-test.
class GridError : public Error {
 public:
  using Error::Error;
};

// A sampled window (Z or T) does not contain the support of the function.
class WindowError : public Error {
 public:
  using Error::Error;
};

// Conditional arrival time requested for a state that is never detected.
class UndefinedConditional : public Error {
 public:
  using Error::Error;
};

// Parameters outside the validity regime of an approximation.
class RegimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace toa
