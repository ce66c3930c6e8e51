#pragma once

// Quadrature rules and grids: Gauss-Legendre nodes, radial (modulus of
// momentum) grids, product angular rules on the sphere, compensated
// summation and an adaptive rule for oscillatory integrands.

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "toa/kinematics.hpp"
#include "toa/types.hpp"

namespace toa {

// Neumaier-compensated accumulator; summation order is the call order, so
// results are bit-reproducible for a fixed input sequence.
template <typename T>
class CompensatedSum {
 public:
  void add(T x) {
    if constexpr (std::is_same_v<T, Complex>) {
      re_.add(x.real());
      im_.add(x.imag());
    } else {
      const T t = sum_ + x;
      if (std::abs(sum_) >= std::abs(x))
        c_ += (sum_ - t) + x;
      else
        c_ += (x - t) + sum_;
      sum_ = t;
    }
  }
  T value() const {
    if constexpr (std::is_same_v<T, Complex>)
      return {re_.value(), im_.value()};
    else
      return sum_ + c_;
  }

 private:
  struct Empty {};
  using Part = std::conditional_t<std::is_same_v<T, Complex>, CompensatedSum<double>, Empty>;
  T sum_{};
  T c_{};
  [[no_unique_address]] Part re_{};
  [[no_unique_address]] Part im_{};
};

struct GaussLegendreRule {
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;  // positive, sum to 2
  std::vector<double> barycentric;
};

// n-point Gauss-Legendre rule on [-1, 1], n >= 1 (cached per n).
const GaussLegendreRule& gauss_legendre(int n);

enum class RadialScheme { GaussLegendrePanels, UniformZ, UniformK };

// Discretized modulus-of-momentum axis. Nodes are strictly increasing and
// positive; weights are quadrature weights for dk (no k^2 factor).
//
// GaussLegendrePanels: composite rule on [breaks.front(), breaks.back()];
//   integrates polynomials of degree < 2*order exactly on each panel.
// UniformZ: k_j = k(Z_lo + j dZ) with weights dZ * omega f (periodic
//   trapezoid in Z), intended for integrands decayed at both ends.
// UniformK: k_j = k_lo + j dk with trapezoid weights.
class RadialGrid {
 public:
  static RadialGrid gauss_legendre_panels(std::vector<double> breaks, int order);
  static RadialGrid gauss_legendre_panels(double k_lo, double k_hi, int panels, int order);
  static RadialGrid uniform_z(const ZMap& zmap, double z_lo, double dz, std::size_t n);
  static RadialGrid uniform_k(double k_lo, double dk, std::size_t n);

  RadialScheme scheme() const { return scheme_; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  // Integration range: panel breaks for GL, first/last node otherwise.
  double k_min() const;
  double k_max() const;

  // Uniform schemes: coordinate of node 0 and spacing in that coordinate.
  double origin() const { return origin_; }
  double spacing() const { return spacing_; }
  // Z coordinate of every node (UniformZ only).
  std::span<const double> z_nodes() const { return z_nodes_; }
  const std::optional<ZMap>& zmap() const { return zmap_; }

  const std::vector<double>& breaks() const { return breaks_; }
  int order() const { return order_; }

  // Evaluates the interpolant of sampled values at k. GL panels use
  // barycentric Lagrange interpolation on the panel; uniform grids use an
  // 8-point local Lagrange stencil in the uniform coordinate. Zero outside
  // [k_min, k_max].
  Complex interpolate(std::span<const Complex> values, double k) const;

  bool same_as(const RadialGrid& other) const;

 private:
  RadialScheme scheme_ = RadialScheme::GaussLegendrePanels;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> breaks_;
  int order_ = 0;
  double origin_ = 0.0;
  double spacing_ = 0.0;
  std::vector<double> z_nodes_;
  std::optional<ZMap> zmap_;
};

// Product rule on S^2: Gauss-Legendre in cos(theta) times uniform in phi.
// Exact for polynomials of total degree <= order restricted to the sphere
// (hence for spherical harmonics with l <= order).
struct AngularQuadrature {
  int order = 0;
  int n_theta = 0;
  int n_phi = 0;
  std::vector<Vec3> directions;
  std::vector<double> weights;  // sum to 4 pi

  static AngularQuadrature build(int order);
  std::size_t size() const { return directions.size(); }
};

// Integrates amplitude(x) * exp(i phase(x)) over [a, b] with composite
// Gauss-Legendre panels. Panels are bisected until
// |phase'(x)| * width <= pi/4 at both ends and the midpoint, and width <=
// max_width. Mandatory break points (kinks of the integrand) are honored.
struct OscillatoryIntegrand {
  std::function<Complex(double)> amplitude;
  std::function<double(double)> phase;
  std::function<double(double)> phase_rate;
};
Complex integrate_oscillatory(const OscillatoryIntegrand& f, double a, double b,
                              std::span<const double> breaks, double max_width, int order = 20);

}  // namespace toa
