#pragma once

// The arrival-time operator Q0 restricted to the detected subspace, where it
// acts on the radial factor only, and its one-dimensional counterpart.
//
// Regularized form, ordering exponent n:
//   Q0 psi = -i omega sqrt(f) k^{-n-1/2} d/dk (k^{n+1/2} sqrt(f) psi)
//          = -i w^{-1} d/dZ (w psi),         w = k^{n+1/2} sqrt(f).
// The unregularized form is the same expression with f = 1/k.

#include <span>
#include <utility>
#include <vector>

#include "toa/hilbert.hpp"
#include "toa/kinematics.hpp"
#include "toa/quadrature.hpp"
#include "toa/types.hpp"

namespace toa {

enum class DerivativeScheme {
  Auto,               // spectral on uniform-Z grids when the data is decayed at both ends, FD8 otherwise
  SpectralZ,          // FFT differentiation in Z; needs a uniform-Z grid and decayed data
  FiniteDifference8,  // 9-point Lagrange stencils in the grid's uniform coordinate
};

// Derivative of sampled values along the grid's own coordinate: d/dZ on a
// uniform-Z grid, d/dk on uniform-k and Gauss-Legendre panel grids (the
// latter by exact polynomial differentiation on each panel, ignoring the
// scheme). Throws GridError when the self-test says the data is under-resolved.
std::vector<Complex> differentiate(const RadialGrid& grid, std::span<const Complex> values,
                                   DerivativeScheme scheme = DerivativeScheme::Auto);

// d/dk on any grid, via the chain rule on uniform-Z grids.
std::vector<Complex> differentiate_k(const RadialGrid& grid, std::span<const Complex> values,
                                     DerivativeScheme scheme = DerivativeScheme::Auto);

// Index range [first, second) of the interior 80% of the nodes.
std::pair<std::size_t, std::size_t> interior_range(std::size_t n);

RadialPacket apply_q0_radial(const RadialPacket& psi, OrderingExponent n, bool regularized,
                             DerivativeScheme scheme = DerivativeScheme::Auto);

// Unregularized operator written in the symmetrized ordering
//   sqrt(omega) k^{-n-1} (-i d/dk + i k/(2 omega^2)) k^n sqrt(omega).
// Algebraically identical to apply_q0_radial(psi, n, false).
RadialPacket apply_q0_ordered(const RadialPacket& psi, OrderingExponent n,
                              DerivativeScheme scheme = DerivativeScheme::Auto);

// |<phi, Q psi> - <Q phi, psi>| / (||phi|| ||psi|| scale) in the KG radial
// measure, with scale = (||Q phi||/||phi|| + ||Q psi||/||psi||) / 2.
double hermiticity_defect(OrderingExponent n, const RadialPacket& phi, const RadialPacket& psi, bool regularized,
                          DerivativeScheme scheme = DerivativeScheme::Auto);

// Interior max of |Q(Z psi) - Z Q psi + i psi| / ||psi||_inf for the
// regularized n = 1/2 operator.
double commutator_z_check(const RadialPacket& psi, DerivativeScheme scheme = DerivativeScheme::Auto);

// Radial profile of the arrival-time eigenstate at T. The detector phase
// exp(-i k.X) is implied by the detector.
struct ToAEigenfunction {
  double T = 0.0;
  Detector detector;
  OrderingExponent n;
  bool regularized = true;
  Mass mass;

  Complex operator()(double k) const;
  RadialPacket sample(const RadialGrid& grid) const;
};

// exp(i omega T) / (2 pi k^n).
RadialPacket eigenfunction_raw(double T, const Detector& det, OrderingExponent n, Mass m, const RadialGrid& grid);
// exp(i Z T) / (2 pi k^{n+1/2} sqrt(f)).
RadialPacket eigenfunction_reg(double T, const Detector& det, Mass m, const RadialGrid& grid,
                               OrderingExponent n = OrderingExponent{});

// One-dimensional momentum function on the half line k > 0.
struct MomentumLine {
  RadialGrid grid;
  std::vector<Complex> values;
  Mass mass;
};

// e^{-ikX} sqrt(omega/k) (-i d/dk + i k/(2 omega^2)) sqrt(omega/k) e^{ikX} psi.
MomentumLine q0_1d_apply(const MomentumLine& psi, double X, DerivativeScheme scheme = DerivativeScheme::Auto);

// alpha sqrt(k) exp(i(omega T - k X)) with alpha = 1/sqrt(pi), so that
// int_0^inf dk/(2 omega) conj(psi_T) psi_T' = delta(T - T').
MomentumLine eigenfunction_1d(double T, double X, Mass m, const RadialGrid& grid);
inline constexpr double kAlpha1d = 0.56418958354775628695;  // 1/sqrt(pi)

// Max over k in (0, kmax] of |exp(-imT) psi_T(k) - psi_T^NR(k)| / |psi_T^NR(k)|,
// with psi^NR the eigenfunction for the dispersion m + k^2/(2m). Throws
// RegimeError unless 0 < kmax < m/2.
double nr_limit_compare(double T, double X, Mass m, double kmax, std::size_t samples = 2001);

}  // namespace toa
