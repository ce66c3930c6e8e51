#pragma once

// Positive-energy Klein-Gordon states in the momentum representation, the
// Lorentz-invariant scalar product, Newton-Wigner localized states and the
// detected subspace of a point detector.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "toa/kinematics.hpp"
#include "toa/quadrature.hpp"
#include "toa/types.hpp"

namespace toa {

struct Detector {
  Vec3 position;
  RegularizationCut cut;

  Detector(Vec3 x, RegularizationCut c) : position(x), cut(c) {
    if (!is_finite(x)) throw std::invalid_argument("Detector: position must be finite");
  }
};

// Phi(k) proportional to exp(-|k - k0|^2 / (4 sigma^2)) exp(-i k.x0).
struct GaussianRecipe {
  Vec3 k0;
  double sigma = 1.0;
  Vec3 x0;
};

// Product grid: radial nodes times directions on the sphere. Values are
// stored radial-major: index = i_radial * angular.size() + i_angular.
struct MomentumGrid {
  RadialGrid radial;
  AngularQuadrature angular;

  std::size_t size() const { return radial.size() * angular.size(); }
  Vec3 momentum(std::size_t ir, std::size_t ia) const { return angular.directions[ia] * radial.node(ir); }
};
using MomentumGridPtr = std::shared_ptr<const MomentumGrid>;

MomentumGridPtr make_momentum_grid(RadialGrid radial, AngularQuadrature angular);

// Angular order integrating exp(i k.d) exactly enough for k.|d| up to
// plane_wave_bandwidth, on top of an integrand concentrated like
// exp(concentration * cos(gamma)).
int angular_order_for(double plane_wave_bandwidth, double concentration = 0.0);

// Radial GL-panel grid covering the support of a Gaussian packet, with panels
// narrow enough to resolve the width and the phase exp(i k |X - x0|).
RadialGrid radial_grid_for(const GaussianRecipe& recipe, const Vec3& detector, int order = 16);

// Product grid sized for a Gaussian packet seen from the given detector.
MomentumGridPtr momentum_grid_for(const GaussianRecipe& recipe, const Vec3& detector);

class WavePacket {
 public:
  WavePacket(MomentumGridPtr grid, Mass mass, std::vector<Complex> values, bool improper = false,
             std::optional<GaussianRecipe> recipe = std::nullopt);

  const MomentumGrid& grid() const { return *grid_; }
  const MomentumGridPtr& grid_ptr() const { return grid_; }
  Mass mass() const { return mass_; }
  std::span<const Complex> values() const { return values_; }
  Complex value(std::size_t ir, std::size_t ia) const { return values_[ir * grid_->angular.size() + ia]; }
  // Non-normalizable states (Newton-Wigner, arrival eigenstates): their norms
  // and overlaps depend on the grid cutoff.
  bool improper() const { return improper_; }
  const std::optional<GaussianRecipe>& recipe() const { return recipe_; }

  WavePacket scaled(Complex alpha) const;
  WavePacket plus(const WavePacket& other) const;
  WavePacket normalized() const;

 private:
  MomentumGridPtr grid_;
  Mass mass_;
  std::vector<Complex> values_;
  bool improper_;
  std::optional<GaussianRecipe> recipe_;
};

// Element Phi^(X)(k) = exp(-i k.X) psi(k) of the detected subspace; only the
// radial factor psi(k) is stored, the plane-wave phase is implied by the
// detector.
struct RadialPacket {
  RadialGrid grid;
  std::vector<Complex> values;
  Detector detector;
  Mass mass;

  Complex evaluate(double k) const { return grid.interpolate(values, k); }
  RadialPacket with_values(std::vector<Complex> v) const;
};

// (phi, psi) = int d^3k / (2 omega) conj(Phi) Psi.
Complex kg_inner(const WavePacket& phi, const WavePacket& psi);
double kg_norm2(const WavePacket& phi);

// Inner product of detected-subspace elements at the same detector:
// 4 pi int k^2 dk / (2 omega) conj(phi) psi.
Complex kg_inner(const RadialPacket& phi, const RadialPacket& psi);
double kg_norm2(const RadialPacket& phi);

WavePacket gaussian_packet(const GaussianRecipe& recipe, Mass m, MomentumGridPtr grid);

// Squared KG norm of the unit-amplitude Gaussian after the angular integral
// is done in closed form; a one-dimensional radial quadrature.
double gaussian_norm2_radial(const GaussianRecipe& recipe, Mass m, const RadialGrid& grid);

// Mean momentum with respect to the KG measure.
Vec3 mean_momentum(const WavePacket& packet);

// (2 pi)^{-3/2} sqrt(2 omega) exp(-i k.x); improper.
WavePacket newton_wigner_state(const Vec3& x, Mass m, MomentumGridPtr grid);

// Amplitude to find the particle at x at t = 0: (Psi_x, Phi).
Complex position_amplitude(const WavePacket& packet, const Vec3& x);

// Orthogonal projection onto the detected subspace:
// psi(k) = (1/4 pi) int dOmega exp(i k.X) Phi(k).
RadialPacket detected_projection(const WavePacket& packet, const Detector& det);

// Same projection for a Gaussian recipe with the angular integral done in
// closed form; normalized so the full 3-D packet has unit KG norm.
RadialPacket detected_projection_gaussian(const GaussianRecipe& recipe, Mass m, const Detector& det,
                                          const RadialGrid& grid);

// exp(-i k.X) psi(|k|) sampled on a product grid with the same radial grid.
WavePacket lift(const RadialPacket& radial, MomentumGridPtr grid);

// Detected-subspace element with a radial factor that may depend on X.
using DetectorProfile = std::function<Complex(double k, const Vec3& x)>;
WavePacket subspace_element(const DetectorProfile& profile, const Detector& det, Mass m, MomentumGridPtr grid);

// 1 - ||P^(X) Phi||^2 for a normalized packet; 0 iff Phi lies in the
// detected subspace.
double membership_residual(const WavePacket& packet, const Detector& det);

}  // namespace toa
