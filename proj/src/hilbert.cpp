#include "toa/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "toa/parallel.hpp"

namespace toa {

namespace {

constexpr double kNormInvCube = 0.06349363593424097;  // (2 pi)^{-3/2}

// exp(c) sinh(s)/s for complex s without overflow.
Complex exp_sinhc(Complex c, Complex s) {
  if (s.real() < 0.0) s = -s;
  if (std::abs(s) < 1e-4) {
    const Complex s2 = s * s;
    return std::exp(c) * (1.0 + s2 / 6.0 + s2 * s2 / 120.0);
  }
  return std::exp(c + s) * (1.0 - std::exp(-2.0 * s)) / (2.0 * s);
}

void require_same_grid(const WavePacket& a, const WavePacket& b) {
  if (a.grid_ptr() != b.grid_ptr()) {
    const auto& ga = a.grid();
    const auto& gb = b.grid();
    if (!ga.radial.same_as(gb.radial) || ga.angular.order != gb.angular.order)
      throw GridError("kg_inner: packets live on different grids");
  }
  if (a.mass().value() != b.mass().value()) throw GridError("kg_inner: packets have different masses");
}

}  // namespace

MomentumGridPtr make_momentum_grid(RadialGrid radial, AngularQuadrature angular) {
  return std::make_shared<const MomentumGrid>(MomentumGrid{std::move(radial), std::move(angular)});
}

int angular_order_for(double plane_wave_bandwidth, double concentration) {
  if (!(plane_wave_bandwidth >= 0.0) || !(concentration >= 0.0))
    throw std::invalid_argument("angular_order_for: bandwidths must be >= 0");
  const double pw = plane_wave_bandwidth;
  return static_cast<int>(std::ceil(pw + 12.0 * std::cbrt(pw)) + std::ceil(8.6 * std::sqrt(concentration))) + 20;
}

RadialGrid radial_grid_for(const GaussianRecipe& recipe, const Vec3& detector, int order) {
  if (!(recipe.sigma > 0.0)) throw std::invalid_argument("radial_grid_for: sigma must be > 0");
  const double k0 = norm(recipe.k0);
  const double lo = std::max(0.0, k0 - 12.0 * recipe.sigma);
  const double hi = k0 + 12.0 * recipe.sigma;
  const double dist = norm(detector - recipe.x0) + norm(recipe.x0);
  double width = recipe.sigma;
  if (dist > 0.0) width = std::min(width, kPi / dist);
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
  return RadialGrid::gauss_legendre_panels(lo, hi, panels, order);
}

MomentumGridPtr momentum_grid_for(const GaussianRecipe& recipe, const Vec3& detector) {
  RadialGrid radial = radial_grid_for(recipe, detector);
  const double kmax = radial.k_max();
  const double pw = kmax * (norm(detector - recipe.x0) + norm(recipe.x0));
  const double conc = kmax * norm(recipe.k0) / (recipe.sigma * recipe.sigma);
  return make_momentum_grid(std::move(radial), AngularQuadrature::build(angular_order_for(pw, conc)));
}

WavePacket::WavePacket(MomentumGridPtr grid, Mass mass, std::vector<Complex> values, bool improper,
                       std::optional<GaussianRecipe> recipe)
    : grid_(std::move(grid)), mass_(mass), values_(std::move(values)), improper_(improper), recipe_(recipe) {
  if (!grid_) throw std::invalid_argument("WavePacket: null grid");
  if (values_.size() != grid_->size()) throw GridError("WavePacket: value count does not match grid");
}

WavePacket WavePacket::scaled(Complex alpha) const {
  std::vector<Complex> v(values_);
  for (auto& x : v) x *= alpha;
  return WavePacket(grid_, mass_, std::move(v), improper_, std::nullopt);
}

WavePacket WavePacket::plus(const WavePacket& other) const {
  require_same_grid(*this, other);
  std::vector<Complex> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
  return WavePacket(grid_, mass_, std::move(v), improper_ || other.improper_, std::nullopt);
}

WavePacket WavePacket::normalized() const {
  const double n2 = kg_norm2(*this);
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw std::domain_error("WavePacket::normalized: zero or infinite norm");
  WavePacket out = scaled(1.0 / std::sqrt(n2));
  out.recipe_ = recipe_;
  return out;
}

RadialPacket RadialPacket::with_values(std::vector<Complex> v) const {
  if (v.size() != grid.size()) throw GridError("RadialPacket: value count does not match grid");
  return RadialPacket{grid, std::move(v), detector, mass};
}

Complex kg_inner(const WavePacket& phi, const WavePacket& psi) {
  require_same_grid(phi, psi);
  const auto& g = phi.grid();
  const std::size_t na = g.angular.size();
  const double m = phi.mass().value();
  std::vector<Complex> shells(g.radial.size());
  parallel_for(g.radial.size(), [&](std::size_t ir) {
    CompensatedSum<Complex> s;
    const std::size_t off = ir * na;
    for (std::size_t ia = 0; ia < na; ++ia)
      s.add(g.angular.weights[ia] * std::conj(phi.values()[off + ia]) * psi.values()[off + ia]);
    const double k = g.radial.node(ir);
    shells[ir] = s.value() * (g.radial.weight(ir) * k * k / (2.0 * std::hypot(k, m)));
  });
  CompensatedSum<Complex> total;
  for (const auto& s : shells) total.add(s);
  return total.value();
}

double kg_norm2(const WavePacket& phi) { return kg_inner(phi, phi).real(); }

Complex kg_inner(const RadialPacket& phi, const RadialPacket& psi) {
  if (!phi.grid.same_as(psi.grid)) throw GridError("kg_inner: radial packets live on different grids");
  if (phi.mass.value() != psi.mass.value()) throw GridError("kg_inner: radial packets have different masses");
  if (!(phi.detector.position == psi.detector.position))
    throw GridError("kg_inner: radial packets belong to different detectors");
  const double m = phi.mass.value();
  CompensatedSum<Complex> s;
  for (std::size_t i = 0; i < phi.grid.size(); ++i) {
    const double k = phi.grid.node(i);
    s.add(phi.grid.weight(i) * k * k / (2.0 * std::hypot(k, m)) * std::conj(phi.values[i]) * psi.values[i]);
  }
  return kFourPi * s.value();
}

double kg_norm2(const RadialPacket& phi) { return kg_inner(phi, phi).real(); }

WavePacket gaussian_packet(const GaussianRecipe& recipe, Mass m, MomentumGridPtr grid) {
  if (!(recipe.sigma > 0.0) || !std::isfinite(recipe.sigma))
    throw std::invalid_argument("gaussian_packet: sigma must be > 0");
  if (!is_finite(recipe.k0) || !is_finite(recipe.x0))
    throw std::invalid_argument("gaussian_packet: k0 and x0 must be finite");
  const auto& g = *grid;
  const std::size_t na = g.angular.size();
  std::vector<Complex> values(g.size());
  const double inv4s2 = 1.0 / (4.0 * recipe.sigma * recipe.sigma);
  parallel_for(g.radial.size(), [&](std::size_t ir) {
    for (std::size_t ia = 0; ia < na; ++ia) {
      const Vec3 k = g.momentum(ir, ia);
      const Vec3 d = k - recipe.k0;
      const double ph = -dot(k, recipe.x0);
      values[ir * na + ia] = std::exp(-dot(d, d) * inv4s2) * Complex(std::cos(ph), std::sin(ph));
    }
  });
  WavePacket raw(grid, m, std::move(values), false, recipe);
  return raw.normalized();
}

double gaussian_norm2_radial(const GaussianRecipe& recipe, Mass m, const RadialGrid& grid) {
  const double s2 = recipe.sigma * recipe.sigma;
  const double k0 = norm(recipe.k0);
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = grid.node(i);
    const double x = 2.0 * k * k0 / s2;
    const double shell = x > 1e-12 ? -std::expm1(-x) / x : 1.0 - 0.5 * x;
    const double d = k - k0;
    s.add(grid.weight(i) * k * k / (2.0 * std::hypot(k, m.value())) * std::exp(-d * d / (2.0 * s2)) * shell);
  }
  return kFourPi * s.value();
}

Vec3 mean_momentum(const WavePacket& packet) {
  const auto& g = packet.grid();
  const std::size_t na = g.angular.size();
  const double m = packet.mass().value();
  CompensatedSum<double> sx, sy, sz, sn;
  for (std::size_t ir = 0; ir < g.radial.size(); ++ir) {
    const double k = g.radial.node(ir);
    const double wr = g.radial.weight(ir) * k * k / (2.0 * std::hypot(k, m));
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double w = wr * g.angular.weights[ia] * std::norm(packet.value(ir, ia));
      const Vec3 kv = g.momentum(ir, ia);
      sx.add(w * kv.x);
      sy.add(w * kv.y);
      sz.add(w * kv.z);
      sn.add(w);
    }
  }
  const double n = sn.value();
  return {sx.value() / n, sy.value() / n, sz.value() / n};
}

WavePacket newton_wigner_state(const Vec3& x, Mass m, MomentumGridPtr grid) {
  const auto& g = *grid;
  const std::size_t na = g.angular.size();
  std::vector<Complex> values(g.size());
  for (std::size_t ir = 0; ir < g.radial.size(); ++ir) {
    const double amp = kNormInvCube * std::sqrt(2.0 * std::hypot(g.radial.node(ir), m.value()));
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double ph = -dot(g.momentum(ir, ia), x);
      values[ir * na + ia] = amp * Complex(std::cos(ph), std::sin(ph));
    }
  }
  return WavePacket(std::move(grid), m, std::move(values), true);
}

Complex position_amplitude(const WavePacket& packet, const Vec3& x) {
  const auto& g = packet.grid();
  const std::size_t na = g.angular.size();
  const double m = packet.mass().value();
  CompensatedSum<Complex> total;
  for (std::size_t ir = 0; ir < g.radial.size(); ++ir) {
    const double k = g.radial.node(ir);
    const double w = std::hypot(k, m);
    CompensatedSum<Complex> shell;
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double ph = dot(g.momentum(ir, ia), x);
      shell.add(g.angular.weights[ia] * Complex(std::cos(ph), std::sin(ph)) * packet.value(ir, ia));
    }
    total.add(shell.value() * (g.radial.weight(ir) * k * k / (2.0 * w) * std::sqrt(2.0 * w)));
  }
  return kNormInvCube * total.value();
}

RadialPacket detected_projection(const WavePacket& packet, const Detector& det) {
  const auto& g = packet.grid();
  const std::size_t na = g.angular.size();
  std::vector<Complex> radial(g.radial.size());
  parallel_for(g.radial.size(), [&](std::size_t ir) {
    CompensatedSum<Complex> s;
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double ph = dot(g.momentum(ir, ia), det.position);
      s.add(g.angular.weights[ia] * Complex(std::cos(ph), std::sin(ph)) * packet.value(ir, ia));
    }
    radial[ir] = s.value() / kFourPi;
  });
  return RadialPacket{g.radial, std::move(radial), det, packet.mass()};
}

RadialPacket detected_projection_gaussian(const GaussianRecipe& recipe, Mass m, const Detector& det,
                                          const RadialGrid& grid) {
  const double n2 = gaussian_norm2_radial(recipe, m, grid);
  if (!(n2 > 0.0)) throw std::domain_error("detected_projection_gaussian: vanishing norm on the radial grid");
  const double amp = 1.0 / std::sqrt(n2);
  const double s2 = recipe.sigma * recipe.sigma;
  const Vec3 re = recipe.k0 * (1.0 / (2.0 * s2));
  const Vec3 im = det.position - recipe.x0;
  // b.b for the complex vector b = k0/(2 sigma^2) + i (X - x0).
  const Complex bb(dot(re, re) - dot(im, im), 2.0 * dot(re, im));
  const Complex root = std::sqrt(bb);
  const double k0sq = dot(recipe.k0, recipe.k0);
  std::vector<Complex> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = grid.node(i);
    values[i] = amp * exp_sinhc(-(k * k + k0sq) / (4.0 * s2), k * root);
  }
  return RadialPacket{grid, std::move(values), det, m};
}

WavePacket lift(const RadialPacket& radial, MomentumGridPtr grid) {
  if (!grid->radial.same_as(radial.grid)) throw GridError("lift: radial grid mismatch");
  const auto& g = *grid;
  const std::size_t na = g.angular.size();
  std::vector<Complex> values(g.size());
  for (std::size_t ir = 0; ir < g.radial.size(); ++ir)
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double ph = -dot(g.momentum(ir, ia), radial.detector.position);
      values[ir * na + ia] = radial.values[ir] * Complex(std::cos(ph), std::sin(ph));
    }
  return WavePacket(std::move(grid), radial.mass, std::move(values));
}

WavePacket subspace_element(const DetectorProfile& profile, const Detector& det, Mass m, MomentumGridPtr grid) {
  const auto& g = *grid;
  std::vector<Complex> radial(g.radial.size());
  for (std::size_t ir = 0; ir < g.radial.size(); ++ir) radial[ir] = profile(g.radial.node(ir), det.position);
  return lift(RadialPacket{g.radial, std::move(radial), det, m}, std::move(grid));
}

double membership_residual(const WavePacket& packet, const Detector& det) {
  const double n2 = kg_norm2(packet);
  if (std::abs(n2 - 1.0) > 1e-8) throw std::invalid_argument("membership_residual: packet is not normalized");
  return 1.0 - kg_norm2(detected_projection(packet, det));
}

}  // namespace toa
