#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "toa/kinematics.hpp"
#include "toa/toa_operator.hpp"

using namespace toa;

namespace {

const Mass kM(1.0);
const RegularizationCut kCut(0.1);
const Detector kDet({0.0, 0.0, 1.0}, kCut);

RadialGrid z_grid(Mass m = kM, RegularizationCut cut = kCut) {
  return RadialGrid::uniform_z(ZMap(m, cut), 0.5, 15.5 / 1024.0, 1024);
}

RadialPacket z_profile(const RadialGrid& g, double c, double s, double freq, double tilt, Mass m = kM,
                       const Detector& det = kDet) {
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double z = g.z_nodes()[i];
    v[i] = std::exp(-(z - c) * (z - c) / (4 * s * s)) * std::polar(1.0 + tilt * z, freq * z);
  }
  return RadialPacket{g, v, det, m};
}

double interior_rel_error(const std::vector<Complex>& got, const std::vector<Complex>& want) {
  const auto [a, b] = interior_range(got.size());
  double err = 0.0;
  for (std::size_t i = a; i < b; ++i) err = std::max(err, std::abs(got[i] - want[i]) / std::abs(want[i]));
  return err;
}

// <phi, Q psi> - <Q phi, psi>.
Complex defect_numerator(double n, const RadialPacket& phi, const RadialPacket& psi) {
  const OrderingExponent ne(n);
  return kg_inner(phi, apply_q0_radial(psi, ne, true)) - kg_inner(apply_q0_radial(phi, ne, true), psi);
}

// Integration-by-parts oracle: <phi, Q psi> - <Q phi, psi> = -2 pi i (2n - 1) int k f conj(phi) psi dk,
// evaluated with the trapezoid rule in Z (dk = omega f dZ) on the decayed profiles.
Complex defect_oracle(double n, const RadialPacket& phi, const RadialPacket& psi) {
  const ZMap zm(phi.mass, phi.detector.cut);
  Complex s = 0.0;
  for (std::size_t i = 0; i < phi.grid.size(); ++i) {
    const double k = phi.grid.node(i);
    s += zm.omega(k) * zm.f(k) * k * zm.f(k) * std::conj(phi.values[i]) * psi.values[i];
  }
  s *= phi.grid.spacing();
  return Complex(0.0, -kTwoPi * (2 * n - 1)) * s;
}

}  // namespace

TEST_CASE("regularized eigenfunctions are eigenvectors") {
  const RadialGrid g = RadialGrid::uniform_z(ZMap(kM, kCut), -1.0, 0.01, 2048);
  for (double T : {-7.0, 0.0, 2.5, 10.0}) {
    const RadialPacket psi = eigenfunction_reg(T, kDet, kM, g);
    const RadialPacket q = apply_q0_radial(psi, OrderingExponent(0.5), true, DerivativeScheme::FiniteDifference8);
    std::vector<Complex> want(psi.values);
    for (auto& w : want) w *= T;
    if (T == 0.0) {
      const auto [a, b] = interior_range(g.size());
      for (std::size_t i = a; i < b; ++i) REQUIRE(std::abs(q.values[i]) <= 1e-8 * std::abs(psi.values[i]));
    } else {
      CHECK(interior_rel_error(q.values, want) <= 1e-6);
    }
  }
}

TEST_CASE("unregularized raw eigenfunctions are eigenvectors") {
  const RadialGrid g = RadialGrid::gauss_legendre_panels(0.2, 4.0, 40, 16);
  for (double n : {0.0, 0.5, 1.0})
    for (double T : {-3.0, 1.5, 6.0}) {
      const RadialPacket psi = eigenfunction_raw(T, kDet, OrderingExponent(n), kM, g);
      const RadialPacket q = apply_q0_radial(psi, OrderingExponent(n), false);
      std::vector<Complex> want(psi.values);
      for (auto& w : want) w *= T;
      CHECK(interior_rel_error(q.values, want) <= 1e-6);
    }
}

TEST_CASE("operator is linear") {
  const RadialGrid g = z_grid();
  const RadialPacket a = z_profile(g, 6.0, 0.5, 2.0, 0.3), b = z_profile(g, 8.5, 0.7, -1.0, 0.0);
  const Complex ca(0.3, -1.2), cb(2.0, 0.5);
  std::vector<Complex> mix(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) mix[i] = ca * a.values[i] + cb * b.values[i];
  const OrderingExponent n(0.5);
  const RadialPacket qm = apply_q0_radial(a.with_values(mix), n, true);
  const RadialPacket qa = apply_q0_radial(a, n, true), qb = apply_q0_radial(b, n, true);
  double peak = 0.0, err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Complex want = ca * qa.values[i] + cb * qb.values[i];
    peak = std::max(peak, std::abs(want));
    err = std::max(err, std::abs(qm.values[i] - want));
  }
  CHECK(err <= 1e-10 * peak);
}

TEST_CASE("Hermiticity defect matches the integration-by-parts residual") {
  const RadialGrid g = z_grid();
  const RadialPacket phi = z_profile(g, 6.0, 0.5, 2.0, 0.3), psi = z_profile(g, 8.0, 0.6, 1.0, -0.1);
  for (double n : {0.0, 0.25, 0.7, 1.0}) {
    const Complex got = defect_numerator(n, phi, psi), want = defect_oracle(n, phi, psi);
    CAPTURE(n);
    CHECK(std::abs(got - want) <= 1e-8 * std::abs(want));
  }
  CHECK(std::abs(defect_numerator(0.5, phi, psi)) <= 1e-10 * std::abs(defect_oracle(0.0, phi, psi)));
}

TEST_CASE("Hermiticity dichotomy on an asymmetric pair") {
  const RadialGrid g = z_grid();
  const RadialPacket phi = z_profile(g, 6.0, 0.5, 2.0, 0.3), psi = z_profile(g, 8.0, 0.6, 1.0, -0.1);
  CHECK(hermiticity_defect(OrderingExponent(0.5), phi, psi, true) <= 1e-8);
  for (double n : {0.0, 0.25, 1.0}) CHECK(hermiticity_defect(OrderingExponent(n), phi, psi, true) >= 1e-3);
}

TEST_CASE("defect of a real function against itself is purely imaginary") {
  const RadialGrid g = z_grid();
  const RadialPacket psi = z_profile(g, 7.0, 0.8, 0.0, 0.2);
  const Complex d = defect_numerator(0.0, psi, psi);
  CHECK(std::abs(d.real()) <= 1e-12 * std::abs(d));
  const Complex e = kg_inner(psi, apply_q0_radial(psi, OrderingExponent(0.0), true));
  CHECK(std::abs(d - Complex(0.0, 2.0 * e.imag())) <= 1e-12 * std::abs(d));
}

TEST_CASE("canonical commutator with Z") {
  const RadialGrid g = z_grid();
  CHECK(commutator_z_check(z_profile(g, 8.0, 0.5, 0.0, 0.0)) <= 1e-6);
  CHECK(commutator_z_check(z_profile(g, 7.0, 0.6, 2.5, 0.4)) <= 1e-6);
  // Windowed constant: flat between Z = 4 and Z = 12.
  std::vector<Complex> flat(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double z = g.z_nodes()[i];
    flat[i] = 0.5 * (std::tanh((z - 4.0) / 0.4) - std::tanh((z - 12.0) / 0.4));
  }
  const RadialPacket c{g, flat, kDet, kM};
  CHECK(commutator_z_check(c) <= 1e-6);
  // The residual is relative, so scaling the input leaves it unchanged.
  std::vector<Complex> scaled(flat);
  for (auto& v : scaled) v *= Complex(0.0, 3.0);
  CHECK(commutator_z_check(c.with_values(scaled)) == doctest::Approx(commutator_z_check(c)).epsilon(1e-6));
}

TEST_CASE("eigenfunction profiles") {
  const RadialGrid g = RadialGrid::gauss_legendre_panels(0.01, 3.0, 8, 16);
  const ZMap zm(kM, kCut);
  const RadialPacket e0 = eigenfunction_reg(0.0, kDet, kM, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k = g.node(i);
    REQUIRE(std::abs(e0.values[i] - 1.0 / (kTwoPi * k * std::sqrt(zm.f(k)))) <= 1e-14 / k);
  }
  // e^{-imT} times the n = 1/2 raw eigenfunction approaches the quadratic-dispersion profile.
  const Mass heavy(100.0);
  const double T = 2.0;
  const RadialPacket raw = eigenfunction_raw(T, kDet, OrderingExponent(0.5), heavy, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k = g.node(i);
    const Complex nr = std::polar(1.0, k * k * T / 200.0) / (kTwoPi * std::sqrt(k));
    const double bound = std::pow(k, 4) * T / (8.0 * 1e6) + 1e-13;
    REQUIRE(std::abs(raw.values[i] * std::polar(1.0, -100.0 * T) - nr) <= bound * std::abs(nr));
  }
}

TEST_CASE("ordered form equals the plain unregularized operator") {
  const RadialGrid g = RadialGrid::gauss_legendre_panels(0.3, 5.0, 30, 16);
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k = g.node(i);
    v[i] = std::exp(-(k - 2.0) * (k - 2.0)) * std::polar(1.0, 1.7 * k);
  }
  const RadialPacket psi{g, v, kDet, kM};
  for (double n : {0.0, 0.5, 1.3}) {
    const RadialPacket a = apply_q0_ordered(psi, OrderingExponent(n));
    const RadialPacket b = apply_q0_radial(psi, OrderingExponent(n), false);
    double peak = 0.0, err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      peak = std::max(peak, std::abs(b.values[i]));
      err = std::max(err, std::abs(a.values[i] - b.values[i]));
    }
    CHECK(err <= 1e-10 * peak);
  }
}

TEST_CASE("one-dimensional operator") {
  const RadialGrid g = RadialGrid::gauss_legendre_panels(0.1, 5.0, 40, 16);
  const Mass m(0.8);
  for (double T : {-2.0, 3.0})
    for (double X : {0.0, 1.5}) {
      const MomentumLine e = eigenfunction_1d(T, X, m, g);
      const MomentumLine q = q0_1d_apply(e, X);
      std::vector<Complex> want(e.values);
      for (auto& w : want) w *= T;
      CHECK(interior_rel_error(q.values, want) <= 1e-6);
    }

  const MomentumLine a = eigenfunction_1d(1.2, 0.7, m, g), b = eigenfunction_1d(1.2, 0.0, m, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    REQUIRE(std::abs(a.values[i] - std::polar(1.0, -g.node(i) * 0.7) * b.values[i]) <= 1e-14);

  // alpha normalizes against omega: int dk/(2 omega) |psi_T|^2 over [k1, k2] = (omega2 - omega1) / (2 pi).
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weight(i) * std::norm(b.values[i]) / (2.0 * omega(g.node(i), m));
  CHECK(s == doctest::Approx((omega(5.0, m) - omega(0.1, m)) / kTwoPi).epsilon(1e-12));

  // Non-relativistic reduction.
  const Mass heavy(100.0);
  const MomentumLine h = eigenfunction_1d(1.0, 0.4, heavy, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k = g.node(i);
    const Complex nr = kAlpha1d * std::sqrt(k) * std::polar(1.0, k * k / 200.0 - 0.4 * k);
    REQUIRE(std::abs(h.values[i] * std::polar(1.0, -100.0) - nr) <= (std::pow(k, 4) / 8e6 + 1e-12) * std::abs(nr));
  }
}

TEST_CASE("non-relativistic deviation") {
  // Oracle: the exact phase difference omega - m - k^2/2m = -k^4 / (2m (omega + m)^2), maximized over k.
  auto oracle = [](double T, double m, double kmax) {
    double worst = 0.0;
    for (int i = 1; i <= 20000; ++i) {
      const double k = kmax * i / 20000.0;
      const double w = std::hypot(k, m);
      const double r = -std::pow(k, 4) / (2.0 * m * (w + m) * (w + m));
      worst = std::max(worst, 2.0 * std::abs(std::sin(r * T / 2.0)));
    }
    return worst;
  };
  const double d = nr_limit_compare(1.0, 0.0, Mass(100.0), 1.0);
  CHECK(d <= 1e-3);
  CHECK(d <= 1.0 / (8.0 * 1e6) * (1.0 + 1e-9));
  CHECK(d == doctest::Approx(oracle(1.0, 100.0, 1.0)).epsilon(1e-8));
  CHECK(nr_limit_compare(3.0, 2.0, Mass(5.0), 1.0) == doctest::Approx(oracle(3.0, 5.0, 1.0)).epsilon(1e-8));
  CHECK(nr_limit_compare(0.0, 1.0, Mass(100.0), 1.0) == 0.0);

  std::vector<double> ks, ds;
  for (double k = 0.1; k <= 1.0 + 1e-12; k *= std::pow(10.0, 0.25)) {
    ks.push_back(k);
    ds.push_back(nr_limit_compare(1.0, 0.0, Mass(100.0), k));
  }
  const double slope = std::log(ds.back() / ds.front()) / std::log(ks.back() / ks.front());
  CHECK(std::abs(slope - 4.0) <= 0.1);

  CHECK_THROWS_AS(nr_limit_compare(1.0, 0.0, Mass(1.0), 0.6), RegimeError);
  CHECK_THROWS_AS(nr_limit_compare(1.0, 0.0, Mass(0.0), 0.1), RegimeError);
}

TEST_CASE("grid and resolution errors") {
  const RadialGrid g = z_grid();
  RadialPacket wrong = z_profile(g, 8.0, 0.5, 0.0, 0.0, Mass(2.0));
  CHECK_THROWS_AS(apply_q0_radial(wrong, OrderingExponent(0.5), true), GridError);
  // Undecayed data cannot be differentiated spectrally.
  const RadialPacket wave = eigenfunction_reg(3.0, kDet, kM, g);
  CHECK_THROWS_AS(apply_q0_radial(wave, OrderingExponent(0.5), true, DerivativeScheme::SpectralZ), GridError);
  // Two samples per period is not resolved by FD8.
  const RadialPacket fast = eigenfunction_reg(0.5 / g.spacing() * kPi, kDet, kM, g);
  CHECK_THROWS_AS(apply_q0_radial(fast, OrderingExponent(0.5), true, DerivativeScheme::FiniteDifference8), GridError);
}
