#include <cmath>
#include <vector>

#include "doctest.h"
#include "toa/hilbert.hpp"
#include "toa/quadrature.hpp"

using namespace toa;

TEST_CASE("compensated sum recovers cancelled terms") {
  CompensatedSum<double> s;
  for (double x : {1.0, 1e100, 1.0, -1e100}) s.add(x);
  CHECK(s.value() == 2.0);
}

TEST_CASE("Gauss-Legendre exactness") {
  for (int n : {1, 2, 5, 16, 40}) {
    const auto& r = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    for (int p = 0; p < 2 * n; ++p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(std::abs(s - exact) <= 1e-13);
    }
  }
}

TEST_CASE("panel grid integrates and interpolates polynomials") {
  const RadialGrid g = RadialGrid::gauss_legendre_panels(0.5, 3.5, 3, 8);
  double s = 0.0;
  std::vector<Complex> v;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k = g.node(i);
    s += g.weight(i) * k * k * k;
    v.emplace_back(k * k - 2.0 * k, k);
  }
  CHECK(s == doctest::Approx((std::pow(3.5, 4) - std::pow(0.5, 4)) / 4.0).epsilon(1e-14));
  for (double k : {0.6, 1.5, 2.1234, 3.4}) {
    const Complex x = g.interpolate(v, k);
    CHECK(std::abs(x - Complex(k * k - 2.0 * k, k)) <= 1e-12);
  }
  CHECK(g.interpolate(v, 4.0) == Complex(0.0));
}

TEST_CASE("uniform-Z grid integrates a decayed profile") {
  const ZMap zmap(Mass(1.0), RegularizationCut(0.1));
  const RadialGrid g = RadialGrid::uniform_z(zmap, 0.5, 15.5 / 1024.0, 1024);
  // int dk g(k) with g(k(Z)) exp(-(Z-8)^2) / (omega f), whose Z integral is sqrt(pi).
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k = g.node(i);
    const double z = g.z_nodes()[i];
    s += g.weight(i) * std::exp(-(z - 8.0) * (z - 8.0)) / (zmap.omega(k) * zmap.f(k));
  }
  CHECK(s == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
}

TEST_CASE("angular rule on the sphere") {
  const AngularQuadrature a = AngularQuadrature::build(10);
  double w = 0.0, zz = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec3& d = a.directions[i];
    w += a.weights[i];
    zz += a.weights[i] * d.z * d.z;
    xy += a.weights[i] * d.x * d.y;
    CHECK(norm(d) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(w == doctest::Approx(kFourPi).epsilon(1e-14));
  CHECK(zz == doctest::Approx(kFourPi / 3.0).epsilon(1e-14));
  CHECK(std::abs(xy) <= 1e-14);
}

TEST_CASE("angular rule integrates plane waves at the chosen order") {
  // int dOmega exp(i kd cos) = 4 pi sin(kd)/kd.
  for (double kd : {1.0, 10.0, 60.0}) {
    const AngularQuadrature a = AngularQuadrature::build(angular_order_for(kd));
    const Vec3 d{0.3, -0.4, std::sqrt(1.0 - 0.25)};
    Complex s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.weights[i] * std::polar(1.0, kd * dot(a.directions[i], d));
    CHECK(std::abs(s - kFourPi * std::sin(kd) / kd) <= 1e-12);
  }
}

TEST_CASE("oscillatory integration against closed forms") {
  const double w = 50.0;
  OscillatoryIntegrand f{[](double x) { return Complex(x, 0.0); }, [&](double x) { return w * x; },
                         [&](double) { return w; }};
  const double b = 10.0;
  // int_0^b x e^{iwx} dx = e^{iwb}(b/(iw) + 1/w^2) - 1/w^2
  const Complex I(0.0, 1.0);
  const Complex exact = std::exp(I * w * b) * (b / (I * w) + 1.0 / (w * w)) - 1.0 / (w * w);
  const Complex got = integrate_oscillatory(f, 0.0, b, {}, 1.0);
  CHECK(std::abs(got - exact) <= 1e-12);

  // A kink honoured through a break point: int_{-1}^{1} |x| e^{ix} dx = 2(cos 1 + sin 1 - 1).
  OscillatoryIntegrand g{[](double x) { return Complex(std::abs(x), 0.0); }, [](double x) { return x; },
                         [](double) { return 1.0; }};
  const double brk[] = {0.0};
  CHECK(std::abs(integrate_oscillatory(g, -1.0, 1.0, brk, 2.0) - 2.0 * (std::cos(1.0) + std::sin(1.0) - 1.0)) <=
        1e-14);
}
