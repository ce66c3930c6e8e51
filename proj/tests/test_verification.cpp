#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "toa/verification.hpp"

using namespace toa;

namespace {

// Closed-form antiderivative: (e^{i Z+ D} - e^{i Z- D}) / (2 pi i D), D = T' - T.
Complex kernel_antiderivative(double T, double Tp, double zl, double zh) {
  const double d = Tp - T;
  if (d == 0.0) return (zh - zl) / kTwoPi;
  return (std::polar(1.0, zh * d) - std::polar(1.0, zl * d)) / (Complex(0.0, kTwoPi * d));
}

}  // namespace

TEST_CASE("truncated kernel closed form") {
  for (double d : {0.0, 1e-3, 0.3, -2.0, 17.0})
    CHECK(std::abs(truncated_kernel(1.0, 1.0 + d, -0.5, 6.0) - kernel_antiderivative(1.0, 1.0 + d, -0.5, 6.0)) <= 1e-12);
}

TEST_CASE("orthogonality kernel: diagonal and full-period zeros") {
  const Detector det({}, RegularizationCut(0.1));
  const Mass m(1.0);
  const double zl = -2.0, zh = 2.0;
  const KernelReport diag = orthogonality_kernel(std::vector<std::pair<double, double>>{{1.5, 1.5}}, det, m, zl, zh);
  CHECK(std::abs(diag.samples[0].numeric - (zh - zl) / kTwoPi) <= 1e-9);
  // Delta (Z+ - Z-) = 2 pi j on a symmetric window.
  std::vector<std::pair<double, double>> zeros;
  for (int j = 1; j <= 4; ++j) zeros.emplace_back(0.0, kTwoPi * j / (zh - zl));
  for (const auto& s : orthogonality_kernel(zeros, det, m, zl, zh).samples) CHECK(std::abs(s.numeric) <= 1e-8);
}

TEST_CASE("orthogonality kernel on random pairs for several (m, eps)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(-10.0, 10.0);
  struct Setting {
    double m, eps, zl, zh;
  };
  for (const Setting& s : {Setting{1.0, 0.1, -1.0, 20.0}, Setting{0.0, 0.05, -3.0, 8.0}, Setting{3.0, 0.5, -0.5, 5.0}}) {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 100; ++i) {
      const double a = t(rng);
      pairs.emplace_back(a, t(rng));
    }
    const KernelReport r = orthogonality_kernel(pairs, Detector({}, RegularizationCut(s.eps)), Mass(s.m), s.zl, s.zh);
    double worst = 0.0;
    for (const auto& x : r.samples) {
      worst = std::max(worst, std::abs(x.numeric - kernel_antiderivative(x.T, x.T_prime, s.zl, s.zh)));
      REQUIRE(std::abs(x.numeric - x.analytic) <= r.max_deviation);
    }
    CAPTURE(s.m);
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("kernel peak grows linearly with the Z window") {
  const Mass m(1.0);
  const RegularizationCut cut(0.1);
  std::vector<double> w, p;
  for (double width : {2.0, 4.0, 8.0, 16.0}) {
    w.push_back(width);
    p.push_back(eigenfunction_overlap(0.0, 0.0, m, cut, -1.0, -1.0 + width).real());
  }
  CHECK(loglog_slope(w, p) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("completeness on the detected subspace") {
  const Detector det({0, 0, 2.0}, RegularizationCut(0.1));
  const Mass m(1.0);
  const RadialPacket psi = gaussian_in_z_packet(4.0, 0.25, det, m);
  CHECK(kg_norm2(psi) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> err;
  for (double half : {3.75, 7.5, 15.0}) {
    const ReconstructionReport r = completeness_reconstruct(psi, TimeGrid::window(-half, half, 1 << 14));
    err.push_back(r.relative_error);
    CHECK(r.relative_error >= 0.0);
  }
  CHECK(err[2] <= 1e-4);
  CHECK(err[1] <= 1.1 * err[0]);
  CHECK(err[2] <= 1.1 * err[1]);
}

TEST_CASE("completeness reconstructs only the detected projection") {
  // A Gaussian carries components of every l about the detector; the
  // reconstruction reproduces the projection, not the packet.
  const GaussianRecipe r{{0.3, 0.0, 2.0}, 0.2, {}};
  const Detector det({0.5, 0.0, 3.0}, RegularizationCut(1e-3));
  const Mass m(1.0);
  const WavePacket p = gaussian_packet(r, m, momentum_grid_for(r, det.position));
  const ReconstructionReport rep = completeness_reconstruct(p, det, TimeGrid::window(-40.0, 80.0, 1 << 14));
  CHECK(rep.window_sufficient);
  CHECK(rep.relative_error <= 1e-4);
  CHECK(kg_norm2(rep.reconstructed) <= kg_norm2(p) * (1.0 - membership_residual(p, det)) * (1.0 + 1e-4));
}

TEST_CASE("ordering sweep minimum at n = 1/2") {
  const Mass m(1.0);
  const Detector det({}, RegularizationCut(0.1));
  const RadialGrid g = RadialGrid::uniform_z(ZMap(m, det.cut), 0.5, 15.5 / 1024.0, 1024);
  auto profile = [&](double c, double s, double q) {
    std::vector<Complex> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double z = g.z_nodes()[i];
      v[i] = std::polar(std::exp(-(z - c) * (z - c) / (4 * s * s)), q * z);
    }
    return RadialPacket{g, v, det, m};
  };
  std::vector<std::pair<RadialPacket, RadialPacket>> pairs{{profile(6.0, 0.5, 2.0), profile(8.0, 0.6, 1.0)},
                                                           {profile(7.0, 0.7, -1.0), profile(9.0, 0.5, 0.5)}};
  const auto rows = ordering_sweep({0.0, 0.25, 0.5, 1.0}, pairs);
  REQUIRE(rows.size() == 4);
  CHECK(rows[2].max_defect <= 1e-8);
  for (std::size_t i : {0u, 1u, 3u}) CHECK(rows[i].max_defect >= 1e4 * rows[2].max_defect);
  for (const auto& row : rows) CHECK(row.defects.size() == 2);

  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  CHECK(csv.str().rfind("n,max_defect,defect_0,defect_1\n", 0) == 0);
}

TEST_CASE("loglog_slope") {
  std::vector<double> x{1.0, 2.0, 5.0, 10.0}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 2.5));
  CHECK(loglog_slope(x, y) == doctest::Approx(2.5).epsilon(1e-13));
  CHECK_THROWS(loglog_slope({1.0}, {1.0}));
  CHECK_THROWS(loglog_slope({1.0, 2.0}, {0.0, 1.0}));
}
