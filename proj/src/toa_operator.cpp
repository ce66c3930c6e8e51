#include "toa/toa_operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fft.hpp"

namespace toa {

namespace {

// First-derivative weights at z of the Lagrange interpolant through nodes x.
std::vector<double> derivative_weights(double z, const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double term = 1.0 / (x[i] - x[j]);
      for (std::size_t l = 0; l < n; ++l)
        if (l != i && l != j) term *= (z - x[l]) / (x[i] - x[l]);
      w[i] += term;
    }
  return w;
}

// Derivative on a uniform grid of spacing h with (width)-point stencils,
// centered in the interior and one-sided near the ends.
std::vector<Complex> fd_uniform(std::span<const Complex> v, double h, std::size_t width) {
  const std::size_t n = v.size();
  if (n < width) throw GridError("differentiate: grid has fewer nodes than the stencil width");
  std::vector<double> offsets(width);
  for (std::size_t i = 0; i < width; ++i) offsets[i] = static_cast<double>(i);
  std::vector<std::vector<double>> table(width);
  for (std::size_t p = 0; p < width; ++p) table[p] = derivative_weights(static_cast<double>(p), offsets);
  std::vector<Complex> out(n);
  const std::size_t half = width / 2;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t start = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(half),
                                                         0, static_cast<std::ptrdiff_t>(n - width));
    const auto& w = table[j - start];
    Complex acc = 0.0;
    for (std::size_t i = 0; i < width; ++i) acc += w[i] * v[start + i];
    out[j] = acc / h;
  }
  return out;
}

double max_abs(std::span<const Complex> v, std::size_t lo, std::size_t hi) {
  double m = 0.0;
  for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

bool decayed_at_edges(std::span<const Complex> v) {
  const double peak = max_abs(v, 0, v.size());
  if (peak == 0.0) return true;
  const std::size_t n = v.size();
  const double edge = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[n - 2]), std::abs(v[n - 1])});
  return edge <= 1e-8 * peak;
}

std::vector<Complex> spectral_uniform(std::span<const Complex> v, double h) {
  const std::size_t n = v.size();
  std::vector<Complex> c(v.begin(), v.end());
  detail::fft_inplace(c, FFTW_FORWARD);
  const double peak = max_abs(c, 0, n);
  double tail = 0.0;
  const double base = kTwoPi / (static_cast<double>(n) * h);
  for (std::size_t j = 0; j < n; ++j) {
    const std::ptrdiff_t q = j <= n / 2 ? static_cast<std::ptrdiff_t>(j) : static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(n);
    if (std::abs(q) > static_cast<std::ptrdiff_t>(3 * n / 8)) tail = std::max(tail, std::abs(c[j]));
    if (n % 2 == 0 && j == n / 2)
      c[j] = 0.0;
    else
      c[j] *= Complex(0.0, base * static_cast<double>(q)) / static_cast<double>(n);
  }
  if (peak > 0.0 && tail > 1e-9 * peak)
    throw GridError("differentiate: spectrum not decayed in the top quarter of modes; Z spacing too coarse");
  detail::fft_inplace(c, FFTW_BACKWARD);
  return c;
}

std::vector<Complex> fd8_checked(std::span<const Complex> v, double h) {
  auto d8 = fd_uniform(v, h, 9);
  const auto d6 = fd_uniform(v, h, 7);
  const auto [lo, hi] = interior_range(v.size());
  double diff = 0.0;
  for (std::size_t i = lo; i < hi; ++i) diff = std::max(diff, std::abs(d8[i] - d6[i]));
  const double ref = std::max(max_abs(d8, lo, hi), max_abs(v, lo, hi) / (h * static_cast<double>(v.size())));
  if (ref > 0.0 && diff > 1e-3 * ref)
    throw GridError("differentiate: 8th- and 6th-order stencils disagree; grid too coarse for the data");
  return d8;
}

std::vector<Complex> panel_derivative(const RadialGrid& grid, std::span<const Complex> v) {
  const int order = grid.order();
  const auto& rule = gauss_legendre(order);
  const auto& breaks = grid.breaks();
  std::vector<Complex> out(v.size());
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double scale = 2.0 / (breaks[p + 1] - breaks[p]);
    const std::size_t off = p * static_cast<std::size_t>(order);
    for (int i = 0; i < order; ++i) {
      Complex acc = 0.0;
      for (int j = 0; j < order; ++j) {
        if (j == i) continue;
        const double dij = rule.barycentric[j] / rule.barycentric[i] / (rule.nodes[i] - rule.nodes[j]);
        acc += dij * (v[off + j] - v[off + i]);
      }
      out[off + i] = acc * scale;
    }
  }
  return out;
}

// Weight w(k) with Q0 = -i (omega f_op / w) d/dk w.
struct OperatorFactors {
  std::vector<double> w;
  std::vector<double> pref;  // omega * f_op / w
};

OperatorFactors factors(const RadialPacket& psi, OrderingExponent n, bool regularized) {
  const double m = psi.mass.value();
  const RegularizationCut cut = psi.detector.cut;
  const std::size_t size = psi.grid.size();
  OperatorFactors out{std::vector<double>(size), std::vector<double>(size)};
  for (std::size_t i = 0; i < size; ++i) {
    const double k = psi.grid.node(i);
    const double f = regularized ? f_reg(k, cut) : 1.0 / k;
    const double w = std::pow(k, n.value() + 0.5) * std::sqrt(f);
    out.w[i] = w;
    out.pref[i] = std::hypot(k, m) * f / w;
  }
  return out;
}

void check_zmap(const RadialGrid& grid, double m, double eps) {
  if (grid.scheme() != RadialScheme::UniformZ) return;
  const auto& z = grid.zmap();
  if (z->mass() != m || z->epsilon() != eps)
    throw GridError("Q0: uniform-Z grid was built for a different mass or cut than the packet");
}

}  // namespace

std::pair<std::size_t, std::size_t> interior_range(std::size_t n) {
  const std::size_t skip = n / 10;
  return {skip, n - skip};
}

std::vector<Complex> differentiate(const RadialGrid& grid, std::span<const Complex> values, DerivativeScheme scheme) {
  if (values.size() != grid.size()) throw GridError("differentiate: value count does not match grid");
  switch (grid.scheme()) {
    case RadialScheme::GaussLegendrePanels:
      return panel_derivative(grid, values);
    case RadialScheme::UniformK:
      if (scheme == DerivativeScheme::SpectralZ)
        throw GridError("differentiate: spectral differentiation needs a uniform-Z grid");
      return fd8_checked(values, grid.spacing());
    case RadialScheme::UniformZ:
      if (scheme == DerivativeScheme::FiniteDifference8) return fd8_checked(values, grid.spacing());
      if (!decayed_at_edges(values)) {
        if (scheme == DerivativeScheme::SpectralZ)
          throw GridError("differentiate: data not decayed at the Z-window edges; spectral derivative would wrap");
        return fd8_checked(values, grid.spacing());
      }
      return spectral_uniform(values, grid.spacing());
  }
  return {};
}

std::vector<Complex> differentiate_k(const RadialGrid& grid, std::span<const Complex> values, DerivativeScheme scheme) {
  auto d = differentiate(grid, values, scheme);
  if (grid.scheme() == RadialScheme::UniformZ) {
    const auto& z = *grid.zmap();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= z.dz_dk(grid.node(i));
  }
  return d;
}

RadialPacket apply_q0_radial(const RadialPacket& psi, OrderingExponent n, bool regularized, DerivativeScheme scheme) {
  check_zmap(psi.grid, psi.mass.value(), psi.detector.cut.epsilon());
  const auto fac = factors(psi, n, regularized);
  const std::size_t size = psi.grid.size();
  std::vector<Complex> u(size);
  for (std::size_t i = 0; i < size; ++i) u[i] = fac.w[i] * psi.values[i];
  std::vector<Complex> out;
  if (regularized && psi.grid.scheme() == RadialScheme::UniformZ) {
    // On a uniform-Z grid omega f cancels against dk/dZ.
    out = differentiate(psi.grid, u, scheme);
    for (std::size_t i = 0; i < size; ++i) out[i] *= Complex(0.0, -1.0) / fac.w[i];
  } else {
    out = differentiate_k(psi.grid, u, scheme);
    for (std::size_t i = 0; i < size; ++i) out[i] *= Complex(0.0, -fac.pref[i]);
  }
  return psi.with_values(std::move(out));
}

RadialPacket apply_q0_ordered(const RadialPacket& psi, OrderingExponent n, DerivativeScheme scheme) {
  check_zmap(psi.grid, psi.mass.value(), psi.detector.cut.epsilon());
  const double m = psi.mass.value();
  const std::size_t size = psi.grid.size();
  std::vector<Complex> u(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double k = psi.grid.node(i);
    u[i] = std::pow(k, n.value()) * std::sqrt(std::hypot(k, m)) * psi.values[i];
  }
  const auto du = differentiate_k(psi.grid, u, scheme);
  std::vector<Complex> out(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double k = psi.grid.node(i);
    const double w = std::hypot(k, m);
    const Complex inner = Complex(0.0, -1.0) * du[i] + Complex(0.0, k / (2.0 * w * w)) * u[i];
    out[i] = std::sqrt(w) * std::pow(k, -n.value() - 1.0) * inner;
  }
  return psi.with_values(std::move(out));
}

double hermiticity_defect(OrderingExponent n, const RadialPacket& phi, const RadialPacket& psi, bool regularized,
                          DerivativeScheme scheme) {
  const RadialPacket qphi = apply_q0_radial(phi, n, regularized, scheme);
  const RadialPacket qpsi = apply_q0_radial(psi, n, regularized, scheme);
  const double nphi = std::sqrt(kg_norm2(phi));
  const double npsi = std::sqrt(kg_norm2(psi));
  if (!(nphi > 0.0) || !(npsi > 0.0)) throw std::invalid_argument("hermiticity_defect: zero test function");
  const double scale = 0.5 * (std::sqrt(kg_norm2(qphi)) / nphi + std::sqrt(kg_norm2(qpsi)) / npsi);
  if (!(scale > 0.0)) throw std::invalid_argument("hermiticity_defect: test functions are annihilated by Q0");
  const Complex d = kg_inner(phi, qpsi) - kg_inner(qphi, psi);
  return std::abs(d) / (nphi * npsi * scale);
}

double commutator_z_check(const RadialPacket& psi, DerivativeScheme scheme) {
  const OrderingExponent half{0.5};
  const std::size_t size = psi.grid.size();
  std::vector<double> z(size);
  if (psi.grid.scheme() == RadialScheme::UniformZ) {
    check_zmap(psi.grid, psi.mass.value(), psi.detector.cut.epsilon());
    std::copy(psi.grid.z_nodes().begin(), psi.grid.z_nodes().end(), z.begin());
  } else {
    const ZMap zmap(psi.mass, psi.detector.cut);
    for (std::size_t i = 0; i < size; ++i) z[i] = zmap.z_of_k(psi.grid.node(i));
  }
  std::vector<Complex> zpsi(size);
  for (std::size_t i = 0; i < size; ++i) zpsi[i] = z[i] * psi.values[i];
  const RadialPacket a = apply_q0_radial(psi.with_values(std::move(zpsi)), half, true, scheme);
  const RadialPacket b = apply_q0_radial(psi, half, true, scheme);
  const double ref = max_abs(psi.values, 0, size);
  if (!(ref > 0.0)) throw std::invalid_argument("commutator_z_check: zero test function");
  const auto [lo, hi] = interior_range(size);
  double worst = 0.0;
  for (std::size_t i = lo; i < hi; ++i)
    worst = std::max(worst, std::abs(a.values[i] - z[i] * b.values[i] + Complex(0.0, 1.0) * psi.values[i]));
  return worst / ref;
}

Complex ToAEigenfunction::operator()(double k) const {
  if (!(k > 0.0)) throw std::domain_error("ToAEigenfunction: k must be > 0");
  if (regularized) {
    const ZMap zmap(mass, detector.cut);
    const double ph = zmap.z_of_k(k) * T;
    const double w = std::pow(k, n.value() + 0.5) * std::sqrt(zmap.f(k));
    return Complex(std::cos(ph), std::sin(ph)) / (kTwoPi * w);
  }
  const double ph = std::hypot(k, mass.value()) * T;
  return Complex(std::cos(ph), std::sin(ph)) / (kTwoPi * std::pow(k, n.value()));
}

RadialPacket ToAEigenfunction::sample(const RadialGrid& grid) const {
  std::vector<Complex> v(grid.size());
  const bool exact_z = regularized && grid.scheme() == RadialScheme::UniformZ &&
                       grid.zmap()->mass() == mass.value() && grid.zmap()->epsilon() == detector.cut.epsilon();
  if (exact_z) {
    const ZMap& zmap = *grid.zmap();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double k = grid.node(i);
      const double ph = grid.z_nodes()[i] * T;
      const double w = std::pow(k, n.value() + 0.5) * std::sqrt(zmap.f(k));
      v[i] = Complex(std::cos(ph), std::sin(ph)) / (kTwoPi * w);
    }
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = (*this)(grid.node(i));
  }
  return RadialPacket{grid, std::move(v), detector, mass};
}

RadialPacket eigenfunction_raw(double T, const Detector& det, OrderingExponent n, Mass m, const RadialGrid& grid) {
  if (!std::isfinite(T)) throw std::invalid_argument("eigenfunction_raw: T must be finite");
  return ToAEigenfunction{T, det, n, false, m}.sample(grid);
}

RadialPacket eigenfunction_reg(double T, const Detector& det, Mass m, const RadialGrid& grid, OrderingExponent n) {
  if (!std::isfinite(T)) throw std::invalid_argument("eigenfunction_reg: T must be finite");
  return ToAEigenfunction{T, det, n, true, m}.sample(grid);
}

MomentumLine q0_1d_apply(const MomentumLine& psi, double X, DerivativeScheme scheme) {
  if (psi.values.size() != psi.grid.size()) throw GridError("q0_1d_apply: value count does not match grid");
  const double m = psi.mass.value();
  const std::size_t size = psi.grid.size();
  std::vector<Complex> v(size);
  std::vector<double> root(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double k = psi.grid.node(i);
    root[i] = std::sqrt(std::hypot(k, m) / k);
    v[i] = root[i] * Complex(std::cos(k * X), std::sin(k * X)) * psi.values[i];
  }
  const auto dv = differentiate_k(psi.grid, v, scheme);
  std::vector<Complex> out(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double k = psi.grid.node(i);
    const double w = std::hypot(k, m);
    const Complex inner = Complex(0.0, -1.0) * dv[i] + Complex(0.0, k / (2.0 * w * w)) * v[i];
    out[i] = Complex(std::cos(k * X), -std::sin(k * X)) * root[i] * inner;
  }
  return MomentumLine{psi.grid, std::move(out), psi.mass};
}

MomentumLine eigenfunction_1d(double T, double X, Mass m, const RadialGrid& grid) {
  std::vector<Complex> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = grid.node(i);
    const double ph = std::hypot(k, m.value()) * T - k * X;
    v[i] = kAlpha1d * std::sqrt(k) * Complex(std::cos(ph), std::sin(ph));
  }
  return MomentumLine{grid, std::move(v), m};
}

double nr_limit_compare(double T, double X, Mass m, double kmax, std::size_t samples) {
  const double mass = m.value();
  if (!(mass > 0.0)) throw RegimeError("nr_limit_compare: the non-relativistic limit needs m > 0");
  if (!(kmax > 0.0) || !(kmax < 0.5 * mass))
    throw RegimeError("nr_limit_compare: need 0 < kmax < m/2 for the non-relativistic regime");
  if (!std::isfinite(T) || !std::isfinite(X)) throw std::invalid_argument("nr_limit_compare: T and X must be finite");
  if (samples < 2) throw std::invalid_argument("nr_limit_compare: need at least two samples");
  // Both profiles share alpha sqrt(k) exp(-ikX), so X drops out and only the
  // energy phases differ. omega - m is formed as k^2/(omega + m).
  double worst = 0.0;
  for (std::size_t i = 1; i <= samples; ++i) {
    const double k = kmax * static_cast<double>(i) / static_cast<double>(samples);
    const double rel = k * k / (std::hypot(k, mass) + mass) * T;
    const double nr = k * k / (2.0 * mass) * T;
    worst = std::max(worst, 2.0 * std::abs(std::sin(0.5 * (rel - nr))));
  }
  return worst;
}

}  // namespace toa
