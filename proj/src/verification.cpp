#include "toa/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "toa/kinematics.hpp"
#include "toa/parallel.hpp"
#include "toa/quadrature.hpp"

namespace toa {

namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string g6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

Complex truncated_kernel(double T, double T_prime, double z_lo, double z_hi) {
  const double delta = T_prime - T;
  const double width = z_hi - z_lo;
  const double x = 0.5 * delta * width;
  const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  const double ph = 0.5 * (z_lo + z_hi) * delta;
  return Complex(std::cos(ph), std::sin(ph)) * (width * sinc / kTwoPi);
}

Complex eigenfunction_overlap(double T, double T_prime, Mass m, RegularizationCut cut, double z_lo, double z_hi) {
  if (!(z_hi > z_lo)) throw std::invalid_argument("eigenfunction_overlap: need z_hi > z_lo");
  const ZMap zmap(m, cut);
  const double eps = cut.epsilon();
  const double delta = T_prime - T;
  // Integrand 4 pi k^2/(2 omega) conj(psi_T) psi_T' dk with psi_T = e^{iZT}/(2 pi k sqrt f),
  // written in u = ln k: exp(iZ delta) k^2 / (2 pi omega k f) du.
  auto jac = [&](double u) {
    const double k = std::exp(u);
    const double w = std::hypot(k, m.value());
    return u < std::log(eps) ? eps * eps / w : k * k / w;
  };
  OscillatoryIntegrand f{
      [&](double u) { return Complex(jac(u) / kTwoPi, 0.0); },
      [&](double u) { return zmap.z_of_log_k(u) * delta; },
      [&](double u) { return jac(u) * delta; },
  };
  const double u_lo = zmap.log_k_of_z(z_lo), u_hi = zmap.log_k_of_z(z_hi);
  const double cuts[] = {std::log(eps)};
  return integrate_oscillatory(f, u_lo, u_hi, cuts, 0.5);
}

KernelReport orthogonality_kernel(const std::vector<std::pair<double, double>>& pairs, const Detector& det, Mass m,
                                  double z_lo, double z_hi) {
  KernelReport rep;
  rep.z_lo = z_lo;
  rep.z_hi = z_hi;
  rep.samples.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto [t, tp] = pairs[i];
    rep.samples[i] = {t, tp, eigenfunction_overlap(t, tp, m, det.cut, z_lo, z_hi), truncated_kernel(t, tp, z_lo, z_hi)};
  });
  for (const auto& s : rep.samples) rep.max_deviation = std::max(rep.max_deviation, std::abs(s.numeric - s.analytic));
  return rep;
}

KernelReport orthogonality_kernel(const std::vector<double>& t_list, const Detector& det, Mass m, double z_lo,
                                  double z_hi) {
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < t_list.size(); ++i)
    for (std::size_t j = i; j < t_list.size(); ++j) pairs.emplace_back(t_list[i], t_list[j]);
  return orthogonality_kernel(pairs, det, m, z_lo, z_hi);
}

ReconstructionReport completeness_reconstruct(const RadialPacket& psi, const TimeGrid& t_window) {
  const ArrivalSpectrum spec = arrival_amplitude_fft(psi, t_window);
  const ZMap zmap(psi.mass, psi.detector.cut);
  const std::size_t nk = psi.grid.size();
  std::vector<Complex> rec(nk);
  parallel_for(nk, [&](std::size_t i) {
    const double k = psi.grid.node(i);
    const double z = zmap.z_of_k(k);
    CompensatedSum<Complex> s;
    for (std::size_t l = 0; l < t_window.n; ++l) {
      const double ph = z * t_window.at(l);
      s.add(Complex(std::cos(ph), std::sin(ph)) * spec.amplitude[l]);
    }
    rec[i] = s.value() * t_window.dt / (kTwoPi * k * std::sqrt(zmap.f(k)));
  });
  ReconstructionReport rep{psi, psi.with_values(rec), 0.0, true, spec.diagnostics};
  std::vector<Complex> diff(nk);
  for (std::size_t i = 0; i < nk; ++i) diff[i] = rec[i] - psi.values[i];
  const double n2 = kg_norm2(psi);
  if (!(n2 > 0.0)) throw std::domain_error("completeness_reconstruct: input packet vanishes");
  rep.relative_error = std::sqrt(kg_norm2(psi.with_values(std::move(diff))) / n2);
  rep.window_sufficient = spec.diagnostics.t_edge_ratio <= 1e-8;
  if (!rep.window_sufficient)
    rep.diagnostics.warnings.push_back("T window truncates the arrival amplitude (edge ratio " +
                                       g6(spec.diagnostics.t_edge_ratio) + ")");
  return rep;
}

ReconstructionReport completeness_reconstruct(const WavePacket& packet, const Detector& det, const TimeGrid& t_window) {
  return completeness_reconstruct(detected_projection(packet, det), t_window);
}

RadialPacket gaussian_in_z_packet(double z0, double width, const Detector& det, Mass m, int order) {
  if (!(width > 0.0) || !std::isfinite(z0)) throw std::invalid_argument("gaussian_in_z_packet: need width > 0, finite z0");
  const ZMap zmap(m, det.cut);
  // Below the cut k(Z) is exponential, so a Z step can span decades of k;
  // split steps until no panel covers more than a factor 2 in k.
  std::vector<double> breaks;
  for (int j = -12; j <= 12; ++j) {
    const double za = z0 + j * width;
    const double k = zmap.k_of_z(za);
    if (!(k > 0.0) || (!breaks.empty() && !(k > breaks.back())))
      throw GridError("gaussian_in_z_packet: Z support reaches below the representable k range");
    if (!breaks.empty()) {
      const int sub = std::max(1, static_cast<int>(std::ceil(std::log2(k / breaks.back()))));
      const double zb = za - width;
      for (int s = 1; s < sub; ++s) breaks.push_back(zmap.k_of_z(zb + width * s / sub));
    }
    breaks.push_back(k);
  }
  // Put a panel edge at the cut unless one already sits there.
  const double eps = zmap.epsilon();
  if (eps > breaks.front() && eps < breaks.back()) {
    const auto it = std::lower_bound(breaks.begin(), breaks.end(), eps);
    const double gap = std::min(*it - eps, eps - *(it - 1));
    if (gap > 1e-9 * eps) breaks.insert(it, eps);
  }
  RadialGrid grid = RadialGrid::gauss_legendre_panels(std::move(breaks), order);
  const double c = std::sqrt(std::sqrt(kTwoPi) / width);
  std::vector<Complex> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = grid.node(i);
    const double d = zmap.z_of_k(k) - z0;
    v[i] = c * std::exp(-d * d / (4.0 * width * width)) / (kTwoPi * k * std::sqrt(zmap.f(k)));
  }
  return RadialPacket{std::move(grid), std::move(v), det, m};
}

std::vector<SweepRow> ordering_sweep(const std::vector<double>& n_list,
                                     const std::vector<std::pair<RadialPacket, RadialPacket>>& test_pairs,
                                     bool regularized, DerivativeScheme scheme) {
  std::vector<SweepRow> rows(n_list.size());
  parallel_for(n_list.size(), [&](std::size_t i) {
    SweepRow& r = rows[i];
    r.n = n_list[i];
    for (const auto& [phi, psi] : test_pairs) {
      r.defects.push_back(hermiticity_defect(OrderingExponent(r.n), phi, psi, regularized, scheme));
      r.max_defect = std::max(r.max_defect, r.defects.back());
    }
  });
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_kernel_csv(std::ostream& out, const KernelReport& r) {
  out << "# z_lo=" << g17(r.z_lo) << "\n# z_hi=" << g17(r.z_hi) << "\n# max_deviation=" << g17(r.max_deviation) << '\n';
  out << "T,T_prime,re_numeric,im_numeric,re_analytic,im_analytic,deviation\n";
  for (const auto& s : r.samples)
    out << g17(s.T) << ',' << g17(s.T_prime) << ',' << g17(s.numeric.real()) << ',' << g17(s.numeric.imag()) << ','
        << g17(s.analytic.real()) << ',' << g17(s.analytic.imag()) << ',' << g17(std::abs(s.numeric - s.analytic))
        << '\n';
}

void write_reconstruction_csv(std::ostream& out, const ReconstructionReport& r) {
  out << "# relative_error=" << g17(r.relative_error) << "\n# window_sufficient=" << (r.window_sufficient ? 1 : 0)
      << '\n';
  out << "k,re_input,im_input,re_reconstructed,im_reconstructed\n";
  for (std::size_t i = 0; i < r.input.grid.size(); ++i)
    out << g17(r.input.grid.node(i)) << ',' << g17(r.input.values[i].real()) << ',' << g17(r.input.values[i].imag())
        << ',' << g17(r.reconstructed.values[i].real()) << ',' << g17(r.reconstructed.values[i].imag()) << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "n,max_defect";
  const std::size_t pairs = rows.empty() ? 0 : rows.front().defects.size();
  for (std::size_t p = 0; p < pairs; ++p) out << ",defect_" << p;
  out << '\n';
  for (const auto& r : rows) {
    out << g17(r.n) << ',' << g17(r.max_defect);
    for (double d : r.defects) out << ',' << g17(d);
    out << '\n';
  }
}

std::string summarize(const KernelReport& r) {
  std::ostringstream s;
  s << "orthogonality: " << r.samples.size() << " pairs on Z in [" << g6(r.z_lo) << ", " << g6(r.z_hi)
    << "], max |numeric - kernel| = " << g6(r.max_deviation);
  return s.str();
}

std::string summarize(const ReconstructionReport& r) {
  std::ostringstream s;
  s << "completeness: relative error " << g6(r.relative_error) << " on " << r.input.grid.size() << " radial nodes"
    << (r.window_sufficient ? "" : " (T window insufficient)");
  return s.str();
}

std::string summarize(const std::vector<SweepRow>& rows) {
  std::ostringstream s;
  s << "ordering sweep:";
  for (const auto& r : rows) s << " n=" << g6(r.n) << ":" << g6(r.max_defect);
  return s.str();
}

}  // namespace toa
