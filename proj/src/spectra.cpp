#include "toa/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "fft.hpp"
#include "toa/kinematics.hpp"
#include "toa/parallel.hpp"
#include "toa/quadrature.hpp"

namespace toa {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

constexpr double kDensityFloor = 1e-28;

double peak_of(const std::vector<double>& v) {
  double p = 0.0;
  for (double x : v) p = std::max(p, x);
  return p;
}

void fill_density(ArrivalSpectrum& spec) {
  spec.density.resize(spec.amplitude.size());
  CompensatedSum<double> total;
  for (std::size_t l = 0; l < spec.amplitude.size(); ++l) {
    spec.density[l] = std::norm(spec.amplitude[l]);
    total.add(spec.density[l] * spec.t_grid.dt);
  }
  spec.total = total.value();
  // Edge densities below kDensityFloor are rounding noise of a (near-)vanishing
  // projection, not truncated probability.
  const double peak = peak_of(spec.density);
  const double edge = std::max(spec.density.front(), spec.density.back());
  if (peak > 0.0 && edge > kDensityFloor) spec.diagnostics.t_edge_ratio = edge / peak;
}

// Support of h on the radial nodes, in Z. False when h vanishes identically.
bool find_support(const RadialPacket& g, const ZMap& zmap, SpectrumDiagnostics& d) {
  const std::size_t n = g.grid.size();
  std::vector<double> mag(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.grid.node(i);
    mag[i] = kTwoPi * k * std::sqrt(zmap.f(k)) * std::abs(g.values[i]);
    peak = std::max(peak, mag[i]);
  }
  if (!(peak > 0.0)) return false;
  std::size_t first = n, last = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (mag[i] > 1e-10 * peak) {
      first = std::min(first, i);
      last = i;
    }
  const double k_lo = first > 0 ? g.grid.node(first - 1) : g.grid.k_min();
  const double k_hi = last + 1 < n ? g.grid.node(last + 1) : g.grid.k_max();
  d.support_lo = k_lo > 0.0 ? zmap.z_of_k(k_lo) : zmap.z_of_k(g.grid.node(0));
  d.support_hi = zmap.z_of_k(k_hi);
  d.resolution = kTwoPi / (d.support_hi - d.support_lo);
  return true;
}

// A packet with no detected component is never detected: all-zero spectrum.
ArrivalSpectrum& zero_spectrum(ArrivalSpectrum& spec) {
  spec.amplitude.assign(spec.t_grid.n, Complex(0.0));
  fill_density(spec);
  return spec;
}

}  // namespace

TimeGrid::TimeGrid(double t0_, double dt_, std::size_t n_) : t0(t0_), dt(dt_), n(n_) {
  if (!std::isfinite(t0) || !(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("TimeGrid: need finite t0, dt > 0");
  if (n < 2) throw std::invalid_argument("TimeGrid: need at least two samples");
}

TimeGrid TimeGrid::window(double lo, double hi, std::size_t n) {
  if (!(hi > lo)) throw std::invalid_argument("TimeGrid::window: need hi > lo");
  if (n < 2) throw std::invalid_argument("TimeGrid::window: need at least two samples");
  const double dt = (hi - lo) / static_cast<double>(n);
  return TimeGrid(lo + 0.5 * dt, dt, n);
}

std::vector<Complex> z_profile(const RadialPacket& projection, std::span<const double> z) {
  const ZMap zmap(projection.mass, projection.detector.cut);
  const double kmin = projection.grid.k_min(), kmax = projection.grid.k_max();
  const double zmin = kmin > 0.0 ? zmap.z_of_k(kmin) : -HUGE_VAL;
  const double zmax = zmap.z_of_k(kmax);
  std::vector<Complex> h(z.size());
  parallel_for(z.size(), [&](std::size_t j) {
    if (z[j] < zmin || z[j] > zmax) return;
    const double k = std::clamp(zmap.k_of_z(z[j]), kmin, kmax);
    if (!(k > 0.0)) return;
    h[j] = kTwoPi * k * std::sqrt(zmap.f(k)) * projection.evaluate(k);
  });
  return h;
}

ArrivalSpectrum arrival_amplitude_fft(const RadialPacket& projection, const TimeGrid& t_grid) {
  const ZMap zmap(projection.mass, projection.detector.cut);
  ArrivalSpectrum spec{t_grid, {}, {}, projection.detector, projection.mass, 0.0, {}};
  auto& d = spec.diagnostics;
  if (!find_support(projection, zmap, d)) return zero_spectrum(spec);

  const std::size_t n = t_grid.n;
  d.z_samples = n;
  d.dz = kTwoPi / (static_cast<double>(n) * t_grid.dt);
  const double span = d.dz * static_cast<double>(n);
  d.z_lo = 0.5 * (d.support_lo + d.support_hi) - 0.5 * span;
  if (d.support_hi - d.support_lo > span)
    d.warnings.push_back("Z support (" + fmt17(d.support_hi - d.support_lo) + ") exceeds the Z window " + fmt17(span) +
                         "; refine dt");

  std::vector<double> z(n);
  for (std::size_t j = 0; j < n; ++j) z[j] = d.z_lo + static_cast<double>(j) * d.dz;
  std::vector<Complex> h = z_profile(projection, z);
  double hpeak = 0.0;
  for (const auto& x : h) hpeak = std::max(hpeak, std::abs(x));
  if (hpeak > 0.0) d.z_edge_ratio = std::max(std::abs(h.front()), std::abs(h.back())) / hpeak;
  if (d.z_edge_ratio > 1e-8)
    d.warnings.push_back("h(Z) not decayed at the Z-window edges (ratio " + fmt17(d.z_edge_ratio) + ")");

  // A_l = (dZ / 2 pi) exp(-i Z_lo T_l) sum_j h_j exp(-i j dZ t0) exp(-2 pi i j l / n).
  for (std::size_t j = 0; j < n; ++j) {
    const double ph = -static_cast<double>(j) * d.dz * t_grid.t0;
    h[j] *= Complex(std::cos(ph), std::sin(ph));
  }
  detail::fft_inplace(h, FFTW_FORWARD);
  spec.amplitude.resize(n);
  const double scale = d.dz / kTwoPi;
  for (std::size_t l = 0; l < n; ++l) {
    const double ph = -d.z_lo * t_grid.at(l);
    spec.amplitude[l] = scale * Complex(std::cos(ph), std::sin(ph)) * h[l];
  }
  fill_density(spec);
  if (d.t_edge_ratio > 1e-8)
    d.warnings.push_back("arrival density not decayed at the T-window edges (ratio " + fmt17(d.t_edge_ratio) + ")");
  return spec;
}

ArrivalSpectrum arrival_amplitude_quadrature(const RadialPacket& projection, const TimeGrid& t_grid) {
  const ZMap zmap(projection.mass, projection.detector.cut);
  ArrivalSpectrum spec{t_grid, {}, {}, projection.detector, projection.mass, 0.0, {}};
  if (!find_support(projection, zmap, spec.diagnostics)) return zero_spectrum(spec);

  const auto& grid = projection.grid;
  // Integrate over the nodes' support padded by one node, honoring the panel
  // breaks (the interpolant is piecewise) and the kink of f at epsilon.
  const double k_lo = std::max(grid.k_min(), zmap.k_of_z(spec.diagnostics.support_lo));
  const double k_hi = std::min(grid.k_max(), zmap.k_of_z(spec.diagnostics.support_hi));
  std::vector<double> breaks = grid.breaks();
  breaks.push_back(zmap.epsilon());
  // Panel edges are already mandatory cuts; only node-based schemes need a width cap.
  double max_width = k_hi - k_lo;
  if (grid.scheme() != RadialScheme::GaussLegendrePanels)
    max_width = std::min(max_width, 4.0 * (grid.node(1) - grid.node(0)));

  spec.amplitude.resize(t_grid.n);
  parallel_for(t_grid.n, [&](std::size_t l) {
    const double T = t_grid.at(l);
    OscillatoryIntegrand f{
        [&](double k) {
          const double w = zmap.omega(k);
          return k * projection.evaluate(k) / (w * std::sqrt(zmap.f(k)));
        },
        [&](double k) { return -zmap.z_of_k(k) * T; },
        [&](double k) { return -T * zmap.dz_dk(k); },
    };
    spec.amplitude[l] = integrate_oscillatory(f, k_lo, k_hi, breaks, max_width);
  });
  fill_density(spec);
  return spec;
}

ArrivalSpectrum arrival_amplitude(const WavePacket& packet, const Detector& det, const TimeGrid& t_grid) {
  return arrival_amplitude_fft(detected_projection(packet, det), t_grid);
}

double relative_l2(const std::vector<Complex>& a, const std::vector<Complex>& b,
                   const std::vector<std::size_t>& indices) {
  CompensatedSum<double> num, den;
  for (std::size_t i : indices) {
    num.add(std::norm(a.at(i) - b.at(i)));
    den.add(std::norm(b.at(i)));
  }
  if (!(den.value() > 0.0)) throw std::domain_error("relative_l2: reference vanishes on the selected samples");
  return std::sqrt(num.value() / den.value());
}

std::vector<std::size_t> significant_samples(const ArrivalSpectrum& spec, double rel_floor, std::size_t max_count) {
  const double peak = peak_of(spec.density);
  std::vector<std::size_t> all;
  for (std::size_t l = 0; l < spec.density.size(); ++l)
    if (spec.density[l] > rel_floor * peak) all.push_back(l);
  if (all.size() <= max_count || max_count == 0) return all;
  std::vector<std::size_t> out;
  out.reserve(max_count);
  for (std::size_t i = 0; i < max_count; ++i) out.push_back(all[i * (all.size() - 1) / (max_count - 1)]);
  return out;
}

double prob_interval(const ArrivalSpectrum& spec, double T1, double T2) {
  if (!(T2 >= T1)) throw std::invalid_argument("prob_interval: need T1 <= T2");
  const auto& g = spec.t_grid;
  const double tol = 1e-12 * (g.upper() - g.lower());
  if (T1 < g.lower() - tol || T2 > g.upper() + tol) throw WindowError("prob_interval: interval leaves the sampled T window");
  if (T1 == T2) return 0.0;
  const double u1 = (T1 - g.lower()) / g.dt, u2 = (T2 - g.lower()) / g.dt;
  const auto l1 = static_cast<std::size_t>(std::clamp(std::floor(u1), 0.0, static_cast<double>(g.n - 1)));
  const auto l2 = static_cast<std::size_t>(std::clamp(std::floor(u2), 0.0, static_cast<double>(g.n - 1)));
  CompensatedSum<double> s;
  for (std::size_t l = l1; l <= l2; ++l) {
    const double lo = std::max(u1, static_cast<double>(l));
    const double hi = std::min(u2, static_cast<double>(l + 1));
    if (hi > lo) s.add(spec.density[l] * (hi - lo) * g.dt);
  }
  return s.value();
}

double prob_detect(const ArrivalSpectrum& spec) {
  if (spec.diagnostics.t_edge_ratio > 1e-8)
    throw WindowError("prob_detect: arrival density at the T-window edges is " + fmt17(spec.diagnostics.t_edge_ratio) +
                      " of its peak (needs < 1e-8); widen the window");
  return spec.total;
}

double prob_detect(const WavePacket& packet, const Detector& det, const TimeGrid& window) {
  return prob_detect(arrival_amplitude(packet, det, window));
}

double conditional_mean(const ArrivalSpectrum& spec) {
  if (!(spec.total > 1e-10))
    throw UndefinedConditional("conditional_mean: detection probability " + fmt17(spec.total) +
                               " is zero; the conditional arrival time is undefined");
  CompensatedSum<double> s;
  for (std::size_t l = 0; l < spec.density.size(); ++l) s.add(spec.t_grid.at(l) * spec.density[l] * spec.t_grid.dt);
  return s.value() / spec.total;
}

double spectrum_stddev(const ArrivalSpectrum& spec) {
  const double mean = conditional_mean(spec);
  CompensatedSum<double> s;
  for (std::size_t l = 0; l < spec.density.size(); ++l) {
    const double d = spec.t_grid.at(l) - mean;
    s.add(d * d * spec.density[l] * spec.t_grid.dt);
  }
  return std::sqrt(s.value() / spec.total);
}

std::optional<double> classical_toa(const ClassicalState& state, const Vec3& X) {
  const double p2 = dot(state.p, state.p);
  if (!(p2 > 0.0))
    throw std::domain_error("classical_toa: p = 0, the particle never reaches the detector or sits in it forever");
  const Vec3 d = X - state.Q;
  const double dn = norm(d);
  if (dn == 0.0) return 0.0;
  if (norm(cross(d, state.p)) / (dn * std::sqrt(p2)) > 1e-9) return std::nullopt;
  return omega(std::sqrt(p2), state.mass) * dot(d, state.p) / p2;
}

IntervalSet::IntervalSet(std::vector<Interval> pieces) {
  for (const auto& [a, b] : pieces)
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
      throw std::invalid_argument("IntervalSet: intervals must be finite with a <= b");
  std::sort(pieces.begin(), pieces.end());
  for (const auto& iv : pieces) {
    if (iv.first == iv.second) continue;
    if (!pieces_.empty() && iv.first <= pieces_.back().second)
      pieces_.back().second = std::max(pieces_.back().second, iv.second);
    else
      pieces_.push_back(iv);
  }
}

IntervalSet interval_meet(const IntervalSet& a, const IntervalSet& b) {
  std::vector<IntervalSet::Interval> out;
  std::size_t i = 0, j = 0;
  const auto& pa = a.pieces();
  const auto& pb = b.pieces();
  while (i < pa.size() && j < pb.size()) {
    const double lo = std::max(pa[i].first, pb[j].first);
    const double hi = std::min(pa[i].second, pb[j].second);
    if (hi > lo) out.emplace_back(lo, hi);
    if (pa[i].second < pb[j].second)
      ++i;
    else
      ++j;
  }
  return IntervalSet(std::move(out));
}

IntervalSet interval_join(const IntervalSet& a, const IntervalSet& b) {
  std::vector<IntervalSet::Interval> all(a.pieces());
  all.insert(all.end(), b.pieces().begin(), b.pieces().end());
  return IntervalSet(std::move(all));
}

IntervalSet interval_complement(const IntervalSet& a, const IntervalSet::Interval& window) {
  if (!(window.second >= window.first)) throw std::invalid_argument("interval_complement: reversed window");
  std::vector<IntervalSet::Interval> out;
  double cursor = window.first;
  for (const auto& [lo, hi] : a.pieces()) {
    if (hi <= cursor) continue;
    if (lo >= window.second) break;
    if (lo > cursor) out.emplace_back(cursor, lo);
    cursor = std::max(cursor, hi);
  }
  if (cursor < window.second) out.emplace_back(cursor, window.second);
  return IntervalSet(std::move(out));
}

double prob_interval(const ArrivalSpectrum& spec, const IntervalSet& set) {
  const double lo = spec.t_grid.lower(), hi = spec.t_grid.upper();
  CompensatedSum<double> s;
  for (const auto& [a, b] : set.pieces()) {
    const double x = std::max(a, lo), y = std::min(b, hi);
    if (y > x) s.add(prob_interval(spec, x, y));
  }
  return s.value();
}

IntervalProbabilities interval_probabilities(const ArrivalSpectrum& spec, const IntervalSet& set, double packet_norm2) {
  IntervalProbabilities out;
  out.in_set = prob_interval(spec, set);
  out.negation = packet_norm2 - out.in_set;
  out.complement = spec.total - out.in_set;
  return out;
}

void write_spectrum_csv(std::ostream& out, const ArrivalSpectrum& spec,
                        const std::vector<std::pair<std::string, std::string>>& extra_metadata) {
  const auto& X = spec.detector.position;
  const auto& d = spec.diagnostics;
  out << "# detector=" << fmt17(X.x) << ' ' << fmt17(X.y) << ' ' << fmt17(X.z) << '\n';
  out << "# mass=" << fmt17(spec.mass.value()) << '\n';
  out << "# epsilon=" << fmt17(spec.detector.cut.epsilon()) << '\n';
  out << "# t0=" << fmt17(spec.t_grid.t0) << '\n';
  out << "# dt=" << fmt17(spec.t_grid.dt) << '\n';
  out << "# samples=" << spec.t_grid.n << '\n';
  out << "# z_lo=" << fmt17(d.z_lo) << '\n';
  out << "# dz=" << fmt17(d.dz) << '\n';
  out << "# resolution=" << fmt17(d.resolution) << '\n';
  out << "# total=" << fmt17(spec.total) << '\n';
  for (const auto& [k, v] : extra_metadata) out << "# " << k << '=' << v << '\n';
  out << "T,re_amp,im_amp,density\n";
  for (std::size_t l = 0; l < spec.amplitude.size(); ++l)
    out << fmt17(spec.t_grid.at(l)) << ',' << fmt17(spec.amplitude[l].real()) << ',' << fmt17(spec.amplitude[l].imag())
        << ',' << fmt17(spec.density[l]) << '\n';
}

}  // namespace toa
