#pragma once

// Arrival-time amplitudes <T,X|Phi>, detection probabilities, the
// conditional mean arrival time, the classical arrival time and the algebra
// of time-interval projectors.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "toa/hilbert.hpp"
#include "toa/types.hpp"

namespace toa {

// Uniform samples T_l = t0 + l dt, l = 0..n-1. Each sample owns the cell
// [T_l - dt/2, T_l + dt/2).
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  std::size_t n = 0;

  TimeGrid(double t0_, double dt_, std::size_t n_);
  // n samples covering [lo, hi): t0 = lo + dt/2, dt = (hi - lo)/n.
  static TimeGrid window(double lo, double hi, std::size_t n);

  double at(std::size_t l) const { return t0 + static_cast<double>(l) * dt; }
  double lower() const { return t0 - 0.5 * dt; }
  double upper() const { return t0 + (static_cast<double>(n) - 0.5) * dt; }
};

struct SpectrumDiagnostics {
  // Z samples used by the transform.
  double z_lo = 0.0;
  double dz = 0.0;
  std::size_t z_samples = 0;
  // Z interval where |h| exceeds 1e-10 of its peak on the radial nodes.
  double support_lo = 0.0;
  double support_hi = 0.0;
  // 2 pi / (support width): the finest time structure the packet can carry.
  double resolution = 0.0;
  // Largest |h| on the first / last Z sample, relative to the peak.
  double z_edge_ratio = 0.0;
  // Largest density on the first / last T sample, relative to the peak.
  double t_edge_ratio = 0.0;
  std::vector<std::string> warnings;
};

struct ArrivalSpectrum {
  TimeGrid t_grid;
  std::vector<Complex> amplitude;
  std::vector<double> density;
  Detector detector;
  Mass mass;
  double total = 0.0;  // sum of density * dt
  SpectrumDiagnostics diagnostics;
};

// FFT path on a uniform Z grid with the same number of samples as t_grid.
ArrivalSpectrum arrival_amplitude_fft(const RadialPacket& projection, const TimeGrid& t_grid);
// Direct oscillatory quadrature in k at every sample of t_grid.
ArrivalSpectrum arrival_amplitude_quadrature(const RadialPacket& projection, const TimeGrid& t_grid);
// Projects onto the detected subspace, then takes the FFT path.
ArrivalSpectrum arrival_amplitude(const WavePacket& packet, const Detector& det, const TimeGrid& t_grid);

// h(Z) = 2 pi k sqrt(f) psi(k(Z)) with <T,X|Phi> = (1/2 pi) int dZ exp(-iZT) h(Z).
std::vector<Complex> z_profile(const RadialPacket& projection, std::span<const double> z);

// Relative L2 distance between two amplitude sets over the given indices.
double relative_l2(const std::vector<Complex>& a, const std::vector<Complex>& b,
                   const std::vector<std::size_t>& indices);

// Samples where the density exceeds rel_floor * peak, thinned to at most
// max_count evenly spaced indices.
std::vector<std::size_t> significant_samples(const ArrivalSpectrum& spec, double rel_floor = 1e-12,
                                             std::size_t max_count = 400);

// Probability of arriving in [T1, T2) under the step interpolant of the density.
double prob_interval(const ArrivalSpectrum& spec, double T1, double T2);

// Total detection probability. Throws WindowError unless the density at both
// ends of the window is below 1e-8 of its peak.
double prob_detect(const ArrivalSpectrum& spec);
double prob_detect(const WavePacket& packet, const Detector& det, const TimeGrid& window);

// Throws UndefinedConditional when total <= 1e-10.
double conditional_mean(const ArrivalSpectrum& spec);
double spectrum_stddev(const ArrivalSpectrum& spec);

struct ClassicalState {
  Vec3 Q;
  Vec3 p;
  Mass mass;
};

// T = omega(p) (X - Q).p / |p|^2, or nullopt when the straight trajectory
// misses X (normalized transverse residual above 1e-9). Throws
// std::domain_error for p = 0.
std::optional<double> classical_toa(const ClassicalState& state, const Vec3& X);

// Finite union of disjoint half-open intervals [a, b), stored sorted with
// touching pieces merged, so equal sets have equal representations.
class IntervalSet {
 public:
  using Interval = std::pair<double, double>;

  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> pieces);

  const std::vector<Interval>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<Interval> pieces_;
};

IntervalSet interval_meet(const IntervalSet& a, const IntervalSet& b);
IntervalSet interval_join(const IntervalSet& a, const IntervalSet& b);
IntervalSet interval_complement(const IntervalSet& a, const IntervalSet::Interval& window);

double prob_interval(const ArrivalSpectrum& spec, const IntervalSet& set);

// The two ways of saying "not in the interval set": the negation over the
// whole Hilbert space, ||Phi||^2 - P(set), and the complement within the
// detected events, P^(X) - P(set).
struct IntervalProbabilities {
  double in_set = 0.0;
  double negation = 0.0;
  double complement = 0.0;
};
IntervalProbabilities interval_probabilities(const ArrivalSpectrum& spec, const IntervalSet& set,
                                             double packet_norm2 = 1.0);

// Columns T,re_amp,im_amp,density; metadata as '#' lines; %.17g numbers.
void write_spectrum_csv(std::ostream& out, const ArrivalSpectrum& spec,
                        const std::vector<std::pair<std::string, std::string>>& extra_metadata = {});

}  // namespace toa
