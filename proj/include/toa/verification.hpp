#pragma once

// Brute-force oracles for the structural identities: orthogonality of the
// regularized eigenfunctions on a truncated Z window, completeness on the
// detected subspace, and the Hermiticity sweep over the ordering exponent.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "toa/hilbert.hpp"
#include "toa/spectra.hpp"
#include "toa/toa_operator.hpp"

namespace toa {

struct KernelSample {
  double T = 0.0;
  double T_prime = 0.0;
  Complex numeric;
  Complex analytic;
};

struct KernelReport {
  double z_lo = 0.0;
  double z_hi = 0.0;
  std::vector<KernelSample> samples;
  double max_deviation = 0.0;
};

// (1/2 pi) int_{z_lo}^{z_hi} dZ exp(iZ(T' - T)).
Complex truncated_kernel(double T, double T_prime, double z_lo, double z_hi);

// (psi_T, psi_T') for the regularized n = 1/2 eigenfunctions, restricted to
// k(z_lo) <= k <= k(z_hi), by adaptive quadrature in log k. The common
// exp(-i k.X) phase cancels and leaves the 4 pi of the angular integral.
Complex eigenfunction_overlap(double T, double T_prime, Mass m, RegularizationCut cut, double z_lo, double z_hi);

KernelReport orthogonality_kernel(const std::vector<std::pair<double, double>>& pairs, const Detector& det, Mass m,
                                  double z_lo, double z_hi);
// All pairs (T_i, T_j) with i <= j.
KernelReport orthogonality_kernel(const std::vector<double>& t_list, const Detector& det, Mass m, double z_lo,
                                  double z_hi);

struct ReconstructionReport {
  RadialPacket input;
  RadialPacket reconstructed;
  double relative_error = 0.0;  // in KG norm
  bool window_sufficient = true;
  SpectrumDiagnostics diagnostics;
};

// psi_rec(k) = sum_l dt Psi_T_l(k) <T_l, X|psi>, against psi.
ReconstructionReport completeness_reconstruct(const RadialPacket& psi, const TimeGrid& t_window);
// Generic packets reconstruct to their detected projection.
ReconstructionReport completeness_reconstruct(const WavePacket& packet, const Detector& det, const TimeGrid& t_window);

// Normalized detected-subspace element whose Z profile
// h(Z) = 2 pi k sqrt(f) psi = c exp(-(Z - z0)^2 / (4 width^2)) is Gaussian,
// on Gauss-Legendre panels spanning z0 +- 12 width.
RadialPacket gaussian_in_z_packet(double z0, double width, const Detector& det, Mass m, int order = 16);

struct SweepRow {
  double n = 0.0;
  std::vector<double> defects;  // one per test pair
  double max_defect = 0.0;
};

std::vector<SweepRow> ordering_sweep(const std::vector<double>& n_list,
                                     const std::vector<std::pair<RadialPacket, RadialPacket>>& test_pairs,
                                     bool regularized = true, DerivativeScheme scheme = DerivativeScheme::Auto);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_kernel_csv(std::ostream& out, const KernelReport& report);
void write_reconstruction_csv(std::ostream& out, const ReconstructionReport& report);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

std::string summarize(const KernelReport& report);
std::string summarize(const ReconstructionReport& report);
std::string summarize(const std::vector<SweepRow>& rows);

}  // namespace toa
