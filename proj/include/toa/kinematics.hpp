#pragma once

// Scalar kinematic maps: relativistic energy, the regularization profile
// f(k) and the coordinate Z(k) conjugate to the arrival time.

#include "toa/types.hpp"

namespace toa {

// omega(k) = sqrt(k^2 + m^2). Throws for k < 0.
double omega(double k, Mass m);

// f(k) = 1/k above the cut, k/eps^2 below it. Throws for k <= 0.
double f_reg(double k, RegularizationCut cut);

// Z(k) = int_eps^k dk' / (omega(k') f(k')), in closed form on both branches.
//
//   k >= eps : Z = omega(k) - omega(eps)
//   k <  eps : Z = (eps^2/m) [asinh(m/eps) - asinh(m/k)]      (m > 0)
//              Z = eps - eps^2/k                              (m = 0)
//
// Z(eps) = 0, Z is strictly increasing, Z -> -inf as k -> 0+ and Z -> +inf as
// k -> inf. For the massive lower branch Z diverges only logarithmically, so
// the inverse is also offered in log k, which stays representable when k
// itself underflows.
class ZMap {
 public:
  ZMap(Mass m, RegularizationCut cut);

  double mass() const { return m_; }
  double epsilon() const { return eps_; }
  double omega_at_cut() const { return omega_eps_; }

  double z_of_k(double k) const;
  double z_of_log_k(double log_k) const;

  // Total inverse. Returns a strictly positive k; for Z below the smallest
  // Z reachable with a representable k the result saturates at the smallest
  // positive double. Use log_k_of_z when the exact preimage matters there.
  double k_of_z(double z) const;
  double log_k_of_z(double z) const;

  // dk/dZ = omega(k) f(k).
  double dk_dz(double k) const;
  // dZ/dk = 1 / (omega(k) f(k)); also valid for k -> 0 on the massless branch.
  double dz_dk(double k) const;

  double f(double k) const;
  double omega(double k) const;

 private:
  double m_;
  double eps_;
  double omega_eps_;
  double asinh_m_over_eps_;
};

}  // namespace toa
