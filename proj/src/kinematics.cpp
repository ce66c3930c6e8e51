#include "toa/kinematics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace toa {

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145817657;

// asinh(exp(x)) without forming exp(x) when it would overflow.
double asinh_of_exp(double x) {
  if (x > 30.0) return x + kLn2 + 0.25 * std::exp(-2.0 * x);
  return std::asinh(std::exp(x));
}

// log(sinh(a)) for a > 0.
double log_sinh(double a) {
  if (a > 20.0) return a - kLn2 + std::log1p(-std::exp(-2.0 * a));
  return std::log(std::sinh(a));
}

}  // namespace

double omega(double k, Mass m) {
  if (!(k >= 0.0)) throw std::invalid_argument("omega: k must be >= 0");
  return std::hypot(k, m.value());
}

double f_reg(double k, RegularizationCut cut) {
  if (!(k > 0.0)) throw std::invalid_argument("f_reg: k must be > 0");
  const double eps = cut.epsilon();
  return k > eps ? 1.0 / k : k / (eps * eps);
}

ZMap::ZMap(Mass m, RegularizationCut cut)
    : m_(m.value()),
      eps_(cut.epsilon()),
      omega_eps_(std::hypot(cut.epsilon(), m.value())),
      asinh_m_over_eps_(std::asinh(m.value() / cut.epsilon())) {}

double ZMap::omega(double k) const { return std::hypot(k, m_); }

double ZMap::f(double k) const {
  if (!(k > 0.0)) throw std::invalid_argument("ZMap::f: k must be > 0");
  return k > eps_ ? 1.0 / k : k / (eps_ * eps_);
}

double ZMap::z_of_k(double k) const {
  if (!(k > 0.0)) throw std::invalid_argument("z_of_k: k must be > 0");
  if (k >= eps_) {
    if (m_ == 0.0) return k - eps_;
    // omega(k) - omega(eps) without cancellation near the cut.
    return (k - eps_) * (k + eps_) / (omega(k) + omega_eps_);
  }
  if (m_ == 0.0) return eps_ - eps_ * (eps_ / k);
  const double ratio = m_ / k;
  const double asinh_m_over_k =
      std::isfinite(ratio) && ratio < 1e300 ? std::asinh(ratio) : std::log(2.0 * m_) - std::log(k);
  return (eps_ * eps_ / m_) * (asinh_m_over_eps_ - asinh_m_over_k);
}

double ZMap::z_of_log_k(double log_k) const {
  if (!std::isfinite(log_k)) throw std::invalid_argument("z_of_log_k: log k must be finite");
  if (log_k > -700.0 && log_k >= std::log(eps_)) return z_of_k(std::exp(log_k));
  if (m_ == 0.0) return eps_ - eps_ * eps_ * std::exp(-log_k);
  return (eps_ * eps_ / m_) * (asinh_m_over_eps_ - asinh_of_exp(std::log(m_) - log_k));
}

double ZMap::log_k_of_z(double z) const {
  if (std::isnan(z)) throw std::invalid_argument("log_k_of_z: Z is NaN");
  if (z >= 0.0) return std::log(k_of_z(z));
  if (m_ == 0.0) return 2.0 * std::log(eps_) - std::log(eps_ - z);
  const double a = asinh_m_over_eps_ - m_ * z / (eps_ * eps_);
  if (std::isinf(a)) return -std::numeric_limits<double>::infinity();
  return std::log(m_) - log_sinh(a);
}

double ZMap::k_of_z(double z) const {
  if (std::isnan(z)) throw std::invalid_argument("k_of_z: Z is NaN");
  constexpr double kTiny = std::numeric_limits<double>::denorm_min();
  if (z >= 0.0) {
    if (m_ == 0.0) return z + eps_;
    // sqrt((Z + omega_eps)^2 - m^2) factored to keep precision near Z = 0.
    const double below = eps_ * eps_ / (omega_eps_ + m_);
    return std::sqrt((z + below) * (z + omega_eps_ + m_));
  }
  double k;
  if (m_ == 0.0) {
    k = eps_ * (eps_ / (eps_ - z));
  } else {
    const double a = asinh_m_over_eps_ - m_ * z / (eps_ * eps_);
    k = a < 700.0 ? m_ / std::sinh(a) : std::exp(std::log(m_) - log_sinh(a));
  }
  return k > kTiny ? k : kTiny;
}

double ZMap::dk_dz(double k) const {
  if (!(k > 0.0)) throw std::invalid_argument("dk_dz: k must be > 0");
  return omega(k) * f(k);
}

double ZMap::dz_dk(double k) const {
  if (!(k > 0.0)) throw std::invalid_argument("dz_dk: k must be > 0");
  if (k > eps_) return k / omega(k);
  return eps_ * eps_ / (omega(k) * k);
}

}  // namespace toa
