#include "toa/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace toa {

namespace {

GaussLegendreRule build_gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 1; i <= half; ++i) {
    double z = std::cos(kPi * (i - 0.25) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.nodes[i - 1] = -z;
    rule.nodes[n - i] = z;
    rule.weights[i - 1] = w;
    rule.weights[n - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  rule.barycentric.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = rule.nodes[i];
    rule.barycentric[i] = ((i % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - x * x) * rule.weights[i]);
  }
  return rule;
}

Complex lagrange8(std::span<const Complex> values, double u) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(values.size());
  const std::ptrdiff_t width = std::min<std::ptrdiff_t>(8, n);
  std::ptrdiff_t start = static_cast<std::ptrdiff_t>(std::floor(u)) - (width / 2 - 1);
  start = std::clamp<std::ptrdiff_t>(start, 0, n - width);
  Complex acc = 0.0;
  for (std::ptrdiff_t i = 0; i < width; ++i) {
    const double xi = static_cast<double>(start + i);
    if (u == xi) return values[start + i];
    double li = 1.0;
    for (std::ptrdiff_t j = 0; j < width; ++j) {
      if (j == i) continue;
      const double xj = static_cast<double>(start + j);
      li *= (u - xj) / (xi - xj);
    }
    acc += li * values[start + i];
  }
  return acc;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(build_gauss_legendre(n));
  return *slot;
}

RadialGrid RadialGrid::gauss_legendre_panels(std::vector<double> breaks, int order) {
  if (breaks.size() < 2) throw std::invalid_argument("RadialGrid: need at least two panel breaks");
  if (!(breaks.front() >= 0.0)) throw std::invalid_argument("RadialGrid: k range must start at k >= 0");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1])) throw std::invalid_argument("RadialGrid: panel breaks must increase");
  const auto& rule = gauss_legendre(order);
  RadialGrid g;
  g.scheme_ = RadialScheme::GaussLegendrePanels;
  g.order_ = order;
  g.nodes_.reserve((breaks.size() - 1) * order);
  g.weights_.reserve((breaks.size() - 1) * order);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double mid = 0.5 * (breaks[p] + breaks[p + 1]);
    const double half = 0.5 * (breaks[p + 1] - breaks[p]);
    for (int i = 0; i < order; ++i) {
      g.nodes_.push_back(mid + half * rule.nodes[i]);
      g.weights_.push_back(half * rule.weights[i]);
    }
  }
  g.breaks_ = std::move(breaks);
  return g;
}

RadialGrid RadialGrid::gauss_legendre_panels(double k_lo, double k_hi, int panels, int order) {
  if (panels < 1) throw std::invalid_argument("RadialGrid: panels must be >= 1");
  if (!(k_hi > k_lo)) throw std::invalid_argument("RadialGrid: need k_hi > k_lo");
  std::vector<double> breaks(panels + 1);
  for (int p = 0; p <= panels; ++p) breaks[p] = k_lo + (k_hi - k_lo) * p / panels;
  breaks.back() = k_hi;
  return gauss_legendre_panels(std::move(breaks), order);
}

RadialGrid RadialGrid::uniform_z(const ZMap& zmap, double z_lo, double dz, std::size_t n) {
  if (n < 2 || !(dz > 0.0)) throw std::invalid_argument("RadialGrid::uniform_z: need n >= 2 and dZ > 0");
  RadialGrid g;
  g.scheme_ = RadialScheme::UniformZ;
  g.origin_ = z_lo;
  g.spacing_ = dz;
  g.zmap_ = zmap;
  g.nodes_.resize(n);
  g.weights_.resize(n);
  g.z_nodes_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double z = z_lo + static_cast<double>(j) * dz;
    const double k = zmap.k_of_z(z);
    g.z_nodes_[j] = z;
    g.nodes_[j] = k;
    g.weights_[j] = dz * zmap.dk_dz(k);
    if (j > 0 && !(k > g.nodes_[j - 1]))
      throw GridError("RadialGrid::uniform_z: Z window reaches below the representable k range");
  }
  return g;
}

RadialGrid RadialGrid::uniform_k(double k_lo, double dk, std::size_t n) {
  if (n < 2 || !(dk > 0.0) || !(k_lo > 0.0))
    throw std::invalid_argument("RadialGrid::uniform_k: need n >= 2, dk > 0, k_lo > 0");
  RadialGrid g;
  g.scheme_ = RadialScheme::UniformK;
  g.origin_ = k_lo;
  g.spacing_ = dk;
  g.nodes_.resize(n);
  g.weights_.assign(n, dk);
  for (std::size_t j = 0; j < n; ++j) g.nodes_[j] = k_lo + static_cast<double>(j) * dk;
  g.weights_.front() *= 0.5;
  g.weights_.back() *= 0.5;
  return g;
}

double RadialGrid::k_min() const {
  return scheme_ == RadialScheme::GaussLegendrePanels ? breaks_.front() : nodes_.front();
}

double RadialGrid::k_max() const {
  return scheme_ == RadialScheme::GaussLegendrePanels ? breaks_.back() : nodes_.back();
}

Complex RadialGrid::interpolate(std::span<const Complex> values, double k) const {
  if (values.size() != nodes_.size()) throw GridError("RadialGrid::interpolate: value count mismatch");
  if (!(k >= k_min() && k <= k_max())) return 0.0;
  switch (scheme_) {
    case RadialScheme::GaussLegendrePanels: {
      auto it = std::upper_bound(breaks_.begin(), breaks_.end(), k);
      std::size_t p = static_cast<std::size_t>(std::distance(breaks_.begin(), it));
      p = std::clamp<std::size_t>(p, 1, breaks_.size() - 1) - 1;
      const double a = breaks_[p], b = breaks_[p + 1];
      const double t = (2.0 * k - (a + b)) / (b - a);
      const auto& rule = gauss_legendre(order_);
      const std::size_t off = p * static_cast<std::size_t>(order_);
      Complex num = 0.0;
      double den = 0.0;
      for (int i = 0; i < order_; ++i) {
        const double d = t - rule.nodes[i];
        if (d == 0.0) return values[off + i];
        const double c = rule.barycentric[i] / d;
        num += c * values[off + i];
        den += c;
      }
      return num / den;
    }
    case RadialScheme::UniformK:
      return lagrange8(values, (k - origin_) / spacing_);
    case RadialScheme::UniformZ:
      return lagrange8(values, (zmap_->z_of_k(k) - origin_) / spacing_);
  }
  return 0.0;
}

bool RadialGrid::same_as(const RadialGrid& other) const {
  return scheme_ == other.scheme_ && nodes_ == other.nodes_ && weights_ == other.weights_;
}

AngularQuadrature AngularQuadrature::build(int order) {
  if (order < 0) throw std::invalid_argument("AngularQuadrature: order must be >= 0");
  AngularQuadrature q;
  q.order = order;
  q.n_theta = order / 2 + 1;
  q.n_phi = order + 1;
  const auto& rule = gauss_legendre(q.n_theta);
  q.directions.reserve(static_cast<std::size_t>(q.n_theta) * q.n_phi);
  q.weights.reserve(static_cast<std::size_t>(q.n_theta) * q.n_phi);
  const double dphi = kTwoPi / q.n_phi;
  for (int i = 0; i < q.n_theta; ++i) {
    const double mu = rule.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    for (int j = 0; j < q.n_phi; ++j) {
      const double phi = dphi * j;
      q.directions.push_back({s * std::cos(phi), s * std::sin(phi), mu});
      q.weights.push_back(rule.weights[i] * dphi);
    }
  }
  return q;
}

namespace {

struct PanelIntegrator {
  const OscillatoryIntegrand& f;
  double max_width;
  const GaussLegendreRule& rule;
  CompensatedSum<Complex> sum;
  std::size_t panels = 0;

  bool acceptable(double a, double b) const {
    const double w = b - a;
    if (w > max_width) return false;
    const double rate = std::max({std::abs(f.phase_rate(a)), std::abs(f.phase_rate(0.5 * (a + b))),
                                  std::abs(f.phase_rate(b))});
    return rate * w <= 0.25 * kPi;
  }

  void integrate(double a, double b, int depth) {
    if (depth < 200 && !acceptable(a, b)) {
      const double mid = 0.5 * (a + b);
      if (mid > a && mid < b) {
        integrate(a, mid, depth + 1);
        integrate(mid, b, depth + 1);
        return;
      }
    }
    if (++panels > 50'000'000) throw Error("integrate_oscillatory: panel budget exhausted");
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = c + h * rule.nodes[i];
      const double ph = f.phase(x);
      sum.add(h * rule.weights[i] * f.amplitude(x) * Complex(std::cos(ph), std::sin(ph)));
    }
  }
};

}  // namespace

Complex integrate_oscillatory(const OscillatoryIntegrand& f, double a, double b,
                              std::span<const double> breaks, double max_width, int order) {
  if (!(b >= a)) throw std::invalid_argument("integrate_oscillatory: need b >= a");
  if (!(max_width > 0.0)) throw std::invalid_argument("integrate_oscillatory: max_width must be > 0");
  if (a == b) return 0.0;
  std::vector<double> cuts{a};
  std::vector<double> sorted(breaks.begin(), breaks.end());
  std::sort(sorted.begin(), sorted.end());
  for (double x : sorted)
    if (x > cuts.back() && x < b) cuts.push_back(x);
  cuts.push_back(b);
  PanelIntegrator integ{f, max_width, gauss_legendre(order), {}};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) integ.integrate(cuts[i], cuts[i + 1], 0);
  return integ.sum.value();
}

}  // namespace toa
