#include "toa/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "toa/hilbert.hpp"
#include "toa/kinematics.hpp"
#include "toa/spectra.hpp"
#include "toa/toa_operator.hpp"
#include "toa/verification.hpp"

namespace toa {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---- configuration parsing -------------------------------------------------

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError("config: '" + label() + "' must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ConfigError("config: field '" + field(key) + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("config: field '" + field(key) + "' must be finite");
    return x;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_unsigned()) throw ConfigError("config: field '" + field(key) + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError("config: field '" + field(key) + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::size_t count) {
    const json& v = get(key);
    if (!v.is_array() || v.size() != count)
      throw ConfigError("config: field '" + field(key) + "' must be an array of " + std::to_string(count) + " numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>()))
        throw ConfigError("config: field '" + field(key) + "' must contain finite numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Vec3 vec3(const std::string& key) {
    const auto v = numbers(key, 3);
    return {v[0], v[1], v[2]};
  }

  Reader child(const std::string& key) { return Reader(get(key), field(key)); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void reject_unknown() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.count(key)) throw ConfigError("config: unknown field '" + field(key) + "'");
  }

 private:
  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) throw ConfigError("config: missing required field '" + field(key) + "'");
    return node_.at(key);
  }
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// ---- output helpers ---------------------------------------------------------

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ojson num(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

class OutputSet {
 public:
  OutputSet(const std::filesystem::path& dir, std::string command, const ExperimentConfig& cfg)
      : dir_(dir), command_(std::move(command)), hash_(config_hash(cfg)), started_(utc_now()) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return f;
  }

  void write_json(const std::string& name, const ojson& j) {
    auto f = open(name);
    f << j.dump(2) << '\n';
  }

  void finish(const std::string& suite = "") {
    ojson m;
    m["schema"] = "toa-kg-manifest/1";
    m["tool"] = "toa_kg";
    m["version"] = TOA_KG_VERSION;
    m["command"] = command_;
    if (!suite.empty()) m["suite"] = suite;
    m["config_hash"] = hash_;
    m["started_utc"] = started_;
    m["finished_utc"] = utc_now();
    m["outputs"] = files_;
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << m.dump(2) << '\n';
  }

  const std::string& hash() const { return hash_; }

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::string hash_;
  std::string started_;
  std::vector<std::string> files_;
};

struct Check {
  std::string suite;
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool at_most = true;  // value <= tolerance, else value >= tolerance
  bool passed = false;
};

Check make_check(std::string suite, std::string name, double value, double tol, bool at_most = true) {
  const bool ok = std::isfinite(value) && (at_most ? value <= tol : value >= tol);
  return {std::move(suite), std::move(name), value, tol, at_most, ok};
}

// ---- physics set-up shared by the commands ------------------------------------

GaussianRecipe recipe_of(const ExperimentConfig& c) { return {c.packet.k0, c.packet.sigma, c.packet.x0}; }

RadialGrid radial_grid_with_min(const GaussianRecipe& r, const Vec3& X, std::optional<std::size_t> min_nodes) {
  RadialGrid g = radial_grid_for(r, X);
  if (min_nodes && g.size() < *min_nodes) {
    const int panels = static_cast<int>((*min_nodes + 15) / 16);
    g = RadialGrid::gauss_legendre_panels(g.k_min(), g.k_max(), panels, 16);
  }
  return g;
}

struct Projection {
  RadialPacket packet;
  std::string route;
  double membership_residual = std::numeric_limits<double>::quiet_NaN();
};

Projection build_projection(const ExperimentConfig& c, const Detector& det, Mass m) {
  if (c.packet.type == "radial-gaussian-in-z") {
    RadialPacket p = gaussian_in_z_packet(c.packet.z0, c.packet.width, det, m);
    return {std::move(p), "subspace", 0.0};
  }
  const GaussianRecipe r = recipe_of(c);
  RadialGrid radial = radial_grid_with_min(r, det.position, c.grids.radial_nodes);
  if (c.projection == "grid") {
    MomentumGridPtr grid3;
    if (c.grids.angular_order) {
      grid3 = make_momentum_grid(radial, AngularQuadrature::build(*c.grids.angular_order));
    } else {
      const MomentumGridPtr automatic = momentum_grid_for(r, det.position);
      grid3 = make_momentum_grid(radial, automatic->angular);
    }
    const WavePacket packet = gaussian_packet(r, m, grid3);
    RadialPacket p = detected_projection(packet, det);
    const double resid = membership_residual(packet, det);
    return {std::move(p), "grid", resid};
  }
  RadialPacket p = detected_projection_gaussian(r, m, det, radial);
  const double n2 = kg_norm2(p);
  return {std::move(p), "analytic", 1.0 - n2};
}

RadialPacket z_profile_packet(const RadialGrid& grid, const Detector& det, Mass m, double centre, double s,
                              double freq, double tilt) {
  std::vector<Complex> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid.z_nodes()[i];
    v[i] = std::exp(-(z - centre) * (z - centre) / (4.0 * s * s)) * std::polar(1.0 + tilt * (z - centre), freq * z);
  }
  return RadialPacket{grid, std::move(v), det, m};
}

RadialGrid operator_grid(Mass m, const Detector& det) {
  const ZMap zmap(m, det.cut);
  return RadialGrid::uniform_z(zmap, 0.5, 15.5 / 1024.0, 1024);
}

// ---- verify suites ------------------------------------------------------------

void suite_orthogonality(const ExperimentConfig& c, OutputSet& out, std::vector<Check>& checks) {
  const Mass m(c.mass);
  const Detector det(c.detector, RegularizationCut(c.epsilon));
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> t(-10.0, 10.0);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 100; ++i) {
    const double a = t(rng);
    pairs.emplace_back(a, t(rng));
  }
  const double lo = c.grids.z_window[0], hi = c.grids.z_window[1];
  const KernelReport rep = orthogonality_kernel(pairs, det, m, lo, hi);
  auto f = out.open("orthogonality.csv");
  write_kernel_csv(f, rep);
  checks.push_back(make_check("orthogonality", "max |numeric - kernel|", rep.max_deviation, 1e-8));

  std::vector<double> widths, peaks;
  for (double s : {1.0, 2.0, 4.0}) {
    const double w = (hi - lo) * s;
    widths.push_back(w);
    peaks.push_back(eigenfunction_overlap(0.0, 0.0, m, det.cut, lo, lo + w).real());
  }
  checks.push_back(make_check("orthogonality", "|peak growth slope - 1|", std::abs(loglog_slope(widths, peaks) - 1.0), 1e-6));
}

void suite_completeness(const ExperimentConfig& c, OutputSet& out, std::vector<Check>& checks) {
  const Mass m(c.mass);
  const Detector det(c.detector, RegularizationCut(c.epsilon));
  const bool radial = c.packet.type == "radial-gaussian-in-z";
  const double z0 = radial ? c.packet.z0 : 4.0;
  const double width = radial ? c.packet.width : 0.25;
  const RadialPacket psi = gaussian_in_z_packet(z0, width, det, m);
  const double lo = c.grids.t_window[0], hi = c.grids.t_window[1];
  const double centre = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  auto f = out.open("completeness.csv");
  f << "t_lo,t_hi,relative_error,window_sufficient\n";
  std::vector<double> errors;
  for (double s : {0.25, 0.5, 1.0}) {
    const TimeGrid tg = TimeGrid::window(centre - s * half, centre + s * half, c.grids.t_samples);
    const ReconstructionReport rep = completeness_reconstruct(psi, tg);
    errors.push_back(rep.relative_error);
    f << g17(centre - s * half) << ',' << g17(centre + s * half) << ',' << g17(rep.relative_error) << ','
      << (rep.window_sufficient ? 1 : 0) << '\n';
    if (s == 1.0) {
      auto r = out.open("completeness_reconstruction.csv");
      write_reconstruction_csv(r, rep);
    }
  }
  checks.push_back(make_check("completeness", "relative L2 error", errors[2], 1e-4));
  // Each doubling of the window must not raise the error by more than 10%.
  const double worst_ratio = std::max(errors[1] / errors[0], errors[2] / errors[1]);
  checks.push_back(make_check("completeness", "max error ratio per window doubling", worst_ratio, 1.1));
}

void suite_hermiticity(const ExperimentConfig& c, OutputSet& out, std::vector<Check>& checks) {
  const Mass m(c.mass);
  const Detector det(c.detector, RegularizationCut(c.epsilon));
  const RadialGrid grid = operator_grid(m, det);
  std::vector<std::pair<RadialPacket, RadialPacket>> pairs;
  pairs.emplace_back(z_profile_packet(grid, det, m, 6.0, 0.5, 2.0, 0.3), z_profile_packet(grid, det, m, 8.0, 0.6, 1.0, -0.1));
  const double n = c.ordering_exponent;
  std::vector<double> ns{0.0, 0.25, 0.5, 1.0, 0.5 - 1e-2, 0.5 + 1e-4, 0.5 + 1e-3, 0.5 + 1e-2};
  if (std::find(ns.begin(), ns.end(), n) == ns.end()) ns.push_back(n);
  const auto rows = ordering_sweep(ns, pairs);
  auto f = out.open("hermiticity.csv");
  write_sweep_csv(f, rows);
  auto defect = [&](double x) {
    for (const auto& r : rows)
      if (r.n == x) return r.max_defect;
    return std::numeric_limits<double>::quiet_NaN();
  };
  checks.push_back(make_check("hermiticity", "defect at configured n=" + g17(n), defect(n), 1e-8));
  for (double x : {0.0, 0.25, 1.0}) checks.push_back(make_check("hermiticity", "defect at n=" + g17(x), defect(x), 1e-3, false));
  const std::vector<double> dn{1e-4, 1e-3, 1e-2};
  const std::vector<double> dv{defect(0.5 + 1e-4), defect(0.5 + 1e-3), defect(0.5 + 1e-2)};
  checks.push_back(make_check("hermiticity", "|log-log slope in |n-1/2| - 1|", std::abs(loglog_slope(dn, dv) - 1.0), 0.1));
}

void suite_commutator(const ExperimentConfig& c, OutputSet& out, std::vector<Check>& checks) {
  const Mass m(c.mass);
  const Detector det(c.detector, RegularizationCut(c.epsilon));
  const RadialGrid grid = operator_grid(m, det);
  std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> centre(6.0, 10.0), width(0.4, 0.8), freq(-3.0, 3.0), tilt(-0.5, 0.5);
  auto f = out.open("commutator.csv");
  f << "profile,centre,width,frequency,tilt,residual\n";
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double a = centre(rng), s = width(rng), q = freq(rng), t = tilt(rng);
    const double r = commutator_z_check(z_profile_packet(grid, det, m, a, s, q, t));
    worst = std::max(worst, r);
    f << i << ',' << g17(a) << ',' << g17(s) << ',' << g17(q) << ',' << g17(t) << ',' << g17(r) << '\n';
  }
  checks.push_back(make_check("commutator", "max residual", worst, 1e-6));
}

// Arrival-time window wide enough for a Gaussian aimed along its momentum.
std::pair<double, double> classical_window(double L, double k0, double sigma, double m) {
  const double w = std::hypot(k0, m);
  const double v = k0 / w;
  const double tc = L / v;
  const double spread = 1.0 / (2.0 * sigma * v) + L * m * m * sigma / (w * k0 * k0);
  return {tc - 20.0 * spread, tc + 20.0 * spread};
}

// Doubles the window (and the sample count, keeping dt) until the density has
// decayed at both edges.
ArrivalSpectrum spectrum_in_growing_window(const RadialPacket& proj, double lo, double hi, std::size_t n) {
  for (int attempt = 0;; ++attempt) {
    ArrivalSpectrum spec = arrival_amplitude_fft(proj, TimeGrid::window(lo, hi, n));
    if (spec.diagnostics.t_edge_ratio <= 1e-8 || attempt == 6) return spec;
    const double c = 0.5 * (lo + hi), h = hi - lo;
    lo = c - h;
    hi = c + h;
    n *= 2;
  }
}

}  // namespace

// ---- public API -----------------------------------------------------------------

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("config: JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  ExperimentConfig c;
  Reader r(root, "");
  if (r.string("schema") != kConfigSchema)
    throw ConfigError(std::string("config: field 'schema' must be \"") + kConfigSchema + "\"");
  c.mass = r.number("mass");
  if (c.mass < 0.0) throw ConfigError("config: field 'mass' must be >= 0");
  c.epsilon = r.number("epsilon");
  if (!(c.epsilon > 0.0)) throw ConfigError("config: field 'epsilon' must be > 0");
  c.detector = r.vec3("detector");

  {
    Reader p = r.child("packet");
    c.packet.type = p.string("type");
    if (c.packet.type == "gaussian") {
      c.packet.k0 = p.vec3("k0");
      c.packet.sigma = p.number("sigma");
      if (!(c.packet.sigma > 0.0)) throw ConfigError("config: field 'packet.sigma' must be > 0");
      if (p.has("x0")) c.packet.x0 = p.vec3("x0");
    } else if (c.packet.type == "radial-gaussian-in-z") {
      c.packet.z0 = p.number("z0");
      c.packet.width = p.number("width");
      if (!(c.packet.width > 0.0)) throw ConfigError("config: field 'packet.width' must be > 0");
    } else {
      throw ConfigError("config: field 'packet.type' must be \"gaussian\" or \"radial-gaussian-in-z\"");
    }
    p.reject_unknown();
  }

  if (r.has("grids")) {
    Reader g = r.child("grids");
    if (g.has("radial_nodes")) {
      c.grids.radial_nodes = g.unsigned_integer("radial_nodes");
      if (*c.grids.radial_nodes < 16) throw ConfigError("config: field 'grids.radial_nodes' must be >= 16");
    }
    if (g.has("z_window")) {
      const auto w = g.numbers("z_window", 2);
      if (!(w[1] > w[0])) throw ConfigError("config: field 'grids.z_window' must satisfy lo < hi");
      c.grids.z_window = {w[0], w[1]};
    }
    if (g.has("angular_order")) {
      const auto a = g.unsigned_integer("angular_order");
      if (a > 4000) throw ConfigError("config: field 'grids.angular_order' must be <= 4000");
      c.grids.angular_order = static_cast<int>(a);
    }
    if (g.has("t_window")) {
      const auto w = g.numbers("t_window", 2);
      if (!(w[1] > w[0])) throw ConfigError("config: field 'grids.t_window' must satisfy lo < hi");
      c.grids.t_window = {w[0], w[1]};
    }
    if (g.has("t_samples")) {
      c.grids.t_samples = g.unsigned_integer("t_samples");
      if (!power_of_two(c.grids.t_samples) || c.grids.t_samples < 16 || c.grids.t_samples > (1u << 24))
        throw ConfigError("config: field 'grids.t_samples' must be a power of two in [16, 2^24]");
    }
    g.reject_unknown();
  }

  if (r.has("seed")) c.seed = r.unsigned_integer("seed");
  if (r.has("operator")) {
    Reader o = r.child("operator");
    c.ordering_exponent = o.number_or("ordering_exponent", 0.5);
    o.reject_unknown();
  }
  if (r.has("limits")) {
    Reader l = r.child("limits");
    c.limits.T = l.number_or("T", c.limits.T);
    c.limits.X = l.number_or("X", c.limits.X);
    c.limits.kmax = l.number_or("kmax", c.limits.kmax);
    if (!(c.limits.kmax > 0.0)) throw ConfigError("config: field 'limits.kmax' must be > 0");
    l.reject_unknown();
  }
  if (r.has("projection")) {
    c.projection = r.string("projection");
    if (c.projection != "auto" && c.projection != "analytic" && c.projection != "grid")
      throw ConfigError("config: field 'projection' must be \"auto\", \"analytic\" or \"grid\"");
  }
  r.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("config: cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return parse_config(s.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  auto vec = [](const Vec3& v) { return ojson::array({v.x, v.y, v.z}); };
  ojson j;
  j["schema"] = kConfigSchema;
  j["mass"] = c.mass;
  j["epsilon"] = c.epsilon;
  j["detector"] = vec(c.detector);
  ojson p;
  p["type"] = c.packet.type;
  if (c.packet.type == "gaussian") {
    p["k0"] = vec(c.packet.k0);
    p["sigma"] = c.packet.sigma;
    p["x0"] = vec(c.packet.x0);
  } else {
    p["z0"] = c.packet.z0;
    p["width"] = c.packet.width;
  }
  j["packet"] = p;
  ojson g;
  if (c.grids.radial_nodes) g["radial_nodes"] = *c.grids.radial_nodes;
  g["z_window"] = ojson::array({c.grids.z_window[0], c.grids.z_window[1]});
  if (c.grids.angular_order) g["angular_order"] = *c.grids.angular_order;
  g["t_window"] = ojson::array({c.grids.t_window[0], c.grids.t_window[1]});
  g["t_samples"] = c.grids.t_samples;
  j["grids"] = g;
  j["seed"] = c.seed;
  j["operator"] = {{"ordering_exponent", c.ordering_exponent}};
  j["limits"] = {{"T", c.limits.T}, {"X", c.limits.X}, {"kmax", c.limits.kmax}};
  j["projection"] = c.projection;
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : config_to_json(c)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int cmd_spectrum(const ExperimentConfig& c, const RunOptions& opts, std::ostream& log) {
  const Mass m(c.mass);
  const Detector det(c.detector, RegularizationCut(c.epsilon));
  const Projection proj = build_projection(c, det, m);
  const TimeGrid tg = TimeGrid::window(c.grids.t_window[0], c.grids.t_window[1], c.grids.t_samples);
  const ArrivalSpectrum spec = arrival_amplitude_fft(proj.packet, tg);

  OutputSet out(opts.out_dir, "spectrum", c);
  {
    auto f = out.open("spectrum.csv");
    write_spectrum_csv(f, spec, {{"config_hash", out.hash()}, {"packet", c.packet.type}, {"projection", proj.route}});
  }
  ojson s;
  s["P_detect"] = spec.total;
  s["projection_norm2"] = kg_norm2(proj.packet);
  s["membership_residual"] = num(proj.membership_residual);
  s["projection_route"] = proj.route;
  try {
    s["conditional_mean"] = conditional_mean(spec);
    s["stddev"] = spectrum_stddev(spec);
  } catch (const UndefinedConditional& e) {
    s["conditional_mean"] = nullptr;
    s["stddev"] = nullptr;
    s["conditional_note"] = e.what();
  }
  if (c.packet.type == "gaussian") {
    const auto tc = classical_toa({c.packet.x0, c.packet.k0, m}, c.detector);
    s["classical_toa"] = tc ? ojson(*tc) : ojson("never");
  }
  s["resolution"] = spec.diagnostics.resolution;
  s["dt"] = tg.dt;
  s["z_lo"] = spec.diagnostics.z_lo;
  s["dz"] = spec.diagnostics.dz;
  s["t_edge_ratio"] = spec.diagnostics.t_edge_ratio;
  s["z_edge_ratio"] = spec.diagnostics.z_edge_ratio;
  s["warnings"] = spec.diagnostics.warnings;
  out.write_json("summary.json", s);
  out.finish();

  log << "P_detect = " << g17(spec.total) << "\n";
  if (s["conditional_mean"].is_number()) log << "conditional mean = " << g17(s["conditional_mean"].get<double>()) << "\n";
  for (const auto& w : spec.diagnostics.warnings) log << "window: " << w << "\n";
  return spec.diagnostics.warnings.empty() ? 0 : 2;
}

int cmd_verify(const ExperimentConfig& c, const RunOptions& opts, std::ostream& log) {
  static const std::vector<std::pair<std::string, std::function<void(const ExperimentConfig&, OutputSet&, std::vector<Check>&)>>>
      suites{{"orthogonality", suite_orthogonality},
             {"completeness", suite_completeness},
             {"hermiticity", suite_hermiticity},
             {"commutator", suite_commutator}};
  bool known = opts.suite == "all";
  for (const auto& [name, fn] : suites) known = known || name == opts.suite;
  if (!known) throw ConfigError("verify: unknown suite '" + opts.suite + "'");

  OutputSet out(opts.out_dir, "verify", c);
  std::vector<Check> checks;
  for (const auto& [name, fn] : suites)
    if (opts.suite == "all" || opts.suite == name) fn(c, out, checks);

  bool ok = true;
  ojson table = ojson::array();
  char line[200];
  for (const auto& ch : checks) {
    ok = ok && ch.passed;
    table.push_back({{"suite", ch.suite},
                     {"check", ch.name},
                     {"value", num(ch.value)},
                     {"tolerance", ch.tolerance},
                     {"relation", ch.at_most ? "<=" : ">="},
                     {"passed", ch.passed}});
    std::snprintf(line, sizeof line, "%-4s %-14s %-40s %12.4e %s %.1e\n", ch.passed ? "PASS" : "FAIL", ch.suite.c_str(),
                  ch.name.c_str(), ch.value, ch.at_most ? "<=" : ">=", ch.tolerance);
    log << line;
  }
  ojson s;
  s["suite"] = opts.suite;
  s["passed"] = ok;
  s["checks"] = table;
  out.write_json("summary.json", s);
  out.finish(opts.suite);
  return ok ? 0 : 1;
}

int cmd_limits(const ExperimentConfig& c, const RunOptions& opts, std::ostream& log) {
  const Mass m(c.mass);
  if (!(c.mass > 0.0)) throw RegimeError("limits: the non-relativistic limit needs mass > 0");
  if (!(c.limits.kmax < 0.5 * c.mass))
    throw RegimeError("limits: limits.kmax = " + g17(c.limits.kmax) + " is not << mass (need kmax < mass/2)");

  OutputSet out(opts.out_dir, "limits", c);
  std::vector<double> ks, devs;
  {
    auto f = out.open("limits_nr.csv");
    f << "# T=" << g17(c.limits.T) << "\n# X=" << g17(c.limits.X) << "\n# mass=" << g17(c.mass) << '\n';
    f << "kmax,deviation,taylor_bound\n";
    for (int i = 0; i < 10; ++i) {
      const double k = c.limits.kmax * std::pow(10.0, -1.0 + i / 9.0);
      const double d = nr_limit_compare(c.limits.T, c.limits.X, m, k);
      ks.push_back(k);
      devs.push_back(d);
      f << g17(k) << ',' << g17(d) << ',' << g17(std::pow(k, 4) * std::abs(c.limits.T) / (8.0 * std::pow(c.mass, 3)))
        << '\n';
    }
  }
  const bool slope_defined = std::all_of(devs.begin(), devs.end(), [](double d) { return d > 0.0; });
  const double slope = slope_defined ? loglog_slope(ks, devs) : std::numeric_limits<double>::quiet_NaN();

  bool ok = true;
  ojson rows = ojson::array();
  {
    auto f = out.open("limits_classical.csv");
    f << "geometry,m_times_L,k0_over_m,P_detect,conditional_mean,stddev,classical_T,within_2sd\n";
    const RegularizationCut cut(c.epsilon);
    for (double mL : {10.0, 100.0})
      for (double ratio : {0.1, 1.0, 5.0}) {
        const double L = mL / c.mass, k0 = ratio * c.mass, sigma = 0.05 * k0;
        const Detector det({0.0, 0.0, L}, cut);
        const GaussianRecipe r{{0.0, 0.0, k0}, sigma, {}};
        const RadialPacket proj = detected_projection_gaussian(r, m, det, radial_grid_for(r, det.position));
        const auto [lo, hi] = classical_window(L, k0, sigma, c.mass);
        const ArrivalSpectrum spec = spectrum_in_growing_window(proj, lo, hi, c.grids.t_samples);
        const double P = prob_detect(spec);
        const double mean = conditional_mean(spec), sd = spectrum_stddev(spec);
        const double tc = *classical_toa({{}, r.k0, m}, det.position);
        const bool within = std::abs(mean - tc) <= 2.0 * sd;
        ok = ok && within;
        f << "on-axis," << g17(mL) << ',' << g17(ratio) << ',' << g17(P) << ',' << g17(mean) << ',' << g17(sd) << ','
          << g17(tc) << ',' << (within ? 1 : 0) << '\n';
        rows.push_back({{"m_times_L", mL}, {"k0_over_m", ratio}, {"P_detect", P}, {"conditional_mean", mean},
                        {"stddev", sd}, {"classical_T", tc}, {"within_2sd", within}});
      }
  }
  // Same packet as the (m L = 10, k0 = m) row, detector moved off its line of flight.
  double off_cone = 0.0;
  {
    const double L = 10.0 / c.mass, k0 = c.mass;
    const Detector det({L, 0.0, 0.0}, RegularizationCut(c.epsilon));
    const GaussianRecipe r{{0.0, 0.0, k0}, 0.05 * k0, {}};
    const RadialPacket proj = detected_projection_gaussian(r, m, det, radial_grid_for(r, det.position));
    off_cone = kg_norm2(proj);
  }
  ojson s;
  s["nr_slope"] = num(slope);
  s["nr_deviation_at_kmax"] = devs.back();
  s["classical"] = rows;
  s["off_cone_P_detect"] = off_cone;
  s["passed"] = ok;
  out.write_json("summary.json", s);
  out.finish();
  log << "non-relativistic deviation at kmax = " << g17(devs.back()) << ", log-log slope " << g17(slope) << "\n";
  log << "off-cone detection probability = " << g17(off_cone) << "\n";
  log << "classical comparison " << (ok ? "within 2 standard deviations" : "FAILED") << "\n";
  return ok ? 0 : 1;
}

int cmd_packet(const ExperimentConfig& c, std::ostream& out) {
  out << config_to_json(c) << '\n';
  return 0;
}

}  // namespace toa
