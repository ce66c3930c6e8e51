#pragma once

// Experiment configuration and the command implementations behind the
// toa_kg executable.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "toa/types.hpp"

namespace toa {

inline constexpr const char* kConfigSchema = "toa-kg/1";

// Invalid configuration; the message names the offending field or line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct PacketConfig {
  std::string type = "gaussian";  // or "radial-gaussian-in-z"
  Vec3 k0{0.0, 0.0, 1.0};
  double sigma = 0.05;
  Vec3 x0{};
  double z0 = 4.0;
  double width = 0.25;
};

struct GridConfig {
  std::optional<std::size_t> radial_nodes;  // lower bound on the radial node count
  std::array<double, 2> z_window{-1.0, 20.0};
  std::optional<int> angular_order;
  std::array<double, 2> t_window{-15.0, 15.0};
  std::size_t t_samples = 16384;
};

struct LimitsConfig {
  double T = 1.0;
  double X = 0.0;
  double kmax = 0.1;
};

struct ExperimentConfig {
  double mass = 1.0;
  double epsilon = 0.1;
  Vec3 detector{};
  PacketConfig packet;
  GridConfig grids;
  std::uint64_t seed = 1;
  double ordering_exponent = 0.5;
  LimitsConfig limits;
  std::string projection = "auto";  // auto | analytic | grid
};

// Parses and validates; throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON with every default filled in; also the input to the hash.
std::string config_to_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);  // FNV-1a 64, hex

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::string suite = "all";
};

// Each command writes its files into out_dir and returns the exit status:
// 0 success, 1 tolerance failure, 2 configuration, regime or window error.
int cmd_spectrum(const ExperimentConfig& config, const RunOptions& opts, std::ostream& log);
int cmd_verify(const ExperimentConfig& config, const RunOptions& opts, std::ostream& log);
int cmd_limits(const ExperimentConfig& config, const RunOptions& opts, std::ostream& log);
int cmd_packet(const ExperimentConfig& config, std::ostream& out);

}  // namespace toa
