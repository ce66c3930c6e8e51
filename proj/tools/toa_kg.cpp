// toa_kg: arrival-time spectra and structural checks for a free Klein-Gordon
// particle and a point detector.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "toa/experiment.hpp"

namespace {

bool power_of_two(std::size_t n) { return n >= 16 && (n & (n - 1)) == 0; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-of-arrival spectra for a free Klein-Gordon particle"};
  app.set_version_flag("--version", TOA_KG_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string suite = "all";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> resolution;

  auto add_common = [&](CLI::App* sub, bool writes) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    if (writes) {
      sub->add_option("--out", out_dir, "output directory");
      sub->add_option("--seed", seed, "override the config seed");
      sub->add_option("--resolution", resolution, "override grids.t_samples (power of two)");
    }
  };
  CLI::App* spectrum = app.add_subcommand("spectrum", "arrival amplitude and density at the detector");
  CLI::App* verify = app.add_subcommand("verify", "orthogonality, completeness, hermiticity and commutator checks");
  CLI::App* limits = app.add_subcommand("limits", "non-relativistic and classical comparisons");
  CLI::App* packet = app.add_subcommand("packet", "print the validated config with defaults filled in");
  add_common(spectrum, true);
  add_common(verify, true);
  add_common(limits, true);
  add_common(packet, false);
  verify->add_option("--suite", suite, "orthogonality|completeness|hermiticity|commutator|all")
      ->check(CLI::IsMember({"orthogonality", "completeness", "hermiticity", "commutator", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    toa::ExperimentConfig config = toa::load_config(config_path);
    if (seed) config.seed = *seed;
    if (resolution) {
      if (!power_of_two(*resolution)) {
        std::cerr << "error: --resolution must be a power of two >= 16\n";
        return 2;
      }
      config.grids.t_samples = *resolution;
    }
    toa::RunOptions opts{out_dir, suite};
    if (*spectrum) return toa::cmd_spectrum(config, opts, std::cout);
    if (*verify) return toa::cmd_verify(config, opts, std::cout);
    if (*limits) return toa::cmd_limits(config, opts, std::cout);
    if (*packet) return toa::cmd_packet(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
