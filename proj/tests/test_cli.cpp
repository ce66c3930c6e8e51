// End-to-end runs of the toa_kg executable: exit statuses and determinism.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "toa_kg_cli_test";

struct Run {
  int status;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt", err = kWork / "stderr.txt";
  const std::string cmd = std::string("\"") + TOA_KG_EXE + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

std::string config(const std::string& name) { return std::string(TOA_KG_CONFIGS) + "/" + name; }

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p) << text;
  return p;
}

std::string edited_defaults(const std::function<void(nlohmann::json&)>& edit) {
  nlohmann::json j = nlohmann::json::parse(slurp(config("defaults.json")));
  edit(j);
  return j.dump();
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help").status == 0);
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("spectrum").status == 2);
  CHECK(run("spectrum --config /nonexistent.json").status == 2);
  CHECK(run("verify --config " + config("defaults.json") + " --suite nothing").status == 2);
}

TEST_CASE("spectrum is deterministic and writes a manifest") {
  const fs::path a = kWork / "spec_a", b = kWork / "spec_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const Run r1 = run("spectrum --config " + config("on_axis_gaussian.json") + " --out " + a.string());
  const Run r2 = run("spectrum --config " + config("on_axis_gaussian.json") + " --out " + b.string());
  REQUIRE(r1.status == 0);
  REQUIRE(r2.status == 0);
  CHECK(slurp(a / "spectrum.csv") == slurp(b / "spectrum.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(m["command"] == "spectrum");
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m["outputs"].size() == 2);
  CHECK(m.contains("started_utc"));
  CHECK(m.contains("version"));

  const auto s = nlohmann::json::parse(slurp(a / "summary.json"));
  const double P = s["P_detect"];
  CHECK(P > 0.0);
  CHECK(P <= 1.0);
  CHECK(std::abs(s["conditional_mean"].get<double>() - s["classical_toa"].get<double>()) <=
        2.0 * s["stddev"].get<double>());
}

TEST_CASE("subspace packet is detected with certainty") {
  const fs::path d = kWork / "subspace";
  REQUIRE(run("spectrum --config " + config("subspace_packet.json") + " --out " + d.string()).status == 0);
  const auto s = nlohmann::json::parse(slurp(d / "summary.json"));
  CHECK(std::abs(s["P_detect"].get<double>() - 1.0) <= 1e-4);
}

TEST_CASE("truncated window is a nonzero exit") {
  const fs::path p = write_config("narrow.json", edited_defaults([](nlohmann::json& j) {
                                    j["grids"]["t_window"] = {-3, 3};
                                  }));
  const Run r = run("spectrum --config " + p.string() + " --out " + (kWork / "narrow").string());
  CHECK(r.status == 2);
  CHECK(r.out.find("window") != std::string::npos);
}

TEST_CASE("config errors exit 2 and name the field") {
  const fs::path p = write_config("missing.json", edited_defaults([](nlohmann::json& j) { j.erase("mass"); }));
  const Run r = run("spectrum --config " + p.string() + " --out " + (kWork / "missing").string());
  CHECK(r.status == 2);
  CHECK(r.err.find("'mass'") != std::string::npos);
  const fs::path q = write_config("syntax.json", "{\n  \"schema\": \"toa-kg/1\"\n  \"mass\": 1\n}");
  const Run s = run("packet --config " + q.string());
  CHECK(s.status == 2);
  CHECK(s.err.find("line 3") != std::string::npos);
}

TEST_CASE("verify on defaults passes, forced n = 0 fails") {
  const Run ok = run("verify --config " + config("defaults.json") + " --out " + (kWork / "verify").string());
  CHECK(ok.status == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  CHECK(fs::exists(kWork / "verify" / "orthogonality.csv"));
  CHECK(fs::exists(kWork / "verify" / "commutator.csv"));
  const auto s = nlohmann::json::parse(slurp(kWork / "verify" / "summary.json"));
  CHECK(s["passed"] == true);

  const fs::path p = write_config("n0.json", edited_defaults([](nlohmann::json& j) {
                                    j["operator"] = {{"ordering_exponent", 0.0}};
                                  }));
  const Run bad = run("verify --config " + p.string() + " --suite hermiticity --out " + (kWork / "n0").string());
  CHECK(bad.status == 1);
  CHECK(bad.out.find("FAIL") != std::string::npos);

  const Run comm = run("verify --config " + config("defaults.json") + " --suite commutator --out " +
                       (kWork / "comm").string());
  CHECK(comm.status == 0);
  const auto c = nlohmann::json::parse(slurp(kWork / "comm" / "summary.json"));
  CHECK(c["checks"][0]["value"].get<double>() <= 1e-6);
}

TEST_CASE("verify CSVs are deterministic under a fixed seed") {
  const std::string base = "verify --config " + config("defaults.json") + " --suite orthogonality --seed 9 --out ";
  REQUIRE(run(base + (kWork / "o1").string()).status == 0);
  REQUIRE(run(base + (kWork / "o2").string()).status == 0);
  CHECK(slurp(kWork / "o1" / "orthogonality.csv") == slurp(kWork / "o2" / "orthogonality.csv"));
  REQUIRE(run("verify --config " + config("defaults.json") + " --suite orthogonality --seed 10 --out " +
              (kWork / "o3").string())
              .status == 0);
  CHECK(slurp(kWork / "o1" / "orthogonality.csv") != slurp(kWork / "o3" / "orthogonality.csv"));
}

TEST_CASE("limits: slope-4 table, regime rejection") {
  const fs::path d = kWork / "limits";
  REQUIRE(run("limits --config " + config("defaults.json") + " --out " + d.string()).status == 0);
  const auto s = nlohmann::json::parse(slurp(d / "summary.json"));
  CHECK(std::abs(s["nr_slope"].get<double>() - 4.0) <= 0.1);
  CHECK(s["passed"] == true);
  CHECK(fs::exists(d / "limits_nr.csv"));
  CHECK(fs::exists(d / "limits_classical.csv"));

  const fs::path p = write_config("ultra.json", edited_defaults([](nlohmann::json& j) {
                                    j["limits"] = {{"kmax", 50.0}};
                                  }));
  CHECK(run("limits --config " + p.string() + " --out " + (kWork / "ultra").string()).status == 2);
}

TEST_CASE("packet prints the normalized config") {
  const Run r = run("packet --config " + config("defaults.json"));
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema"] == "toa-kg/1");
  CHECK(j["grids"]["t_samples"] == 16384);
  CHECK(j["operator"]["ordering_exponent"] == 0.5);
}

TEST_CASE("overrides on the command line") {
  const fs::path d = kWork / "res";
  REQUIRE(run("spectrum --config " + config("subspace_packet.json") + " --resolution 8192 --out " + d.string()).status ==
          0);
  std::ifstream f(d / "spectrum.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(f, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == 8193);
  CHECK(run("spectrum --config " + config("subspace_packet.json") + " --resolution 1000 --out " + d.string()).status == 2);
}
