#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aoi/experiment.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace aoi::experiment;

namespace {

struct Result {
  int status = -1;
  std::string csv;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("aoi_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result lab(const std::string& mode, const std::string& config, const std::string& extra = "") {
  static int counter = 0;
  const auto id = std::to_string(++counter);
  const auto cfg = scratch() / ("cfg" + id + ".json");
  const auto out = scratch() / ("out" + id + ".csv");
  const auto err = scratch() / ("err" + id + ".txt");
  std::ofstream(cfg) << config;
  const std::string cmd = std::string(AOI_LAB_PATH) + " " + mode + " --config " + cfg.string() +
                          " --out " + out.string() + " " + extra + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  Result r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  if (fs::exists(out)) r.csv = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    out.push_back(cells);
  }
  return out;
}

const char* kRemoteControl = R"({
  "system": {"gen_rate": 0.002, "bits": 100, "coding_rate": 0.8, "snr": 3, "overhead": 20},
  "sweep": {"parameter": "N", "values": [1, 3, 5, 7]}
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("single point sweep gives a single row") {
  const auto r = lab("analytic", R"({"strategies": ["DNP"], "sweep": {"parameter": "R", "values": [0.8]}})");
  CHECK(r.status == 0);
  const auto t = rows(r.csv);
  REQUIRE(t.size() == 2);
  CHECK(t[0][0] == "R");
  CHECK(t[1][0] == "0.8");
  CHECK(t[1][1] == "DNP");
  CHECK(std::isfinite(std::stod(t[1][2])));
}

TEST_CASE("analytic sweep covers grid times strategies") {
  const auto r = lab("analytic", R"({"sweep": {"parameter": "lambda", "values": [0.001, 0.002, 0.004]}})");
  CHECK(r.status == 0);
  const auto t = rows(r.csv);
  REQUIRE(t.size() == 1 + 3 * 5);
  CHECK(t[0] == std::vector<std::string>{"lambda", "strategy", "analytic_aoi", "simulated_aoi",
                                         "ci_half_width", "block_error_rate", "flags"});
  for (std::size_t i = 1; i < t.size(); ++i) {
    const bool numbers_ok = std::isfinite(std::stod(t[i][2])) && std::isfinite(std::stod(t[i][5]));
    CHECK((numbers_ok || !t[i][6].empty()));
  }
}

TEST_CASE("same spec and seed give identical bytes") {
  const char* spec = R"({"strategies": ["DPS", "BRNP"],
    "sweep": {"parameter": "R", "values": [0.6, 0.8]},
    "simulation": {"horizon": 100000, "replications": 4}})";
  const auto a = lab("compare", spec, "--seed 7");
  const auto b = lab("compare", spec, "--seed 7");
  const auto c = lab("compare", spec, "--seed 8");
  CHECK(a.status == 0);
  CHECK(!a.csv.empty());
  CHECK(a.csv == b.csv);
  CHECK(a.csv != c.csv);
  const auto t = rows(a.csv);
  REQUIRE(t.size() == 5);
  CHECK(t[0].back() == "pass");
  for (std::size_t i = 1; i < t.size(); ++i) CHECK((t[i].back() == "pass" || t[i].back() == "fail"));
}

TEST_CASE("command line overrides") {
  const char* spec = R"({"strategies": ["DNP"], "simulation": {"horizon": 100000, "replications": 3}})";
  const auto a = lab("simulate", spec, "--replications 5 --horizon 50000");
  CHECK(a.status == 0);
  const auto b = lab("simulate", R"({"strategies": ["DNP"], "simulation": {"horizon": 50000, "replications": 5}})");
  CHECK(a.csv == b.csv);
}

TEST_CASE("alpha threshold decreases in N") {
  const auto r = lab("alpha-threshold", kRemoteControl);
  CHECK(r.status == 0);
  const auto t = rows(r.csv);
  REQUIRE(t.size() == 5);
  CHECK(t[0][4] == "alpha_threshold");
  for (std::size_t i = 2; i < t.size(); ++i) CHECK(std::stod(t[i][4]) < std::stod(t[i - 1][4]));
}

TEST_CASE("dynamic and beta threshold modes") {
  const char* spec = R"({"dynamic": {"ue_intensity": 0.005, "outer_snr": 10, "realizations": 2000},
    "sweep": {"parameter": "beta", "values": [0, 1]}})";
  const auto d = lab("dynamic", spec);
  CHECK(d.status == 0);
  CHECK(rows(d.csv).size() == 5);
  const auto b = lab("beta-threshold", spec);
  CHECK(b.status == 0);
  const auto t = rows(b.csv);
  REQUIRE(t.size() == 3);
  CHECK(t[1][4] == t[2][4]);  // the threshold does not depend on beta itself
}

TEST_CASE("computation errors are flagged and give exit 1") {
  const auto r = lab("dynamic", R"({"dynamic": {"ref_snr": 2, "realizations": 200}})");
  CHECK(r.status == 1);
  const auto t = rows(r.csv);
  REQUIRE(t.size() == 3);
  CHECK(t[1][1] == "broadcast");
  CHECK(t[1].back().empty());
  CHECK(t[2].back().find("error") != std::string::npos);
}

TEST_CASE("configuration errors give exit 2") {
  auto r = lab("analytic", "{\"system\": {\"n_ues\": 3,}}");
  CHECK(r.status == 2);
  CHECK(r.err.find("line 1") != std::string::npos);
  r = lab("analytic", R"({"system": {"n_uez": 3}})");
  CHECK(r.status == 2);
  CHECK(r.err.find("system.n_uez") != std::string::npos);
  r = lab("analytic", R"({"sweep": {"parameter": "R", "values": [0.8, 0.7]}})");
  CHECK(r.status == 2);
  r = lab("analytic", R"({"sweep": {"parameter": "beta", "values": [1]}})");
  CHECK(r.status == 2);
  r = lab("analytic", R"({"strategies": ["XYZ"]})");
  CHECK(r.status == 2);
  r = lab("frobnicate", "{}");
  CHECK(r.status == 2);
  CHECK(r.csv.empty());
}

TEST_CASE("parse_spec in process") {
  const auto s = parse_spec(R"({"system": {"ue_bits": [100, 120], "ue_blocklength": [125, 150],
      "ue_snr": [3, 4], "broadcast_bits": 200, "broadcast_blocklength": 260,
      "dispersion_form": "squared"}, "seed": 11})",
                            Mode::Analytic);
  CHECK(s.seed == 11);
  const auto cfg = s.system.build();
  CHECK(cfg.n_ues() == 2);
  CHECK(cfg.dispersion == aoi::DispersionForm::Squared);
  CHECK_THROWS_AS(parse_spec(R"({"system": {"ue_bits": [100]}})", Mode::Analytic), ConfigError);
  CHECK_THROWS_AS(parse_spec(R"({"system": {"alpha": 1.5}})", Mode::Analytic), ConfigError);
  CHECK_THROWS_AS(parse_spec(R"({"sweep": {"parameter": "N", "values": [1.5]}})", Mode::Analytic),
                  ConfigError);
  CHECK_THROWS_AS(parse_spec(R"({"simulation": {"replications": 1}})", Mode::Compare), ConfigError);
  CHECK_NOTHROW(parse_spec(R"({"simulation": {"replications": 1}})", Mode::Analytic));
}

}  // TEST_SUITE
