#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aoi/types.hpp"

// Batch experiments: a JSON document describes a base system and an
// optional one-parameter sweep; the runner writes one CSV row per grid
// value (and strategy or scheme where the mode has one).
namespace aoi::experiment {

enum class Mode { Analytic, Simulate, Compare, AlphaThreshold, BetaThreshold, Dynamic };

std::string_view to_string(Mode mode);
// Throws ConfigError for unknown names.
Mode parse_mode(std::string_view name);

// Bad configuration.  The message names the offending field or, for
// syntax errors, the line and column.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Homogeneous description plus optional explicit per-UE lists.  When the
// lists are given they replace n_ues/bits/coding_rate/snr.
struct SystemSection {
  std::size_t n_ues = 3;
  double gen_rate = 0.002;
  double bits = 100.0;
  double coding_rate = 0.8;
  double snr = 3.0;
  double overhead = 10.0;
  double alpha = 1.0;
  DispersionForm dispersion = DispersionForm::AsPrinted;
  std::vector<double> ue_bits;
  std::vector<double> ue_blocklength;
  std::vector<double> ue_snr;
  std::optional<double> broadcast_bits;
  std::optional<double> broadcast_blocklength;

  bool explicit_lists() const { return !ue_bits.empty(); }
  SystemConfig build() const;
};

struct DynamicSection {
  DynamicConfig cfg;
  std::size_t realizations = 10000;
  std::optional<double> rate_backoff;
};

struct SimulationSection {
  double horizon = 2e6;
  double warmup_fraction = 0.1;
  std::size_t replications = 20;
  std::size_t threads = 0;
};

// Swept parameter names: R, lambda, N, alpha, beta.
struct Sweep {
  std::string parameter;
  std::vector<double> values;
};

struct ExperimentSpec {
  Mode mode = Mode::Analytic;
  SystemSection system;
  std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::optional<Sweep> sweep;
  SimulationSection simulation;
  DynamicSection dynamic;
  std::uint64_t seed = 1;

  // Checks the sweep against the mode and every grid point's config.
  void validate() const;
};

// Parses a JSON document.  Unknown keys are rejected.
ExperimentSpec parse_spec(std::string_view json_text, Mode mode);
ExperimentSpec load_spec(const std::string& path, Mode mode);

struct RunSummary {
  std::size_t rows = 0;
  std::size_t error_rows = 0;  // rows whose flags carry a computation error
  std::size_t failed_checks = 0;  // compare mode: analytic outside the CI
};

// Writes the CSV (header included) for the spec.  Per-point computation
// errors go into the row's flags column and do not stop the run.
RunSummary run(const ExperimentSpec& spec, std::ostream& csv);

}  // namespace aoi::experiment
