#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cscensor/censor.hpp"
#include "cscensor/model.hpp"

namespace cscensor {

enum class Protocol { kCsL1, kCscL1, kCscModifiedL1 };

std::string_view protocol_name(Protocol p);
Protocol parse_protocol(std::string_view name);

struct Sweep {
  std::string param;  ///< one of M, snr_db, alpha, beta, lambda
  std::vector<double> values;
};

/// Everything a run needs. Built from flat key=value text plus overrides.
struct ExperimentConfig {
  ModelParams model{500, 5, 20, 1.0, 0.0, 350};
  std::optional<double> snr_db;
  std::optional<double> sigma_v;
  CensorConfig censor;
  double lambda = 1.0;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::vector<Protocol> protocols{Protocol::kCsL1, Protocol::kCscL1, Protocol::kCscModifiedL1};
  std::optional<Sweep> sweep;

  bool csc_use_hard_rows = true;
  double epsilon_scale = 1.0;  ///< multiplies the epsilon policy
  int max_iterations = 20000;
  double residual_tolerance = 1e-7;
  double failure_threshold = 0.05;
  unsigned threads = 0;  ///< 0 = hardware concurrency
  double grid_step_ratio = 1e-3;  ///< oracle-check grid step, in units of the empty-overlap noise sd

  /// model with sigma_v resolved from snr_db when needed
  ModelParams resolved_model() const;

  /// Copy with one sweep parameter set.
  ExperimentConfig with_param(std::string_view name, double value) const;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
  /// validate() minus the sweep check.
  void validate_point() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError.
KeyValues parse_key_values(std::istream& in);

/// Parses a single `key=value` override.
std::pair<std::string, std::string> parse_override(std::string_view text);

/// Builds a validated config from key/value pairs. Unknown keys are errors.
ExperimentConfig config_from_key_values(const KeyValues& kv);

/// key=value dump of a config, readable by parse_key_values.
std::string describe(const ExperimentConfig& cfg);

}  // namespace cscensor
