#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cscensor/censor.hpp"
#include "cscensor/config.hpp"
#include "cscensor/fusion.hpp"
#include "cscensor/model.hpp"

namespace cscensor {

inline constexpr std::size_t kNumProtocols = 3;

constexpr std::size_t protocol_index(Protocol p) { return static_cast<std::size_t>(p); }

/// One sensing round: the signal, every node's vector and measurement, and
/// the censoring decisions under `th`.
struct Round {
  SparseSignal signal;
  std::vector<SensingVector> vectors;
  std::vector<double> z;
  std::vector<Decision> decisions;
};

/// Draws the round for (seed, trial). The signal uses stream kSignalStream,
/// node i uses stream i, so a node's draws do not depend on M.
Round simulate_round(const ModelParams& params, const Thresholds& th, std::uint64_t seed, std::uint64_t trial);

struct ProtocolOutcome {
  double sq_rel_error = 0.0;  ///< ||s_hat - s||^2 / ||s||^2
  bool converged = false;
  int iterations = 0;
};

struct TrialRecord {
  std::uint64_t trial = 0;
  std::array<std::optional<ProtocolOutcome>, kNumProtocols> outcomes;
  std::size_t size_I = 0;
  std::size_t size_Ineg1 = 0;
  std::size_t M = 0;
  double fan = 0.0;   ///< (size_I + size_Ineg1) / M
  double cost = 0.0;  ///< realized per-node cost of the censored round

  const std::optional<ProtocolOutcome>& outcome(Protocol p) const { return outcomes[protocol_index(p)]; }
};

/// Everything run_trial needs that does not change between trials.
struct TrialContext {
  ExperimentConfig cfg;
  ModelParams params;
  Thresholds thresholds;

  explicit TrialContext(const ExperimentConfig& config);
};

/// Deterministic in (cfg.seed, trial). `batch_out`, when given, receives the
/// censored fusion batch.
TrialRecord run_trial(const TrialContext& ctx, std::uint64_t trial, FusionBatch<double>* batch_out = nullptr);
TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial);

/// Trials 0..cfg.trials-1 over a worker pool; output order is trial order.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg);

struct ProtocolSummary {
  Protocol protocol;
  double nmse = 0.0;       ///< mean squared relative error
  double nmse_ci95 = 0.0;  ///< half-width, normal approximation
  double nmse_db = 0.0;
  double nmse_db_lo = 0.0;
  double nmse_db_hi = 0.0;
  double fan_mean = 0.0;
  double fan_ci95 = 0.0;
  double cost_mean = 0.0;
  double cost_ci95 = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;  ///< solves that did not converge
};

std::vector<ProtocolSummary> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records);

struct SweepRow {
  double sweep_value = 0.0;
  ProtocolSummary summary;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t solves = 0;
  std::size_t failures = 0;

  double failure_fraction() const { return solves ? static_cast<double>(failures) / static_cast<double>(solves) : 0.0; }
};

/// Requires cfg.sweep. Each sweep point reuses cfg.seed.
SweepResult run_sweep(const ExperimentConfig& cfg);

/// Header plus one line per row; numbers in shortest round-trip form.
void write_csv(std::ostream& out, const SweepResult& result, std::uint64_t seed);

}  // namespace cscensor
