#pragma once

#include <variant>
#include <vector>

#include "cscensor/model.hpp"

namespace cscensor {

/// Per-node design targets: censoring-rate bound alpha, false-alarm bound
/// beta, and the per-transmission costs of a hard decision and a real value.
struct CensorConfig {
  double alpha = 0.5;
  double beta = 0.075;
  double cost_hard = 1.0;
  double cost_value = 2.0;

  /// Throws InvalidDimension unless 0 < alpha, beta < 1 and
  /// cost_value > cost_hard > 0.
  void validate() const;
};

/// Amplitude thresholds of the ternary rule. `clamped` records that the
/// inner threshold hit zero because the censoring budget cannot be met.
struct Thresholds {
  double tau1 = 0.0;
  double tau2 = 0.0;
  bool clamped = false;
};

struct SendValue {
  double z;
};
struct HardZero {};
struct Silent {};

using Decision = std::variant<SendValue, HardZero, Silent>;

struct Priors {
  double pi0;  ///< Pr(support overlap empty)
  double pi1;  ///< Pr(support overlap nonempty)
};

/// Gaussian upper tail probability.
double q_func(double x);

/// Inverse of q_func on (0, 1). Throws DomainError outside.
double q_inv(double p);

Priors priors(const ModelParams& params);

/// P_j = Pr(|T ∩ A| = j | nonempty) for j = 1..K, stored at index j-1.
std::vector<double> overlap_pmf(const ModelParams& params);

/// Precomputed mixture description of z under both hypotheses. Every density
/// and tail function below is a thin wrapper over one of these.
class CensorModel {
 public:
  explicit CensorModel(const ModelParams& params);

  const ModelParams& params() const { return params_; }
  const Priors& prior() const { return priors_; }
  const std::vector<double>& pmf() const { return pmf_; }

  /// variance of z given empty overlap: K_c sigma_v^2
  double noise_variance() const { return noise_var_; }
  /// variance of z given |T ∩ A| = j (1-based j)
  double mixture_variance(std::size_t j) const { return mix_var_[j - 1]; }

  double pdf_empty(double z) const;
  double pdf_nonempty(double z) const;
  double likelihood_ratio(double z) const;
  /// log L(z); finite where L itself overflows
  double log_likelihood_ratio(double z) const;
  double g(double x) const;
  double g_inv(double y) const;

 private:
  ModelParams params_;
  Priors priors_;
  std::vector<double> pmf_;
  double noise_var_;
  std::vector<double> mix_var_;
};

double pdf_empty(double z, const ModelParams& params);
double pdf_nonempty(double z, const ModelParams& params);
double likelihood_ratio(double z, const ModelParams& params);
double g_func(double x, const ModelParams& params);
double g_inv(double y, const ModelParams& params);

/// Optimal thresholds: tau2 from the false-alarm bound, tau1 from g^{-1}.
Thresholds compute_thresholds(const CensorConfig& cfg, const ModelParams& params);

/// Ternary rule. Ties |z| = tau1 or |z| = tau2 fall into the silent band.
Decision censor(double z, const Thresholds& th);

double prob_miss(const Thresholds& th, const ModelParams& params);
double prob_false_alarm(const Thresholds& th, const ModelParams& params);
double prob_censor(const Thresholds& th, const ModelParams& params);

struct CostReport {
  double cost;
  /// The thresholds were clamped; the closed form assumes P_C = alpha and
  /// over-reports the no-send mass in that regime.
  bool clamped_warning;
};

/// Closed-form expected per-node communication cost at the optimal thresholds.
CostReport expected_cost(const CensorConfig& cfg, const ModelParams& params);

/// Expected cost of arbitrary thresholds: C_0 Pr(|z| < tau1) + C_1 Pr(|z| > tau2).
double expected_cost_at(const Thresholds& th, const CensorConfig& cfg, const ModelParams& params);

/// Exhaustive grid search of the miss probability over (tau1, tau2) pairs on
/// a uniform grid, subject to P_C <= alpha and P_F <= beta.
Thresholds brute_force_thresholds(const CensorConfig& cfg, const ModelParams& params, double grid_step);

}  // namespace cscensor
