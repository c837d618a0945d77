#include "cscensor/censor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "cscensor/error.hpp"

namespace cscensor {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Q(x / sqrt(var)), with the var == 0 limit taken as a step at x = 0.
double scaled_tail(double x, double var) {
  if (var > 0.0) return q_func(x / std::sqrt(var));
  if (x > 0.0) return 0.0;
  return x < 0.0 ? 1.0 : 0.5;
}

double gaussian_pdf(double z, double var) {
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Hypergeometric pmf Pr(|T ∩ A| = j) for j = 0..K as telescoping ratio
// products; no factorial is ever formed.
std::vector<long double> overlap_mass(const ModelParams& p) {
  const long double n = static_cast<long double>(p.N);
  const long double kc = static_cast<long double>(p.K_c);
  std::vector<long double> h(p.K + 1, 0.0L);
  for (std::size_t j = 0; j <= p.K; ++j) {
    long double v = 1.0L;
    for (std::size_t t = 0; t < j; ++t) {
      const long double tt = static_cast<long double>(t);
      v *= (static_cast<long double>(p.K) - tt) / (tt + 1.0L) * (kc - tt) / (n - tt);
    }
    const long double jj = static_cast<long double>(j);
    for (std::size_t t = 0; t < p.K - j; ++t) {
      const long double tt = static_cast<long double>(t);
      v *= (n - kc - tt) / (n - jj - tt);
    }
    h[j] = std::max(v, 0.0L);
  }
  return h;
}

void check_dims(const ModelParams& p) {
  if (p.K < 1 || p.K > p.K_c || p.K_c > p.N) {
    throw InvalidDimension("censor model requires 1 <= K <= K_c <= N");
  }
  if (!(p.sigma_s >= 0.0) || !(p.sigma_v >= 0.0)) throw InvalidDimension("variances must be >= 0");
}

}  // namespace

void CensorConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidDimension("alpha must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidDimension("beta must lie in (0, 1)");
  if (!(cost_hard > 0.0) || !(cost_value > cost_hard)) {
    throw InvalidDimension("costs must satisfy cost_value > cost_hard > 0");
  }
}

double q_func(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double q_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("q_inv requires p in (0, 1), got " + std::to_string(p));
  double x = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  // one Newton step on Q(x) - p tightens the residual to rounding level
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (phi > 0.0) x += (q_func(x) - p) / phi;
  return x;
}

Priors priors(const ModelParams& params) {
  check_dims(params);
  const auto h = overlap_mass(params);
  long double pi1 = 0.0L;
  for (std::size_t j = 1; j < h.size(); ++j) pi1 += h[j];
  return {static_cast<double>(h[0]), static_cast<double>(pi1)};
}

std::vector<double> overlap_pmf(const ModelParams& params) {
  check_dims(params);
  const auto h = overlap_mass(params);
  long double total = 0.0L;
  for (std::size_t j = 1; j < h.size(); ++j) total += h[j];
  std::vector<double> pmf;
  pmf.reserve(params.K);
  for (std::size_t j = 1; j < h.size(); ++j) pmf.push_back(static_cast<double>(h[j] / total));
  return pmf;
}

CensorModel::CensorModel(const ModelParams& params)
    : params_(params),
      priors_(priors(params)),
      pmf_(overlap_pmf(params)),
      noise_var_(static_cast<double>(params.K_c) * params.sigma_v * params.sigma_v) {
  mix_var_.reserve(params.K);
  for (std::size_t j = 1; j <= params.K; ++j) {
    mix_var_.push_back(static_cast<double>(j) * params.sigma_s * params.sigma_s + noise_var_);
  }
}

double CensorModel::pdf_empty(double z) const {
  if (!(noise_var_ > 0.0)) throw DegenerateNoise("pdf_empty requires sigma_v > 0");
  return gaussian_pdf(z, noise_var_);
}

double CensorModel::pdf_nonempty(double z) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < pmf_.size(); ++j) {
    if (!(mix_var_[j] > 0.0)) throw DegenerateNoise("pdf_nonempty requires sigma_v > 0 or sigma_s > 0");
    acc += pmf_[j] * gaussian_pdf(z, mix_var_[j]);
  }
  return acc;
}

double CensorModel::likelihood_ratio(double z) const { return std::exp(log_likelihood_ratio(z)); }

double CensorModel::log_likelihood_ratio(double z) const {
  if (!(noise_var_ > 0.0)) throw DegenerateNoise("likelihood ratio requires sigma_v > 0");
  // log-sum-exp of log P_j + 0.5 log(a / b_j) + (b_j - a) z^2 / (2 a b_j)
  const double ss = params_.sigma_s * params_.sigma_s;
  std::vector<double> terms(pmf_.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pmf_.size(); ++j) {
    if (pmf_[j] <= 0.0) {
      terms[j] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double jss = static_cast<double>(j + 1) * ss;
    terms[j] = std::log(pmf_[j]) + 0.5 * std::log(noise_var_ / mix_var_[j]) +
               jss * z * z / (2.0 * noise_var_ * mix_var_[j]);
    peak = std::max(peak, terms[j]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

double CensorModel::g(double x) const {
  double mixed = 0.0;
  for (std::size_t j = 0; j < pmf_.size(); ++j) mixed += pmf_[j] * scaled_tail(x, mix_var_[j]);
  return 2.0 * priors_.pi0 * scaled_tail(x, noise_var_) + 2.0 * priors_.pi1 * mixed;
}

double CensorModel::g_inv(double y) const {
  if (!(y > 0.0 && y < 2.0)) throw DomainError("g_inv requires y in (0, 2), got " + std::to_string(y));
  if (y == 1.0) return 0.0;
  // g(-x) = 2 - g(x)
  if (y > 1.0) return -g_inv(2.0 - y);
  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) >= y) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw DomainError("g_inv failed to bracket y");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo < 1e-12 * (1.0 + std::abs(mid))) break;
    if (g(mid) >= y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double pdf_empty(double z, const ModelParams& params) { return CensorModel(params).pdf_empty(z); }
double pdf_nonempty(double z, const ModelParams& params) { return CensorModel(params).pdf_nonempty(z); }
double likelihood_ratio(double z, const ModelParams& params) { return CensorModel(params).likelihood_ratio(z); }
double g_func(double x, const ModelParams& params) { return CensorModel(params).g(x); }
double g_inv(double y, const ModelParams& params) { return CensorModel(params).g_inv(y); }

Thresholds compute_thresholds(const CensorConfig& cfg, const ModelParams& params) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InvalidDimension("alpha must lie in (0, 1)");
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) throw InvalidDimension("beta must lie in (0, 1]");
  const CensorModel model(params);
  Thresholds th;
  th.tau2 = cfg.beta >= 1.0 ? 0.0 : std::sqrt(model.noise_variance()) * q_inv(cfg.beta / 2.0);
  const double target = cfg.alpha + model.g(th.tau2);
  if (target < 1.0) {
    th.tau1 = std::min(model.g_inv(target), th.tau2);
  } else {
    th.tau1 = 0.0;
    th.clamped = true;
  }
  return th;
}

Decision censor(double z, const Thresholds& th) {
  const double a = std::abs(z);
  if (a < th.tau1) return HardZero{};
  if (a > th.tau2) return SendValue{z};
  return Silent{};
}

double prob_miss(const Thresholds& th, const ModelParams& params) {
  const CensorModel model(params);
  double acc = 0.0;
  for (std::size_t j = 1; j <= params.K; ++j) {
    acc += model.pmf()[j - 1] * (1.0 - 2.0 * scaled_tail(th.tau1, model.mixture_variance(j)));
  }
  return acc;
}

double prob_false_alarm(const Thresholds& th, const ModelParams& params) {
  const CensorModel model(params);
  return 2.0 * scaled_tail(th.tau2, model.noise_variance());
}

double prob_censor(const Thresholds& th, const ModelParams& params) {
  const CensorModel model(params);
  return model.g(th.tau1) - model.g(th.tau2);
}

CostReport expected_cost(const CensorConfig& cfg, const ModelParams& params) {
  const Thresholds th = compute_thresholds(cfg, params);
  const CensorModel model(params);
  const double cost =
      cfg.cost_hard * (1.0 - cfg.alpha) + (cfg.cost_value - cfg.cost_hard) * model.g(th.tau2);
  return {cost, th.clamped};
}

double expected_cost_at(const Thresholds& th, const CensorConfig& cfg, const ModelParams& params) {
  const CensorModel model(params);
  return cfg.cost_hard * (1.0 - model.g(th.tau1)) + cfg.cost_value * model.g(th.tau2);
}

Thresholds brute_force_thresholds(const CensorConfig& cfg, const ModelParams& params, double grid_step) {
  if (!(grid_step > 0.0)) throw InvalidDimension("grid_step must be > 0");
  const CensorModel model(params);
  if (!(model.noise_variance() > 0.0)) throw DegenerateNoise("grid search requires sigma_v > 0");

  // Beyond ten noise standard deviations the false-alarm probability is below
  // 1e-22, so every feasible tau2 of interest lies inside the grid.
  const double noise_sd = std::sqrt(model.noise_variance());
  const auto n = static_cast<std::size_t>(std::ceil(10.0 * noise_sd / grid_step)) + 1;
  std::vector<double> gv(n), pf(n), pm(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = static_cast<double>(k) * grid_step;
    gv[k] = model.g(tau);
    pf[k] = 2.0 * q_func(tau / noise_sd);
    double miss = 0.0;
    for (std::size_t j = 1; j <= params.K; ++j) {
      miss += model.pmf()[j - 1] * (1.0 - 2.0 * q_func(tau / std::sqrt(model.mixture_variance(j))));
    }
    pm[k] = miss;
  }

  // P_F falls and the censored mass g(tau1) - g(tau2) grows as tau2 moves
  // out, so for each tau1 the only pair worth testing uses the smallest
  // tau2 >= tau1 that meets the false-alarm constraint. Scanning those pairs
  // visits the same optimum as the full double loop.
  std::size_t j_beta = 0;
  while (j_beta < n && pf[j_beta] > cfg.beta) ++j_beta;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  std::size_t best_j = n - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = std::max(i, j_beta);
    if (j >= n) break;
    if (gv[i] - gv[j] > cfg.alpha) continue;
    if (pm[i] < best) {
      best = pm[i];
      best_i = i;
      best_j = j;
    }
  }
  return {static_cast<double>(best_i) * grid_step, static_cast<double>(best_j) * grid_step, best_i == 0};
}

}  // namespace cscensor
