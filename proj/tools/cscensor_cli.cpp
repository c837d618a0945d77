// cscensor: thresholds, single trials, sweeps and verification reports for
// censored compressive sensing over a sensor network.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cscensor/analysis.hpp"
#include "cscensor/batch_io.hpp"
#include "cscensor/config.hpp"
#include "cscensor/error.hpp"
#include "cscensor/experiment.hpp"
#include "cscensor/recovery.hpp"

namespace {

using namespace cscensor;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string out_path;
};

ExperimentConfig load_config(const GlobalArgs& args) {
  KeyValues kv;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw ConfigError("cannot open config file '" + args.config_path + "'");
    kv = parse_key_values(in);
  }
  for (const auto& text : args.overrides) {
    auto [key, value] = parse_override(text);
    kv[key] = value;
  }
  if (args.seed) kv["seed"] = std::to_string(*args.seed);
  // a file that names sigma_v is overridden by --set snr_db=..., and vice versa
  for (const auto& text : args.overrides) {
    const std::string key = parse_override(text).first;
    if (key == "snr_db") kv.erase("sigma_v");
    if (key == "sigma_v") kv.erase("snr_db");
  }
  return config_from_key_values(kv);
}

/// Writes to --out when given, stdout otherwise.
template <typename Emit>
void emit(const GlobalArgs& args, Emit&& body) {
  if (args.out_path.empty()) {
    body(std::cout);
    return;
  }
  std::ofstream out(args.out_path);
  if (!out) throw ConfigError("cannot open output file '" + args.out_path + "'");
  body(out);
}

void kv_line(std::ostream& out, const char* key, double value) { out << key << '=' << to_text(value) << '\n'; }

int cmd_thresholds(const GlobalArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const ModelParams p = cfg.resolved_model();
  const Thresholds th = compute_thresholds(cfg.censor, p);
  const CostReport cost = expected_cost(cfg.censor, p);
  const Priors pr = priors(p);
  emit(args, [&](std::ostream& out) {
    kv_line(out, "sigma_v", p.sigma_v);
    kv_line(out, "pi0", pr.pi0);
    kv_line(out, "pi1", pr.pi1);
    kv_line(out, "tau1", th.tau1);
    kv_line(out, "tau2", th.tau2);
    out << "clamped=" << (th.clamped ? "true" : "false") << '\n';
    kv_line(out, "P_M", prob_miss(th, p));
    kv_line(out, "P_F", prob_false_alarm(th, p));
    kv_line(out, "P_C", prob_censor(th, p));
    kv_line(out, "expected_cost", cost.cost);
    out << "cost_clamped_warning=" << (cost.clamped_warning ? "true" : "false") << '\n';
  });
  return 0;
}

int cmd_oracle_check(const GlobalArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const ModelParams p = cfg.resolved_model();
  const Thresholds th = compute_thresholds(cfg.censor, p);
  const double step = cfg.grid_step_ratio * std::sqrt(static_cast<double>(p.K_c)) * p.sigma_v;
  if (!(step > 0.0)) throw ConfigError("oracle-check needs sigma_v > 0");
  const Thresholds grid = brute_force_thresholds(cfg.censor, p, step);
  const double pm = prob_miss(th, p);
  const double pm_grid = prob_miss(grid, p);
  const bool match = std::abs(th.tau1 - grid.tau1) <= 2.0 * step && std::abs(th.tau2 - grid.tau2) <= 2.0 * step &&
                     std::abs(pm - pm_grid) <= 1e-4;
  emit(args, [&](std::ostream& out) {
    kv_line(out, "grid_step", step);
    kv_line(out, "tau1", th.tau1);
    kv_line(out, "tau2", th.tau2);
    kv_line(out, "grid_tau1", grid.tau1);
    kv_line(out, "grid_tau2", grid.tau2);
    kv_line(out, "P_M", pm);
    kv_line(out, "grid_P_M", pm_grid);
    out << "match=" << (match ? "true" : "false") << '\n';
  });
  return match ? 0 : 1;
}

int cmd_trial(const GlobalArgs& args, std::uint64_t index, const std::string& batch_out) {
  const ExperimentConfig cfg = load_config(args);
  const TrialContext ctx(cfg);
  FusionBatch<double> batch;
  const TrialRecord rec = run_trial(ctx, index, &batch);
  if (!batch_out.empty()) {
    std::ofstream out(batch_out);
    if (!out) throw ConfigError("cannot open batch file '" + batch_out + "'");
    write_batch(out, batch);
  }
  emit(args, [&](std::ostream& out) {
    out << "trial=" << rec.trial << "\nsize_I=" << rec.size_I << "\nsize_Ineg1=" << rec.size_Ineg1 << '\n';
    kv_line(out, "fan", rec.fan);
    kv_line(out, "cost", rec.cost);
    for (Protocol proto : cfg.protocols) {
      const ProtocolOutcome& o = *rec.outcome(proto);
      const std::string name(protocol_name(proto));
      out << name << ".sq_rel_error=" << to_text(o.sq_rel_error) << '\n'
          << name << ".converged=" << (o.converged ? "true" : "false") << '\n'
          << name << ".iterations=" << o.iterations << '\n';
    }
  });
  return 0;
}

int cmd_sweep(const GlobalArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  if (!cfg.sweep) throw ConfigError("sweep: set 'sweep' and 'sweep_values'");
  const SweepResult result = run_sweep(cfg);
  emit(args, [&](std::ostream& out) { write_csv(out, result, cfg.seed); });
  if (result.failure_fraction() > cfg.failure_threshold) {
    std::cerr << "cscensor: solver failure fraction " << to_text(result.failure_fraction())
              << " exceeds threshold " << to_text(cfg.failure_threshold) << '\n';
    return kExitSolver;
  }
  return 0;
}

int cmd_rip_check(const GlobalArgs& args, std::uint64_t index, const std::string& norm_name) {
  const ExperimentConfig cfg = load_config(args);
  RipNormalization norm;
  if (norm_name == "inverse_count") {
    norm = RipNormalization::kInverseCount;
  } else if (norm_name == "inverse_sqrt_rho_count") {
    norm = RipNormalization::kInverseSqrtRhoCount;
  } else {
    throw ConfigError("rip-check: unknown normalization '" + norm_name + "'");
  }
  const TrialContext ctx(cfg);
  const ModelParams& p = ctx.params;
  FusionBatch<double> batch;
  run_trial(ctx, index, &batch);
  if (batch.set_I.empty()) throw ConfigError("rip-check: trial has no value-sending nodes");

  const StackedOperator<double> op = stack_operator(batch, cfg.lambda);
  const Eigen::MatrixXd A_pinv = pseudo_inverse(op);
  const Eigen::MatrixXd B = rip_operator(batch, A_pinv, p.rho(), norm);
  const auto rip_k = rip_constant(B, p.K);
  const auto rip_2k = rip_constant(B, std::min<std::size_t>(2 * p.K, static_cast<std::size_t>(B.cols())));
  const auto ext = restricted_extremes(A_pinv, p.K);

  emit(args, [&](std::ostream& out) {
    out << "size_I=" << batch.set_I.size() << "\nsize_Ineg1=" << batch.set_Ineg1.size() << '\n';
    kv_line(out, "sigma_min_A", sigma_min(op));
    kv_line(out, "delta_K", rip_k.delta);
    kv_line(out, "delta_2K", rip_2k.delta);
    kv_line(out, "s_min_A_pinv_K", ext.s_min);
    kv_line(out, "s_max_A_pinv_K", ext.s_max);
    kv_line(out, "epsilon", epsilon_policy(batch.set_I.size(), p));
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Censored compressive sensing for sensor networks"};
  app.require_subcommand(1);
  GlobalArgs args;
  app.add_option("--config", args.config_path, "key=value configuration file");
  app.add_option("--seed", args.seed, "master seed (overrides the config)");
  app.add_option("--set", args.overrides, "override a configuration key, key=value");
  app.add_option("--out", args.out_path, "write the report or CSV here instead of stdout");

  auto* thresholds = app.add_subcommand("thresholds", "optimal censoring thresholds and closed-form rates");
  auto* oracle = app.add_subcommand("oracle-check", "compare the closed-form thresholds with a grid search");

  std::uint64_t trial_index = 0;
  std::string batch_out;
  auto* trial = app.add_subcommand("trial", "run one Monte-Carlo trial");
  trial->add_option("--index", trial_index, "trial index");
  trial->add_option("--batch-out", batch_out, "write the fusion batch in columnar text form");

  auto* sweep = app.add_subcommand("sweep", "run the configured sweep and emit CSV");

  std::string norm_name = "inverse_count";
  auto* rip = app.add_subcommand("rip-check", "restricted isometry report for one trial (small N)");
  rip->add_option("--index", trial_index, "trial index");
  rip->add_option("--normalization", norm_name, "inverse_count or inverse_sqrt_rho_count");

  for (auto* sub : {thresholds, oracle, trial, sweep, rip}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*thresholds) return cmd_thresholds(args);
    if (*oracle) return cmd_oracle_check(args);
    if (*trial) return cmd_trial(args, trial_index, batch_out);
    if (*sweep) return cmd_sweep(args);
    if (*rip) return cmd_rip_check(args, trial_index, norm_name);
  } catch (const ConfigError& e) {
    std::cerr << "cscensor: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cscensor: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "cscensor: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::length_error& e) {
    std::cerr << "cscensor: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
