#include "cscensor/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "cscensor/analysis.hpp"
#include "cscensor/batch_io.hpp"
#include "cscensor/error.hpp"
#include "cscensor/recovery.hpp"

namespace cscensor {
namespace {

SolverOptions<double> solver_options(const ExperimentConfig& cfg) {
  SolverOptions<double> opts;
  opts.lambda = cfg.lambda;
  opts.max_iterations = cfg.max_iterations;
  opts.residual_tolerance = cfg.residual_tolerance;
  opts.csc_use_hard_rows = cfg.csc_use_hard_rows;
  return opts;
}

ProtocolOutcome evaluate(const L1Program<double>& prog, const SolverOptions<double>& opts,
                         const Eigen::VectorXd& s_true) {
  const RecoverySolution<double> sol = solve(prog, opts);
  ProtocolOutcome out;
  out.sq_rel_error = (sol.s_hat - s_true).squaredNorm() / s_true.squaredNorm();
  out.converged = sol.converged;
  out.iterations = sol.iterations;
  return out;
}

double db(double x) { return 10.0 * std::log10(x); }

struct MeanCi {
  double mean = 0.0;
  double ci95 = 0.0;
};

template <typename Get>
MeanCi mean_ci(const std::vector<TrialRecord>& records, Get get) {
  const double n = static_cast<double>(records.size());
  double sum = 0.0;
  for (const auto& r : records) sum += get(r);
  const double mean = sum / n;
  if (records.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const auto& r : records) ss += (get(r) - mean) * (get(r) - mean);
  return {mean, 1.959963984540054 * std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

Round simulate_round(const ModelParams& params, const Thresholds& th, std::uint64_t seed, std::uint64_t trial) {
  Round round;
  Rng signal_rng = Rng::substream(seed, trial, kSignalStream);
  const IndexSet support = draw_support(params.N, params.K, signal_rng);
  round.signal = draw_signal(params.N, support, params.sigma_s, signal_rng);
  round.vectors.reserve(params.M);
  round.z.reserve(params.M);
  round.decisions.reserve(params.M);
  for (std::size_t i = 0; i < params.M; ++i) {
    Rng node_rng = Rng::substream(seed, trial, i);
    round.vectors.push_back(draw_sensing_vector(params, node_rng));
    round.z.push_back(measure(round.signal, round.vectors.back(), params.sigma_v, node_rng));
    round.decisions.push_back(censor(round.z.back(), th));
  }
  return round;
}

TrialContext::TrialContext(const ExperimentConfig& config)
    : cfg(config), params(config.resolved_model()), thresholds(compute_thresholds(config.censor, params)) {}

TrialRecord run_trial(const TrialContext& ctx, std::uint64_t trial, FusionBatch<double>* batch_out) {
  const ModelParams& p = ctx.params;
  const Round round = simulate_round(p, ctx.thresholds, ctx.cfg.seed, trial);
  const Eigen::VectorXd s_true = round.signal.dense();
  FusionBatch<double> batch = collect<double>(round.decisions, round.vectors);

  TrialRecord rec;
  rec.trial = trial;
  rec.M = p.M;
  rec.size_I = batch.set_I.size();
  rec.size_Ineg1 = batch.set_Ineg1.size();
  rec.fan = fan(batch.num_active(), p.M);
  rec.cost = (ctx.cfg.censor.cost_hard * static_cast<double>(rec.size_Ineg1) +
              ctx.cfg.censor.cost_value * static_cast<double>(rec.size_I)) /
             static_cast<double>(p.M);

  const SolverOptions<double> opts = solver_options(ctx.cfg);
  const double scale = ctx.cfg.epsilon_scale;
  for (Protocol proto : ctx.cfg.protocols) {
    L1Program<double> prog;
    switch (proto) {
      case Protocol::kCsL1: {
        Eigen::MatrixXd Phi(static_cast<Eigen::Index>(p.M), static_cast<Eigen::Index>(p.N));
        Eigen::VectorXd u(static_cast<Eigen::Index>(p.M));
        for (std::size_t i = 0; i < p.M; ++i) {
          Phi.row(static_cast<Eigen::Index>(i)) = round.vectors[i].dense().transpose();
          u(static_cast<Eigen::Index>(i)) = round.z[i];
        }
        prog = l1_program<double>(u, Phi, scale * epsilon_policy(p.M, p));
        break;
      }
      case Protocol::kCscL1: {
        // the cleaned zero rows are noiseless, so the radius counts only |I|
        prog = csc_program<double>(batch, scale * epsilon_policy(batch.set_I.size(), p), ctx.cfg.csc_use_hard_rows);
        break;
      }
      case Protocol::kCscModifiedL1:
        prog = modified_program<double>(batch, ctx.cfg.lambda, scale * epsilon_policy(batch.set_I.size(), p));
        break;
    }
    rec.outcomes[protocol_index(proto)] = evaluate(prog, opts, s_true);
  }
  if (batch_out) *batch_out = std::move(batch);
  return rec;
}

TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial) { return run_trial(TrialContext(cfg), trial); }

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg) {
  const TrialContext ctx(cfg);
  std::vector<TrialRecord> records(cfg.trials);
  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.trials));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t t = next++; t < records.size(); t = next++) {
      try {
        records[t] = run_trial(ctx, t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = records.size();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return records;
}

std::vector<ProtocolSummary> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no trial records");
  std::vector<ProtocolSummary> out;
  for (Protocol proto : cfg.protocols) {
    const std::size_t k = protocol_index(proto);
    ProtocolSummary s{proto};
    s.trials = records.size();
    const MeanCi err = mean_ci(records, [k](const TrialRecord& r) { return r.outcomes[k]->sq_rel_error; });
    s.nmse = err.mean;
    s.nmse_ci95 = err.ci95;
    s.nmse_db = db(err.mean);
    s.nmse_db_lo = err.mean > err.ci95 ? db(err.mean - err.ci95) : -std::numeric_limits<double>::infinity();
    s.nmse_db_hi = db(err.mean + err.ci95);
    for (const auto& r : records) s.failures += r.outcomes[k]->converged ? 0 : 1;
    if (proto == Protocol::kCsL1) {
      // every node transmits its value
      s.fan_mean = 1.0;
      s.cost_mean = cfg.censor.cost_value;
    } else {
      const MeanCi f = mean_ci(records, [](const TrialRecord& r) { return r.fan; });
      const MeanCi c = mean_ci(records, [](const TrialRecord& r) { return r.cost; });
      s.fan_mean = f.mean;
      s.fan_ci95 = f.ci95;
      s.cost_mean = c.mean;
      s.cost_ci95 = c.ci95;
    }
    out.push_back(s);
  }
  return out;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("sweep: no sweep parameter configured");
  SweepResult result;
  for (double value : cfg.sweep->values) {
    ExperimentConfig point = cfg.with_param(cfg.sweep->param, value);
    point.sweep.reset();
    point.validate();
    const auto records = run_trials(point);
    for (const ProtocolSummary& s : summarize(point, records)) {
      result.rows.push_back({value, s});
      result.solves += s.trials;
      result.failures += s.failures;
    }
  }
  return result;
}

void write_csv(std::ostream& out, const SweepResult& result, std::uint64_t seed) {
  out << "sweep_value,protocol,nmse_db,fan_mean,cost_mean,trials,seed,"
         "nmse,nmse_ci95,nmse_db_lo,nmse_db_hi,fan_ci95,cost_ci95,failures\n";
  for (const SweepRow& row : result.rows) {
    const ProtocolSummary& s = row.summary;
    out << to_text(row.sweep_value) << ',' << protocol_name(s.protocol) << ',' << to_text(s.nmse_db) << ','
        << to_text(s.fan_mean) << ',' << to_text(s.cost_mean) << ',' << s.trials << ',' << seed << ','
        << to_text(s.nmse) << ',' << to_text(s.nmse_ci95) << ',' << to_text(s.nmse_db_lo) << ','
        << to_text(s.nmse_db_hi) << ',' << to_text(s.fan_ci95) << ',' << to_text(s.cost_ci95) << ','
        << s.failures << '\n';
  }
}

}  // namespace cscensor
