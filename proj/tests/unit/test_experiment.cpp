#include <gtest/gtest.h>

#include <sstream>

#include "cscensor/config.hpp"
#include "cscensor/error.hpp"
#include "cscensor/experiment.hpp"

using namespace cscensor;

namespace {

ExperimentConfig from_text(const std::string& text) {
  std::istringstream in(text);
  return config_from_key_values(parse_key_values(in));
}

ExperimentConfig small_config() {
  return from_text("N=40\nK=2\nK_c=6\nM=30\nsnr_db=9\ntrials=6\nthreads=1\n");
}

}  // namespace

TEST(Config, ParsesCommentsAndDefaults) {
  const ExperimentConfig cfg = from_text(
      "# grid\nN = 500\nK=5  # sparsity\nK_c=20\nM=350\nsnr_db=9\nprotocols = cs_l1, csc_modified_l1\n"
      "sweep=M\nsweep_values=150, 200,250\n");
  EXPECT_EQ(cfg.model.N, 500u);
  EXPECT_EQ(cfg.model.K, 5u);
  EXPECT_EQ(cfg.trials, 200u);
  EXPECT_EQ(cfg.lambda, 1.0);
  ASSERT_EQ(cfg.protocols.size(), 2u);
  EXPECT_EQ(cfg.protocols[1], Protocol::kCscModifiedL1);
  ASSERT_TRUE(cfg.sweep.has_value());
  EXPECT_EQ(cfg.sweep->values, (std::vector<double>{150, 200, 250}));
  EXPECT_NEAR(cfg.resolved_model().sigma_v, sigma_v_from_snr(9.0, cfg.model), 0.0);
}

TEST(Config, Errors) {
  EXPECT_THROW(from_text("snr_db=9\nsigma_v=0.1\n"), ConfigError);
  EXPECT_THROW(from_text("N=40\n"), ConfigError);  // neither noise key
  EXPECT_THROW(from_text("snr_db=9\ntrials=0\n"), ConfigError);
  EXPECT_THROW(from_text("snr_db=9\nsweep=K\nsweep_values=1,2\n"), ConfigError);
  EXPECT_THROW(from_text("snr_db=9\nsweep=M\n"), ConfigError);
  EXPECT_THROW(from_text("snr_db=9\nsweep_values=1\n"), ConfigError);
  EXPECT_THROW(from_text("snr_db=nine\n"), ConfigError);
  EXPECT_THROW(from_text("snr_db=9\nwhat=1\n"), ConfigError);
  EXPECT_THROW(from_text("snr_db=9\nprotocols=omp\n"), ConfigError);
  EXPECT_THROW(from_text("snr_db=9\nalpha=1.5\n"), ConfigError);
  EXPECT_THROW(from_text("snr_db=9\nK=30\nK_c=20\n"), ConfigError);
  EXPECT_THROW(from_text("just a line\n"), ConfigError);
  EXPECT_THROW(parse_override("novalue"), ConfigError);
  EXPECT_NO_THROW(from_text("snr_db=9\nbeta=1\n"));
}

TEST(Config, DescribeRoundTrips) {
  const ExperimentConfig cfg = from_text("N=60\nK=3\nK_c=7\nM=44\nsigma_v=0.0123\nalpha=0.4\nlambda=0.7\n"
                                         "sweep=beta\nsweep_values=0.05,0.1\nseed=99\n");
  const ExperimentConfig back = from_text(describe(cfg));
  EXPECT_EQ(describe(back), describe(cfg));
}

TEST(RunTrial, Deterministic) {
  const ExperimentConfig cfg = small_config();
  const TrialRecord a = run_trial(cfg, 3);
  const TrialRecord b = run_trial(cfg, 3);
  for (Protocol p : cfg.protocols) EXPECT_EQ(a.outcome(p)->sq_rel_error, b.outcome(p)->sq_rel_error);
  EXPECT_EQ(a.size_I, b.size_I);
  EXPECT_EQ(a.fan, b.fan);
}

TEST(RunTrial, FanIdentity) {
  const ExperimentConfig cfg = small_config();
  for (std::uint64_t t = 0; t < 5; ++t) {
    const TrialRecord r = run_trial(cfg, t);
    EXPECT_EQ(r.fan, static_cast<double>(r.size_I + r.size_Ineg1) / static_cast<double>(r.M));
  }
}

TEST(RunTrial, NoiselessCsL1IsExact) {
  ExperimentConfig cfg = from_text("N=50\nK=2\nK_c=10\nM=100\nsigma_v=1e-12\nprotocols=cs_l1\n");
  int exact = 0;
  for (std::uint64_t t = 0; t < 10; ++t) exact += run_trial(cfg, t).outcome(Protocol::kCsL1)->sq_rel_error < 1e-12;
  EXPECT_EQ(exact, 10);  // squared relative error below (1e-6)^2
}

TEST(RunTrial, MeanFanIsOneMinusAlpha) {
  const ExperimentConfig cfg = from_text("N=500\nK=5\nK_c=20\nM=350\nsnr_db=9\nalpha=0.5\nbeta=0.075\n");
  const TrialContext ctx(cfg);
  ASSERT_FALSE(ctx.thresholds.clamped);
  double total = 0.0;
  const int trials = 10'000;
  for (int t = 0; t < trials; ++t) {
    const Round r = simulate_round(ctx.params, ctx.thresholds, cfg.seed, static_cast<std::uint64_t>(t));
    std::size_t active = 0;
    for (const auto& d : r.decisions) active += !std::holds_alternative<Silent>(d);
    total += static_cast<double>(active) / static_cast<double>(ctx.params.M);
  }
  EXPECT_NEAR(total / trials, 0.5, 0.02);
}

TEST(RunTrial, NodeDrawsIndependentOfM) {
  ExperimentConfig a = small_config();
  ExperimentConfig b = a;
  b.model.M = 50;
  const TrialContext ca(a), cb(b);
  const Round ra = simulate_round(ca.params, ca.thresholds, 1, 2);
  const Round rb = simulate_round(cb.params, cb.thresholds, 1, 2);
  EXPECT_EQ(ra.signal.values, rb.signal.values);
  for (std::size_t i = 0; i < ra.z.size(); ++i) EXPECT_EQ(ra.z[i], rb.z[i]);
}

TEST(RunSweep, CsvIsByteIdenticalAcrossThreadCounts) {
  ExperimentConfig cfg = small_config();
  cfg.sweep = Sweep{"alpha", {0.3, 0.6}};
  std::ostringstream one;
  std::ostringstream many;
  write_csv(one, run_sweep(cfg), cfg.seed);
  cfg.threads = 3;
  write_csv(many, run_sweep(cfg), cfg.seed);
  EXPECT_EQ(one.str(), many.str());
  EXPECT_EQ(one.str().rfind("sweep_value,protocol,nmse_db,fan_mean,cost_mean,trials,seed,", 0), 0u);
}

TEST(RunSweep, CsL1IgnoresCensoringParameters) {
  ExperimentConfig cfg = small_config();
  cfg.protocols = {Protocol::kCsL1};
  cfg.sweep = Sweep{"beta", {0.02, 0.1, 0.2}};
  const SweepResult res = run_sweep(cfg);
  ASSERT_EQ(res.rows.size(), 3u);
  EXPECT_EQ(res.rows[0].summary.nmse_db, res.rows[1].summary.nmse_db);
  EXPECT_EQ(res.rows[0].summary.nmse_db, res.rows[2].summary.nmse_db);
}

TEST(RunSweep, FanAndCostRanges) {
  ExperimentConfig cfg = small_config();
  cfg.sweep = Sweep{"M", {20, 30}};
  for (const SweepRow& row : run_sweep(cfg).rows) {
    EXPECT_GE(row.summary.fan_mean, 0.0);
    EXPECT_LE(row.summary.fan_mean, 1.0);
    EXPECT_GE(row.summary.cost_mean, 0.0);
    EXPECT_EQ(row.summary.trials, cfg.trials);
  }
}
