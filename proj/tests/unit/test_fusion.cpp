#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cscensor/batch_io.hpp"
#include "cscensor/experiment.hpp"
#include "cscensor/fusion.hpp"

using namespace cscensor;

namespace {

std::vector<SensingVector> random_vectors(const ModelParams& p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SensingVector> out;
  for (std::size_t i = 0; i < p.M; ++i) out.push_back(draw_sensing_vector(p, rng));
  return out;
}

}  // namespace

TEST(Collect, AllSilentIsEmpty) {
  const ModelParams p{12, 2, 4, 1.0, 0.1, 5};
  const auto vectors = random_vectors(p, 1);
  const std::vector<Decision> decisions(5, Silent{});
  const auto batch = collect<double>(decisions, vectors);
  EXPECT_TRUE(batch.set_I.empty());
  EXPECT_TRUE(batch.set_Ineg1.empty());
  EXPECT_EQ(batch.u_I.size(), 0);
  EXPECT_EQ(batch.Phi_I.rows(), 0);
}

TEST(Collect, DirectPartition) {
  const ModelParams p{12, 2, 4, 1.0, 0.1, 3};
  const auto vectors = random_vectors(p, 2);
  const std::vector<Decision> decisions{SendValue{2.0}, HardZero{}, Silent{}};
  const auto batch = collect<double>(decisions, vectors);
  EXPECT_EQ(batch.set_I, (std::vector<std::size_t>{0}));  // node 1
  EXPECT_EQ(batch.set_Ineg1, (std::vector<std::size_t>{1}));
  ASSERT_EQ(batch.u_I.size(), 1);
  EXPECT_EQ(batch.u_I(0), 2.0);
}

TEST(Collect, RowsMatchGenerators) {
  const ModelParams p{30, 2, 5, 1.0, 0.1, 10};
  const auto vectors = random_vectors(p, 3);
  std::mt19937 gen(4);
  std::vector<Decision> decisions;
  for (int i = 0; i < 10; ++i) {
    const int k = static_cast<int>(gen() % 3);
    decisions.push_back(k == 0 ? Decision{SendValue{0.1 * i}} : k == 1 ? Decision{HardZero{}} : Decision{Silent{}});
  }
  const auto batch = collect<double>(decisions, vectors);
  for (std::size_t a : batch.set_I) {
    for (std::size_t b : batch.set_Ineg1) EXPECT_NE(a, b);
  }
  EXPECT_LE(batch.num_active(), p.M);
  for (std::size_t r = 0; r < batch.set_I.size(); ++r) {
    EXPECT_EQ(batch.Phi_I.row(static_cast<Eigen::Index>(r)).transpose(), vectors[batch.set_I[r]].dense());
    EXPECT_EQ(batch.u_I(static_cast<Eigen::Index>(r)), std::get<SendValue>(decisions[batch.set_I[r]]).z);
  }
  for (std::size_t r = 0; r < batch.set_Ineg1.size(); ++r) {
    EXPECT_EQ(batch.Phi_Ineg1.row(static_cast<Eigen::Index>(r)).transpose(), vectors[batch.set_Ineg1[r]].dense());
  }
}

TEST(StackOperator, IdentityWhenNoHardDecisions) {
  FusionBatch<double> batch;
  batch.N = 6;
  batch.Phi_Ineg1.resize(0, 6);
  const auto op = stack_operator(batch, 1.0);
  EXPECT_EQ(op.A, Eigen::MatrixXd::Identity(6, 6));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.A);
  EXPECT_NEAR(svd.singularValues().minCoeff(), 1.0, 1e-15);
}

TEST(StackOperator, GramAndSingularValues) {
  const ModelParams p{15, 2, 4, 1.0, 0.1, 12};
  const auto vectors = random_vectors(p, 5);
  std::vector<Decision> decisions(12, HardZero{});
  decisions[0] = SendValue{1.0};
  const auto batch = collect<double>(decisions, vectors);
  for (double lambda : {0.3, 1.0, 2.5}) {
    const auto op = stack_operator(batch, lambda);
    const Eigen::MatrixXd expected =
        Eigen::MatrixXd::Identity(15, 15) + lambda * lambda * batch.Phi_Ineg1.transpose() * batch.Phi_Ineg1;
    EXPECT_LE((op.A.transpose() * op.A - expected).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.A);
    EXPECT_GE(svd.singularValues().minCoeff(), 1.0 - 1e-10);
  }
  EXPECT_THROW(stack_operator(batch, 0.0), std::invalid_argument);
}

TEST(StackOperator, WeightedNormIdentity) {
  const ModelParams p{20, 2, 5, 1.0, 0.1, 9};
  const auto vectors = random_vectors(p, 6);
  const std::vector<Decision> decisions(9, HardZero{});
  const auto batch = collect<double>(decisions, vectors);
  const double lambda = 0.7;
  const auto op = stack_operator(batch, lambda);
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd s(20);
    for (auto& v : s) v = nd(gen);
    const double lhs = (op.A * s).lpNorm<1>();
    const double rhs = s.lpNorm<1>() + lambda * (batch.Phi_Ineg1 * s).lpNorm<1>();
    EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
  }
}

TEST(StackOperator, CorrectHardDecisionsNullTheSignal) {
  ExperimentConfig cfg;
  cfg.model = {60, 3, 6, 1.0, 0.0, 80};
  cfg.sigma_v = 0.05;
  const TrialContext ctx(cfg);
  const Round round = simulate_round(ctx.params, ctx.thresholds, 9, 0);
  const auto batch = collect<double>(round.decisions, round.vectors);
  const Eigen::VectorXd s = round.signal.dense();
  int checked = 0;
  for (std::size_t r = 0; r < batch.set_Ineg1.size(); ++r) {
    if (round.vectors[batch.set_Ineg1[r]].overlap(round.signal.support) == 0) {
      EXPECT_EQ(batch.Phi_Ineg1.row(static_cast<Eigen::Index>(r)).dot(s), 0.0);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(EpsilonPolicy, Values) {
  const ModelParams noiseless{500, 5, 20, 1.0, 0.0, 1};
  EXPECT_EQ(epsilon_policy(100, noiseless), 0.0);
  const ModelParams p{500, 5, 20, 1.0, 0.1, 1};
  EXPECT_EQ(epsilon_policy(0, p), 0.0);
  EXPECT_NEAR(epsilon_policy(180, p), 6.0, 1e-12);
}

TEST(BatchIo, RoundTrip) {
  const ModelParams p{25, 2, 5, 1.0, 0.1, 40};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto vectors = random_vectors(p, seed);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::vector<Decision> decisions;
    for (std::size_t i = 0; i < p.M; ++i) {
      const auto k = gen() % 3;
      decisions.push_back(k == 0 ? Decision{SendValue{nd(gen)}} : k == 1 ? Decision{HardZero{}} : Decision{Silent{}});
    }
    const auto batch = collect<double>(decisions, vectors);
    std::stringstream buf;
    write_batch(buf, batch);
    const auto back = read_batch(buf);
    EXPECT_EQ(back.N, batch.N);
    EXPECT_EQ(back.M, batch.M);
    EXPECT_EQ(back.set_I, batch.set_I);
    EXPECT_EQ(back.set_Ineg1, batch.set_Ineg1);
    EXPECT_EQ(back.u_I, batch.u_I);  // bit-exact through shortest round-trip text
    EXPECT_EQ(back.Phi_I, batch.Phi_I);
    EXPECT_EQ(back.Phi_Ineg1, batch.Phi_Ineg1);
  }
}

TEST(BatchIo, OneBasedText) {
  FusionBatch<double> batch;
  batch.N = 4;
  batch.M = 3;
  batch.set_I = {0};
  batch.set_Ineg1 = {2};
  batch.u_I = Eigen::VectorXd::Constant(1, 0.5);
  batch.Phi_I = Eigen::MatrixXd::Zero(1, 4);
  batch.Phi_I(0, 0) = 1.0;
  batch.Phi_I(0, 3) = -1.0;
  batch.Phi_Ineg1 = Eigen::MatrixXd::Zero(1, 4);
  batch.Phi_Ineg1(0, 1) = -1.0;
  batch.Phi_Ineg1(0, 2) = 1.0;
  std::stringstream buf;
  write_batch(buf, batch);
  const std::string text = buf.str();
  EXPECT_NE(text.find("value 1 0.5 1,4 +1,-1"), std::string::npos) << text;
  EXPECT_NE(text.find("hard 3 0 2,3 -1,+1"), std::string::npos) << text;
}

TEST(BatchIo, RejectsMalformed) {
  std::stringstream bad("# cscensor fusion batch v1\nN 4\nM 2\nkind node value support signs\nvalue x 1 1 +1\n");
  EXPECT_THROW(read_batch(bad), std::runtime_error);
  std::stringstream empty("");
  EXPECT_THROW(read_batch(empty), std::runtime_error);
}
