#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cscensor/censor.hpp"
#include "cscensor/model.hpp"

namespace cscensor {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Fusion-center view of one censoring round.
///
/// `set_I` holds the nodes that sent a real value and `set_Ineg1` the nodes
/// that sent a hard decision, both as ascending 0-based node indices. Row r
/// of `Phi_I` is the sensing vector of node `set_I[r]` and pairs with
/// `u_I(r)`. Hard decisions are stored cleaned: their measurement is the
/// implicit zero vector and is never materialized.
template <typename Scalar = double>
struct FusionBatch {
  std::size_t N = 0;
  std::size_t M = 0;
  std::vector<std::size_t> set_I;
  std::vector<std::size_t> set_Ineg1;
  VectorX<Scalar> u_I;
  MatrixX<Scalar> Phi_I;
  MatrixX<Scalar> Phi_Ineg1;

  std::size_t num_active() const { return set_I.size() + set_Ineg1.size(); }
};

/// A = [I; lambda * Phi_Ineg1], so that ||A s||_1 = ||s||_1 + lambda ||Phi_Ineg1 s||_1.
template <typename Scalar = double>
struct StackedOperator {
  MatrixX<Scalar> A;
  Scalar lambda = Scalar(1);
};

/// Partition node decisions into the value set and the hard-decision set and
/// gather the matching sensing rows in ascending node order.
template <typename Scalar = double>
FusionBatch<Scalar> collect(std::span<const Decision> decisions, std::span<const SensingVector> vectors) {
  if (decisions.size() != vectors.size()) {
    throw std::invalid_argument("collect: decisions and sensing vectors differ in length");
  }
  FusionBatch<Scalar> batch;
  batch.M = decisions.size();
  batch.N = vectors.empty() ? 0 : vectors.front().N;
  std::vector<Scalar> values;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (const auto* send = std::get_if<SendValue>(&decisions[i])) {
      batch.set_I.push_back(i);
      values.push_back(static_cast<Scalar>(send->z));
    } else if (std::holds_alternative<HardZero>(decisions[i])) {
      batch.set_Ineg1.push_back(i);
    }
  }
  const auto n = static_cast<Eigen::Index>(batch.N);
  auto gather = [&](const std::vector<std::size_t>& nodes) {
    MatrixX<Scalar> rows = MatrixX<Scalar>::Zero(static_cast<Eigen::Index>(nodes.size()), n);
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const SensingVector& phi = vectors[nodes[r]];
      for (std::size_t k = 0; k < phi.support.size(); ++k) {
        rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(phi.support[k])) =
            static_cast<Scalar>(phi.signs[k]);
      }
    }
    return rows;
  };
  batch.Phi_I = gather(batch.set_I);
  batch.Phi_Ineg1 = gather(batch.set_Ineg1);
  batch.u_I = Eigen::Map<const VectorX<Scalar>>(values.data(), static_cast<Eigen::Index>(values.size()));
  return batch;
}

template <typename Scalar>
StackedOperator<Scalar> stack_operator(const FusionBatch<Scalar>& batch, Scalar lambda) {
  if (!(lambda > Scalar(0))) throw std::invalid_argument("stack_operator: lambda must be > 0");
  const auto n = static_cast<Eigen::Index>(batch.N);
  StackedOperator<Scalar> op;
  op.lambda = lambda;
  op.A.resize(n + batch.Phi_Ineg1.rows(), n);
  op.A.topRows(n).setIdentity();
  op.A.bottomRows(batch.Phi_Ineg1.rows()) = lambda * batch.Phi_Ineg1;
  return op;
}

/// Data-fit radius sigma_v * sqrt(K_c |I|), the average noise norm of the
/// real-valued measurements.
inline double epsilon_policy(std::size_t size_I, const ModelParams& params) {
  return params.sigma_v * std::sqrt(static_cast<double>(params.K_c) * static_cast<double>(size_I));
}

}  // namespace cscensor
