#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cscensor/error.hpp"
#include "cscensor/fusion.hpp"
#include "cscensor/model.hpp"

namespace cscensor {

struct Nmse {
  double linear;
  double db;
};

/// Mean of ||s - s_hat||^2 / ||s||^2 over the estimates, and 10 log10 of it.
template <typename Derived>
Nmse nmse(const Eigen::MatrixBase<Derived>& s_true, std::span<const VectorX<typename Derived::Scalar>> s_hats) {
  if (s_hats.empty()) throw std::invalid_argument("nmse: no estimates");
  const double energy = static_cast<double>(s_true.squaredNorm());
  if (!(energy > 0.0)) throw std::invalid_argument("nmse: zero reference signal");
  double acc = 0.0;
  for (const auto& est : s_hats) {
    if (est.size() != s_true.size()) throw std::invalid_argument("nmse: dimension mismatch");
    acc += static_cast<double>((s_true - est).squaredNorm()) / energy;
  }
  const double mean = acc / static_cast<double>(s_hats.size());
  return {mean, 10.0 * std::log10(mean)};
}

/// Fraction of active nodes.
inline double fan(std::size_t num_active, std::size_t M) {
  if (M < 1 || num_active > M) throw std::invalid_argument("fan requires 0 <= num_active <= M, M >= 1");
  return static_cast<double>(num_active) / static_cast<double>(M);
}

/// Best K-term l1 approximation error: the l1 norm of everything except the
/// K largest-magnitude entries.
template <typename Derived>
typename Derived::Scalar best_k_l1_tail(const Eigen::MatrixBase<Derived>& x, std::size_t K) {
  using Scalar = typename Derived::Scalar;
  if (K > static_cast<std::size_t>(x.size())) throw std::invalid_argument("best_k_l1_tail: K exceeds length");
  std::vector<Scalar> mags(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(x(i));
  std::ranges::sort(mags, std::greater<>{});
  Scalar tail(0);
  for (std::size_t i = K; i < mags.size(); ++i) tail += mags[i];
  return tail;
}

/// Supports enumerated by rip_constant and restricted_extremes are capped at
/// this many.
inline constexpr double kMaxEnumeratedSupports = 1e6;

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double v = 1.0;
  for (std::size_t t = 0; t < k; ++t) v = v * static_cast<double>(n - t) / static_cast<double>(t + 1);
  return v;
}

namespace detail {

inline void check_enumeration(std::size_t cols, std::size_t K, const char* who) {
  if (K < 1 || K > cols) throw std::invalid_argument(std::string(who) + ": need 1 <= K <= columns");
  if (binomial(cols, K) > kMaxEnumeratedSupports) {
    throw TooLarge(std::string(who) + ": C(" + std::to_string(cols) + ", " + std::to_string(K) +
                   ") supports exceed the enumeration budget");
  }
}

// Calls visit(support) for every K-subset of {0..n-1} in lexicographic order.
template <typename Visit>
void for_each_support(std::size_t n, std::size_t K, Visit&& visit) {
  std::vector<Eigen::Index> idx(K);
  for (std::size_t i = 0; i < K; ++i) idx[i] = static_cast<Eigen::Index>(i);
  while (true) {
    visit(std::as_const(idx));
    std::size_t i = K;
    while (i > 0 && idx[i - 1] == static_cast<Eigen::Index>(n - K + i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < K; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Extreme eigenvalues of B_S^T B_S.
template <typename Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar> gram_extremes(
    const Eigen::MatrixBase<Derived>& B, const std::vector<Eigen::Index>& support) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> sub = B(Eigen::all, support);
  const MatrixX<Scalar> gram = sub.transpose() * sub;
  if (gram.rows() == 1) return {gram(0, 0), gram(0, 0)};
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(gram, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace detail

template <typename Scalar = double>
struct RipReport {
  std::size_t order = 0;
  Scalar delta = Scalar(0);
  std::vector<std::size_t> argmax_support;  ///< 0-based columns attaining delta
};

/// Exact restricted isometry constant of order K by enumerating every
/// K-column support: max over S of max(lambda_max - 1, 1 - lambda_min) of
/// B_S^T B_S.
template <typename Derived>
RipReport<typename Derived::Scalar> rip_constant(const Eigen::MatrixBase<Derived>& B, std::size_t K) {
  using Scalar = typename Derived::Scalar;
  const auto cols = static_cast<std::size_t>(B.cols());
  detail::check_enumeration(cols, K, "rip_constant");
  RipReport<Scalar> report;
  report.order = K;
  report.delta = Scalar(-1);
  detail::for_each_support(cols, K, [&](const std::vector<Eigen::Index>& support) {
    const auto [lo, hi] = detail::gram_extremes(B, support);
    const Scalar dev = std::max(hi - Scalar(1), Scalar(1) - lo);
    if (dev > report.delta) {
      report.delta = dev;
      report.argmax_support.assign(support.begin(), support.end());
    }
  });
  report.delta = std::max(report.delta, Scalar(0));
  return report;
}

template <typename Scalar = double>
struct RestrictedExtremes {
  Scalar s_min;
  Scalar s_max;
};

/// min and max of ||M v||_2 over K-sparse unit vectors v.
template <typename Derived>
RestrictedExtremes<typename Derived::Scalar> restricted_extremes(const Eigen::MatrixBase<Derived>& Mtx,
                                                                 std::size_t K) {
  using Scalar = typename Derived::Scalar;
  detail::check_enumeration(static_cast<std::size_t>(Mtx.cols()), K, "restricted_extremes");
  Scalar lo_all = std::numeric_limits<Scalar>::infinity();
  Scalar hi_all(0);
  detail::for_each_support(static_cast<std::size_t>(Mtx.cols()), K, [&](const std::vector<Eigen::Index>& support) {
    const auto [lo, hi] = detail::gram_extremes(Mtx, support);
    lo_all = std::min(lo_all, lo);
    hi_all = std::max(hi_all, hi);
  });
  return {std::sqrt(std::max(lo_all, Scalar(0))), std::sqrt(std::max(hi_all, Scalar(0)))};
}

/// Least-squares pseudo-inverse of the stacked operator.
template <typename Scalar>
MatrixX<Scalar> pseudo_inverse(const StackedOperator<Scalar>& op) {
  return op.A.completeOrthogonalDecomposition().pseudoInverse();
}

/// Smallest singular value of the stacked operator.
template <typename Scalar>
Scalar sigma_min(const StackedOperator<Scalar>& op) {
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(op.A);
  return svd.singularValues().minCoeff();
}

/// Normalization applied to Phi_I A^+ before its RIP constant is taken.
enum class RipNormalization {
  kInverseCount,         ///< 1 / |I|
  kInverseSqrtRhoCount,  ///< 1 / sqrt(rho |I|), the isotropic scaling
};

inline double rip_scale(RipNormalization norm, std::size_t size_I, double rho) {
  const double count = static_cast<double>(size_I);
  return norm == RipNormalization::kInverseCount ? 1.0 / count : 1.0 / std::sqrt(rho * count);
}

/// scale * Phi_I * A^+ for the chosen normalization.
template <typename Scalar>
MatrixX<Scalar> rip_operator(const FusionBatch<Scalar>& batch, const MatrixX<Scalar>& A_pinv, double rho,
                             RipNormalization norm) {
  if (batch.Phi_I.rows() == 0) throw std::invalid_argument("rip_operator: no real-valued rows");
  return Scalar(rip_scale(norm, batch.set_I.size(), rho)) * (batch.Phi_I * A_pinv);
}

/// Empirical second moment of phi / sqrt(rho) over a sample of sensing
/// vectors; the identity in expectation.
inline Eigen::MatrixXd isotropy_moment(std::span<const SensingVector> sample, std::size_t N, std::size_t K_c) {
  if (sample.empty()) throw std::invalid_argument("isotropy_moment: empty sample");
  const auto n = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (const SensingVector& phi : sample) {
    for (std::size_t a = 0; a < phi.support.size(); ++a) {
      for (std::size_t b = 0; b < phi.support.size(); ++b) {
        acc(static_cast<Eigen::Index>(phi.support[a]), static_cast<Eigen::Index>(phi.support[b])) +=
            phi.signs[a] * phi.signs[b];
      }
    }
  }
  const double rho = static_cast<double>(K_c) / static_cast<double>(N);
  return acc / (rho * static_cast<double>(sample.size()));
}

/// Inputs of the recovery-error and sample-size bounds. Constants the bounds
/// carry without a numeric value (c1, c3) are supplied by the caller.
struct BoundInputs {
  // error bound
  double delta2K = 0.0;
  double sigma_min_A = 1.0;
  double sigmaK_As_l1 = 0.0;
  double epsilon = 0.0;
  std::size_t size_I = 1;
  std::size_t K = 1;
  std::size_t K_c = 1;
  double sigma_v = 0.0;
  RipNormalization normalization = RipNormalization::kInverseCount;
  // sample-size bound
  double sminA_dagger_K = 1.0;
  double smaxA_dagger_K = 1.0;
  double rho = 1.0;
  double c1 = 1.0;
  double deltaK = 0.5;
  std::size_t size_Ineg1 = 0;
  std::size_t N = 1;
};

struct ErrorBound {
  double bound;
  /// (epsilon / (sqrt(K_c |I|) sigma_v) - 1)^2; empty when sigma_v = 0
  std::optional<double> eps_prime;
  std::size_t size_I;

  /// Probability floor 1 - exp(-c3 |I| eps') for a caller-supplied c3.
  double probability_floor(double c3) const {
    if (!eps_prime) return 0.0;
    return 1.0 - std::exp(-c3 * static_cast<double>(size_I) * *eps_prime);
  }
};

/// Right-hand side of the recovery error bound. With kInverseCount the noise
/// term carries epsilon / |I|; with kInverseSqrtRhoCount it carries
/// epsilon / sqrt(rho |I|), matching the scaling of the operator whose RIP
/// constant was supplied.
inline ErrorBound error_bound_47(const BoundInputs& in) {
  constexpr double sqrt2 = std::numbers::sqrt2;
  if (!(in.delta2K >= 0.0) || !(in.delta2K < sqrt2 - 1.0)) {
    throw PreconditionViolation("error bound requires 0 <= delta_2K < sqrt(2) - 1");
  }
  if (!(in.sigma_min_A > 0.0) || in.K < 1 || in.size_I < 1) {
    throw std::invalid_argument("error bound requires sigma_min(A) > 0, K >= 1, |I| >= 1");
  }
  const double denom = (1.0 - (1.0 + sqrt2) * in.delta2K) * in.sigma_min_A;
  const double c0 = 2.0 * (1.0 - (1.0 - sqrt2) * in.delta2K) / denom;
  const double c1 = 4.0 * std::sqrt(1.0 + in.delta2K) / denom;
  const double noise_scale = rip_scale(in.normalization, in.size_I, in.rho);
  ErrorBound out{c0 * in.sigmaK_As_l1 / std::sqrt(static_cast<double>(in.K)) + c1 * in.epsilon * noise_scale,
                 std::nullopt, in.size_I};
  if (in.sigma_v > 0.0) {
    const double r = in.epsilon / (std::sqrt(static_cast<double>(in.K_c * in.size_I)) * in.sigma_v) - 1.0;
    out.eps_prime = r * r;
  }
  return out;
}

/// theta(delta_K) = 1 - (1 - delta_K) / (rho s_min^2).
inline double theta_of_delta(double deltaK, double rho, double smin) {
  return 1.0 - (1.0 - deltaK) / (rho * smin * smin);
}

/// Multiplier of c1 in the sufficient number of real-valued measurements:
/// K s_max^2 / (rho^2 theta^2 s_min^2) * log(5e (|I_-1| + N) / K).
inline double sample_bound_48(const BoundInputs& in) {
  const double smin2 = in.sminA_dagger_K * in.sminA_dagger_K;
  const double lower = 1.0 - in.rho * smin2;
  if (!(in.deltaK > lower && in.deltaK < 1.0)) {
    throw PreconditionViolation("sample bound requires delta_K in (1 - rho s_min^2, 1)");
  }
  if (in.K < 1) throw std::invalid_argument("sample bound requires K >= 1");
  const double theta = theta_of_delta(in.deltaK, in.rho, in.sminA_dagger_K);
  const double K = static_cast<double>(in.K);
  const double log_term = std::log(5.0 * std::numbers::e * static_cast<double>(in.size_Ineg1 + in.N) / K);
  return K * in.smaxA_dagger_K * in.smaxA_dagger_K / (in.rho * in.rho * theta * theta * smin2) * log_term;
}

/// Sufficient |I| for the caller's constant c1.
inline double required_measurements(const BoundInputs& in) { return in.c1 * sample_bound_48(in); }

}  // namespace cscensor
