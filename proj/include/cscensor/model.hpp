#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cscensor/rng.hpp"

namespace cscensor {

/// Index sets are stored 0-based and strictly increasing. Text output and
/// the CLI shift them to the 1-based convention.
using IndexSet = std::vector<std::size_t>;

/// Dimensions and variances of the sensing model.
struct ModelParams {
  std::size_t N = 0;    ///< ambient dimension
  std::size_t K = 0;    ///< signal sparsity
  std::size_t K_c = 0;  ///< nonzeros per sensing vector
  double sigma_s = 1.0;
  double sigma_v = 0.0;
  std::size_t M = 1;  ///< number of sensor nodes

  /// Throws InvalidDimension unless 1 <= K <= K_c <= N, sigma_s > 0,
  /// sigma_v >= 0 and M >= 1.
  void validate() const;

  double rho() const { return static_cast<double>(K_c) / static_cast<double>(N); }
};

/// K-sparse signal with Gaussian amplitudes on its support.
struct SparseSignal {
  std::size_t N = 0;
  IndexSet support;
  std::vector<double> values;

  Eigen::VectorXd dense() const;
};

/// K_c-sparse sensing vector with +-1 entries on a known support.
struct SensingVector {
  std::size_t N = 0;
  IndexSet support;
  std::vector<double> signs;

  Eigen::VectorXd dense() const;
  /// inner product with a dense vector of length N
  double dot(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// |support ∩ other|, both sorted
  std::size_t overlap(const IndexSet& other) const;
};

/// Uniformly random k-subset of {0..n-1}, sorted ascending.
IndexSet draw_support(std::size_t n, std::size_t k, Rng& rng);

SparseSignal draw_signal(std::size_t n, const IndexSet& support, double sigma_s, Rng& rng);

SensingVector draw_sensing_vector(const ModelParams& params, Rng& rng);

/// z = phi^T (s + v) with v ~ N(0, sigma_v^2 I). Only the noise entries on the
/// sensing support contribute, so only those K_c variates are drawn.
double measure(const SparseSignal& signal, const SensingVector& phi, double sigma_v, Rng& rng);

/// sigma_v such that K sigma_s^2 / (N sigma_v^2) equals 10^(snr_db/10).
double sigma_v_from_snr(double snr_db, const ModelParams& params);

}  // namespace cscensor
