#include "cscensor/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cscensor/error.hpp"

namespace cscensor {

void ModelParams::validate() const {
  if (K < 1 || K > K_c || K_c > N) {
    throw InvalidDimension("model requires 1 <= K <= K_c <= N (got N=" + std::to_string(N) +
                           ", K=" + std::to_string(K) + ", K_c=" + std::to_string(K_c) + ")");
  }
  if (!(sigma_s > 0.0) || !std::isfinite(sigma_s)) throw InvalidDimension("sigma_s must be > 0");
  if (!(sigma_v >= 0.0) || !std::isfinite(sigma_v)) throw InvalidDimension("sigma_v must be >= 0");
  if (M < 1) throw InvalidDimension("M must be >= 1");
}

Eigen::VectorXd SparseSignal::dense() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < support.size(); ++k) s(static_cast<Eigen::Index>(support[k])) = values[k];
  return s;
}

Eigen::VectorXd SensingVector::dense() const {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < support.size(); ++k) phi(static_cast<Eigen::Index>(support[k])) = signs[k];
  return phi;
}

double SensingVector::dot(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) acc += signs[k] * x(static_cast<Eigen::Index>(support[k]));
  return acc;
}

std::size_t SensingVector::overlap(const IndexSet& other) const {
  std::size_t count = 0;
  auto a = support.begin();
  auto b = other.begin();
  while (a != support.end() && b != other.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      ++count;
      ++a;
      ++b;
    }
  }
  return count;
}

IndexSet draw_support(std::size_t n, std::size_t k, Rng& rng) {
  if (k < 1 || k > n) {
    throw InvalidDimension("draw_support requires 1 <= k <= n (got n=" + std::to_string(n) +
                           ", k=" + std::to_string(k) + ")");
  }
  IndexSet out;
  out.reserve(k);
  // selection sampling: uniform over k-subsets, emitted in ascending order
  std::size_t needed = k;
  for (std::size_t i = 0; i < n && needed > 0; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, n - i - 1);
    if (pick(rng.engine()) < needed) {
      out.push_back(i);
      --needed;
    }
  }
  return out;
}

SparseSignal draw_signal(std::size_t n, const IndexSet& support, double sigma_s, Rng& rng) {
  if (!(sigma_s > 0.0)) throw InvalidDimension("sigma_s must be > 0");
  SparseSignal s{n, support, {}};
  s.values.reserve(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) s.values.push_back(rng.gaussian(sigma_s));
  return s;
}

SensingVector draw_sensing_vector(const ModelParams& params, Rng& rng) {
  SensingVector phi{params.N, draw_support(params.N, params.K_c, rng), {}};
  phi.signs.reserve(params.K_c);
  for (std::size_t k = 0; k < params.K_c; ++k) phi.signs.push_back(rng.sign());
  return phi;
}

double measure(const SparseSignal& signal, const SensingVector& phi, double sigma_v, Rng& rng) {
  double z = 0.0;
  // signal part: merge the two sorted supports
  auto a = phi.support.begin();
  auto b = signal.support.begin();
  while (a != phi.support.end() && b != signal.support.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      z += phi.signs[static_cast<std::size_t>(a - phi.support.begin())] *
           signal.values[static_cast<std::size_t>(b - signal.support.begin())];
      ++a;
      ++b;
    }
  }
  if (sigma_v > 0.0) {
    for (double sign : phi.signs) z += sign * rng.gaussian(sigma_v);
  }
  return z;
}

double sigma_v_from_snr(double snr_db, const ModelParams& params) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return params.sigma_s * std::sqrt(static_cast<double>(params.K) / (static_cast<double>(params.N) * snr));
}

}  // namespace cscensor
