#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "cscensor/fusion.hpp"

namespace cscensor {

template <typename Scalar = double>
struct SolverOptions {
  Scalar epsilon = Scalar(0);  ///< data-fit radius
  Scalar lambda = Scalar(1);   ///< weight on the hard-decision rows
  Scalar tol_feasibility = Scalar(1e-6);
  Scalar tol_objective = Scalar(1e-4);
  int max_iterations = 20000;
  /// ADMM stopping level for the primal and dual residuals, relative to the
  /// iterate scale.
  Scalar residual_tolerance = Scalar(1e-7);
  /// CSC-l1 feeds the cleaned zero rows of hard-decision nodes as data.
  bool csc_use_hard_rows = true;

  void validate() const {
    if (!(epsilon >= Scalar(0))) throw std::invalid_argument("epsilon must be >= 0");
    if (!(lambda > Scalar(0))) throw std::invalid_argument("lambda must be > 0");
    if (!(tol_feasibility > Scalar(0)) || !(tol_objective > Scalar(0)) || !(residual_tolerance > Scalar(0))) {
      throw std::invalid_argument("solver tolerances must be > 0");
    }
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  }
};

template <typename Scalar = double>
struct RecoverySolution {
  VectorX<Scalar> s_hat;
  Scalar objective = Scalar(0);  ///< ||D s_hat||_1
  Scalar residual = Scalar(0);   ///< ||u - Phi s_hat||_2
  int iterations = 0;
  bool converged = false;
};

/// min ||D s||_1  subject to  ||u - Phi s||_2 <= epsilon.
///
/// Every reconstruction protocol is an instance of this program; D is the
/// identity for plain l1 and the stacked operator for the weighted variant.
template <typename Scalar = double>
struct L1Program {
  VectorX<Scalar> u;
  MatrixX<Scalar> Phi;
  Eigen::SparseMatrix<Scalar> D;
  Scalar epsilon = Scalar(0);

  Eigen::Index dim() const { return Phi.cols(); }

  Scalar objective(const VectorX<Scalar>& s) const { return (D * s).template lpNorm<1>(); }
  Scalar residual(const VectorX<Scalar>& s) const { return (u - Phi * s).norm(); }
};

namespace detail {

template <typename Scalar>
Eigen::SparseMatrix<Scalar> sparse_identity(Eigen::Index n) {
  Eigen::SparseMatrix<Scalar> eye(n, n);
  eye.setIdentity();
  return eye;
}

// Euclidean projection of v onto the ball of radius r around c.
template <typename Scalar>
VectorX<Scalar> project_ball(const VectorX<Scalar>& v, const VectorX<Scalar>& c, Scalar r) {
  const VectorX<Scalar> d = v - c;
  const Scalar norm = d.norm();
  if (norm <= r) return v;
  if (r <= Scalar(0)) return c;
  return c + (r / norm) * d;
}

template <typename Scalar>
VectorX<Scalar> soft_threshold(const VectorX<Scalar>& v, Scalar t) {
  return v.unaryExpr([t](Scalar a) { return std::copysign(std::max(std::abs(a) - t, Scalar(0)), a); });
}

// Minimum-norm correction moving Phi s onto its projection in the data ball.
template <typename Scalar>
void restore_feasibility(const L1Program<Scalar>& prog, VectorX<Scalar>& s) {
  if (prog.Phi.rows() == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const VectorX<Scalar> fit = prog.Phi * s;
    if ((prog.u - fit).norm() <= prog.epsilon) return;
    const VectorX<Scalar> delta = project_ball<Scalar>(fit, prog.u, prog.epsilon) - fit;
    VectorX<Scalar> step;
    if (prog.Phi.rows() <= prog.Phi.cols()) {
      const MatrixX<Scalar> gram = prog.Phi * prog.Phi.transpose();
      step = prog.Phi.transpose() * gram.ldlt().solve(delta);
    }
    if (step.size() == 0 || !step.allFinite()) {
      step = prog.Phi.completeOrthogonalDecomposition().solve(delta);
    }
    s += step;
  }
}

}  // namespace detail

/// Alternating-direction solver for an L1Program.
///
/// Splits x = W D s and y = Phi s, where W scales each row of D to unit norm
/// (the soft threshold becomes weighted accordingly). The x-block is a soft
/// threshold, the y-block a projection onto the data ball. Both blocks share
/// one penalty so the s-update matrix G = D^T W^2 D + Phi^T Phi is factored
/// once; when D starts with an identity block and the remaining rows are few,
/// G^-1 is applied in Woodbury form. The penalty is rebalanced every 10
/// iterations from the residual norms. Phi is rescaled internally to unit
/// maximum row norm. On exit the iterate is moved back into the data ball by
/// a minimum-norm correction.
template <typename Scalar>
RecoverySolution<Scalar> solve(const L1Program<Scalar>& prog, const SolverOptions<Scalar>& opts) {
  using Vec = VectorX<Scalar>;
  using Mat = MatrixX<Scalar>;
  using Sparse = Eigen::SparseMatrix<Scalar>;
  using Triplet = Eigen::Triplet<Scalar>;
  opts.validate();
  if (prog.D.cols() != prog.dim() || prog.u.size() != prog.Phi.rows()) {
    throw std::invalid_argument("solve: inconsistent program dimensions");
  }
  const Eigen::Index n = prog.dim();
  const Eigen::Index p = prog.D.rows();
  const Eigen::Index m = prog.Phi.rows();

  RecoverySolution<Scalar> sol;
  if (m == 0) {
    // no data: the minimizer of ||D s||_1 over R^n is 0
    sol.s_hat = Vec::Zero(n);
    sol.residual = Scalar(0);
    sol.converged = true;
    return sol;
  }

  Scalar scale = prog.Phi.rowwise().norm().maxCoeff();
  if (!(scale > Scalar(0))) scale = Scalar(1);
  const Sparse Phi = (prog.Phi / scale).sparseView();
  const Vec u = prog.u / scale;
  const Scalar eps = prog.epsilon / scale;

  // row weights of D and the identity-prefix test
  Vec row_sq = Vec::Zero(p);
  bool identity_top = p >= n;
  for (Eigen::Index c = 0; c < prog.D.outerSize(); ++c) {
    for (typename Sparse::InnerIterator it(prog.D, c); it; ++it) {
      row_sq(it.row()) += it.value() * it.value();
      if (it.row() < n && (it.row() != c || it.value() != Scalar(1))) identity_top = false;
    }
  }
  Vec weight(p);  // x_i = weight_i (D s)_i
  for (Eigen::Index i = 0; i < p; ++i) weight(i) = row_sq(i) > Scalar(0) ? Scalar(1) / std::sqrt(row_sq(i)) : Scalar(1);
  const Sparse D = weight.asDiagonal() * prog.D;
  const Sparse Dt = D.transpose();
  const Sparse Phit = Phi.transpose();
  const Vec thresh_unit = weight.cwiseInverse();  // per-entry threshold at rho = 1

  // s-update: s = G^-1 r
  const Eigen::Index extra = identity_top ? (p - n) + m : 0;
  const bool woodbury = identity_top && extra < n;
  Sparse C;
  Sparse Ct;
  Mat inner_inv;
  Mat gram_inv;
  if (woodbury) {
    // G = I + C^T C with C = [bottom rows of D; Phi]
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(D.nonZeros() - n + Phi.nonZeros()));
    for (Eigen::Index c = 0; c < D.outerSize(); ++c) {
      for (typename Sparse::InnerIterator it(D, c); it; ++it) {
        if (it.row() >= n) trips.emplace_back(it.row() - n, c, it.value());
      }
    }
    for (Eigen::Index c = 0; c < Phi.outerSize(); ++c) {
      for (typename Sparse::InnerIterator it(Phi, c); it; ++it) trips.emplace_back(p - n + it.row(), c, it.value());
    }
    C.resize(extra, n);
    C.setFromTriplets(trips.begin(), trips.end());
    Ct = C.transpose();
    Mat inner = Mat(C * Ct);
    inner.diagonal().array() += Scalar(1);
    inner_inv = inner.llt().solve(Mat::Identity(extra, extra));
  } else {
    const Mat gram = Mat(Dt * D) + Mat(Phit * Phi);
    gram_inv = gram.llt().solve(Mat::Identity(n, n));
  }
  auto apply_inverse = [&](const Vec& r) -> Vec {
    if (!woodbury) return gram_inv * r;
    const Vec t = inner_inv * (C * r);
    return r - Ct * t;
  };

  const Scalar relax = Scalar(1.6);
  const Scalar tol = opts.residual_tolerance;
  Scalar rho = Scalar(1);

  Vec s = Vec::Zero(n);
  Vec x = Vec::Zero(p);
  Vec y = detail::project_ball<Scalar>(Vec::Zero(m), u, eps);
  Vec wx = Vec::Zero(p);
  Vec wy = Vec::Zero(m);

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    s = apply_inverse(Dt * (x - wx) + Phit * (y - wy));
    const Vec Ds = D * s;
    const Vec Ps = Phi * s;
    const Vec hx = relax * Ds + (Scalar(1) - relax) * x;
    const Vec hy = relax * Ps + (Scalar(1) - relax) * y;
    const Vec x_old = x;
    const Vec y_old = y;
    const Vec vx = hx + wx;
    x = (vx.cwiseAbs() - thresh_unit / rho).cwiseMax(Scalar(0)).cwiseProduct(vx.cwiseSign());
    y = detail::project_ball<Scalar>(hy + wy, u, eps);
    wx += hx - x;
    wy += hy - y;

    const Scalar r_norm = std::sqrt((Ds - x).squaredNorm() + (Ps - y).squaredNorm());
    const Scalar d_norm = rho * (Dt * (x - x_old) + Phit * (y - y_old)).norm();
    const Scalar bs_norm = std::sqrt(Ds.squaredNorm() + Ps.squaredNorm());
    const Scalar z_norm = std::sqrt(x.squaredNorm() + y.squaredNorm());
    const Scalar eps_pri = tol * (std::sqrt(Scalar(p + m)) * Scalar(1e-2) + std::max(bs_norm, z_norm));
    const Scalar eps_dual =
        tol * (std::sqrt(Scalar(n)) * Scalar(1e-2) + rho * std::max((Dt * wx).norm(), (Phit * wy).norm()));
    if (it > 0 && r_norm <= eps_pri && d_norm <= eps_dual) {
      sol.converged = true;
      ++it;
      break;
    }
    if (it % 10 == 9) {
      if (r_norm > Scalar(10) * d_norm * (eps_pri / eps_dual)) {
        rho *= Scalar(2);
        wx /= Scalar(2);
        wy /= Scalar(2);
      } else if (d_norm * (eps_pri / eps_dual) > Scalar(10) * r_norm) {
        rho /= Scalar(2);
        wx *= Scalar(2);
        wy *= Scalar(2);
      }
    }
  }

  detail::restore_feasibility(prog, s);
  sol.s_hat = std::move(s);
  sol.iterations = it;
  sol.objective = prog.objective(sol.s_hat);
  sol.residual = prog.residual(sol.s_hat);
  if (!sol.s_hat.allFinite()) sol.converged = false;
  return sol;
}

/// Plain l1 program on (u, Phi).
template <typename Scalar>
L1Program<Scalar> l1_program(const VectorX<Scalar>& u, const MatrixX<Scalar>& Phi, Scalar epsilon) {
  return {u, Phi, detail::sparse_identity<Scalar>(Phi.cols()), epsilon};
}

/// Weighted program: objective ||A s||_1 with A from stack_operator.
template <typename Scalar>
L1Program<Scalar> modified_program(const FusionBatch<Scalar>& batch, Scalar lambda, Scalar epsilon) {
  const StackedOperator<Scalar> op = stack_operator(batch, lambda);
  return {batch.u_I, batch.Phi_I, op.A.sparseView(), epsilon};
}

/// Standard l1 on the censored data. With `use_hard_rows` the hard-decision
/// nodes enter as rows of cleaned zero measurements.
template <typename Scalar>
L1Program<Scalar> csc_program(const FusionBatch<Scalar>& batch, Scalar epsilon, bool use_hard_rows) {
  if (!use_hard_rows) return l1_program<Scalar>(batch.u_I, batch.Phi_I, epsilon);
  const Eigen::Index ni = batch.Phi_I.rows();
  const Eigen::Index nh = batch.Phi_Ineg1.rows();
  MatrixX<Scalar> Phi(ni + nh, static_cast<Eigen::Index>(batch.N));
  Phi << batch.Phi_I, batch.Phi_Ineg1;
  VectorX<Scalar> u = VectorX<Scalar>::Zero(ni + nh);
  u.head(ni) = batch.u_I;
  return l1_program<Scalar>(u, Phi, epsilon);
}

template <typename Scalar>
RecoverySolution<Scalar> solve_l1(const VectorX<Scalar>& u, const MatrixX<Scalar>& Phi,
                                  const SolverOptions<Scalar>& opts) {
  return solve(l1_program<Scalar>(u, Phi, opts.epsilon), opts);
}

template <typename Scalar>
RecoverySolution<Scalar> solve_modified_l1(const FusionBatch<Scalar>& batch, const SolverOptions<Scalar>& opts) {
  return solve(modified_program<Scalar>(batch, opts.lambda, opts.epsilon), opts);
}

template <typename Scalar>
RecoverySolution<Scalar> reconstruct_csc_l1(const FusionBatch<Scalar>& batch, const SolverOptions<Scalar>& opts) {
  return solve(csc_program<Scalar>(batch, opts.epsilon, opts.csc_use_hard_rows), opts);
}

template <typename Scalar = double>
struct Certificate {
  Scalar residual = Scalar(0);
  Scalar feasibility_excess = Scalar(0);  ///< max(0, residual - epsilon)
  bool feasible = false;
  std::optional<Scalar> reference_objective;
  std::optional<bool> reference_feasible;
  /// (objective - reference objective) / (1 + reference objective)
  std::optional<Scalar> relative_gap;
  std::optional<Scalar> l2_error;
};

/// True when `residual` satisfies the data constraint up to the relative slack
/// plus a rounding-level floor (needed when epsilon is 0).
template <typename Scalar>
bool within_radius(Scalar residual, Scalar epsilon, Scalar tol_feasibility, Scalar u_norm) {
  return residual <= epsilon * (Scalar(1) + tol_feasibility) + Scalar(1e-9) * (Scalar(1) + u_norm);
}

/// Read-only audit of a solution against its program and, optionally, a
/// reference point such as the ground truth.
template <typename Scalar>
Certificate<Scalar> certify(const RecoverySolution<Scalar>& sol, const L1Program<Scalar>& prog,
                            const SolverOptions<Scalar>& opts, const std::optional<VectorX<Scalar>>& s_ref = {}) {
  Certificate<Scalar> cert;
  const Scalar u_norm = prog.u.norm();
  cert.residual = prog.residual(sol.s_hat);
  cert.feasibility_excess = std::max(Scalar(0), cert.residual - prog.epsilon);
  cert.feasible = within_radius(cert.residual, prog.epsilon, opts.tol_feasibility, u_norm);
  if (s_ref) {
    const Scalar ref_obj = prog.objective(*s_ref);
    cert.reference_objective = ref_obj;
    cert.reference_feasible = within_radius(prog.residual(*s_ref), prog.epsilon, opts.tol_feasibility, u_norm);
    cert.relative_gap = (prog.objective(sol.s_hat) - ref_obj) / (Scalar(1) + ref_obj);
    cert.l2_error = (sol.s_hat - *s_ref).norm();
  }
  return cert;
}

}  // namespace cscensor
