#pragma once

#include <cstdint>
#include <functional>

#include "rkdecouple/linear_operator.hpp"

namespace rkdecouple {

using VectorFn = std::function<Eigen::VectorXd(double)>;

/// Stage values, one column per stage.
using StageVector = Eigen::MatrixXd;

/// Linear elliptic-parabolic system
///   A u - D^T p = f(t),   D u' + C p' + B p = g(t),
/// with A, B, C symmetric positive definite and D of size n_p x n_u.
struct CoupledSystem {
  Eigen::Index n_u = 0;
  Eigen::Index n_p = 0;
  SpdOperatorPtr A;
  SpdOperatorPtr B;
  SpdOperatorPtr C;
  SparseMatrix D;
  VectorFn forcing_f;
  VectorFn forcing_g;
  Eigen::VectorXd u0;
  Eigen::VectorXd p0;
  // Gram matrices of the error norms for u, for the pressure energy space, and for the pressure pivot space.
  SparseMatrix gram_V;
  SparseMatrix gram_Q;
  SparseMatrix gram_H;

  /// Checks sizes, SPD-ness and the consistency of the initial data.
  /// Throws DomainError / NotSpdError.
  void validate(double consistency_tol = 1e-10) const;

  /// ||A u0 - D^T p0 - f(0)||.
  double consistency_residual() const;
};

/// Exact (or reference) trajectory, evaluated on demand.
struct ExactSolution {
  VectorFn u;
  VectorFn p;
};

/// A system together with the solution its forcing was manufactured from.
struct ManufacturedSystem {
  CoupledSystem system;
  ExactSolution exact;
};

/// D A^{-1} D^T q.
Eigen::VectorXd schur_apply(const CoupledSystem& sys, const Eigen::VectorXd& q);

struct PowerIterationOptions {
  int max_iter = 20000;
  std::uint64_t seed = 20240601;
};

/// Largest eigenvalue of the pencil (D A^{-1} D^T, C) by power iteration in the C inner product.
/// Stops when the Rayleigh quotient changes by less than tol relative. Throws ConvergenceError.
double coupling_strength(const CoupledSystem& sys, double tol, const PowerIterationOptions& opts = {});

/// sqrt(sum_l w_l <C^{-1} D V_l, D V_l>) for displacement stage values V (n_u x s).
double mtilde_seminorm(const CoupledSystem& sys, const StageVector& V, const Eigen::VectorXd& weights);

/// sqrt(sum_l w_l V_l^T G V_l).
double weighted_stage_norm(const SparseMatrix& gram, const StageVector& V, const Eigen::VectorXd& weights);

/// Random SPD operators with spectra in [1, 10], coupling rescaled to target_omega, and forcing
/// manufactured from u(t) = cos(t) u_vec, p(t) = exp(-t) p_vec + sin(2t) p_vec2.
/// Error norms use A (for u), B and C (for p).
ManufacturedSystem make_dense_surrogate(Eigen::Index n_u, Eigen::Index n_p, double target_omega,
                                        std::uint64_t seed);

/// Dense D A^{-1} D^T. Throws DomainError when n_p exceeds max_dim.
Eigen::MatrixXd dense_schur(const CoupledSystem& sys, Eigen::Index max_dim = 200);

/// All generalized eigenvalues of (D A^{-1} D^T, C), ascending; dense, small systems only.
Eigen::VectorXd pencil_eigenvalues(const CoupledSystem& sys, Eigen::Index max_dim = 200);

}  // namespace rkdecouple
