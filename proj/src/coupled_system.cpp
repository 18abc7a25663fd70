#include "rkdecouple/coupled_system.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rkdecouple/errors.hpp"

namespace rkdecouple {

double CoupledSystem::consistency_residual() const {
  return (A->apply(u0) - SparseMatrix(D.transpose()) * p0 - forcing_f(0.0)).norm();
}

void CoupledSystem::validate(double consistency_tol) const {
  if (!A || !B || !C) throw DomainError("CoupledSystem: missing operator");
  if (A->rows() != n_u || B->rows() != n_p || C->rows() != n_p || D.rows() != n_p || D.cols() != n_u)
    throw DomainError("CoupledSystem: operator dimensions do not match (n_u, n_p)");
  if (u0.size() != n_u || p0.size() != n_p) throw DomainError("CoupledSystem: initial data size mismatch");
  if (!forcing_f || !forcing_g) throw DomainError("CoupledSystem: forcing not set");
  if (!A->is_spd_checked()) throw NotSpdError("CoupledSystem: A is not SPD");
  if (!B->is_spd_checked()) throw NotSpdError("CoupledSystem: B is not SPD");
  if (!C->is_spd_checked()) throw NotSpdError("CoupledSystem: C is not SPD");
  const double scale = 1.0 + A->apply(u0).norm() + forcing_f(0.0).norm();
  const double res = consistency_residual();
  if (res > consistency_tol * scale)
    throw DomainError("CoupledSystem: inconsistent initial data, residual " + std::to_string(res));
}

Eigen::VectorXd schur_apply(const CoupledSystem& sys, const Eigen::VectorXd& q) {
  return sys.D * sys.A->solve(Eigen::VectorXd(sys.D.transpose() * q));
}

double coupling_strength(const CoupledSystem& sys, double tol, const PowerIterationOptions& opts) {
  if (!(tol > 0.0)) throw DomainError("coupling_strength: tol must be positive");
  if (sys.n_p == 0) return 0.0;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(sys.n_p);
  for (Eigen::Index i = 0; i < sys.n_p; ++i) x[i] = normal(rng);
  x /= std::sqrt(x.dot(sys.C->apply(x)));

  std::vector<double> history;
  double mu_prev = std::nan("");
  for (int it = 0; it < opts.max_iter; ++it) {
    const Eigen::VectorXd w = schur_apply(sys, x);
    const double mu = x.dot(w);
    history.push_back(mu);
    if (mu <= 0.0 && w.norm() == 0.0) return 0.0;
    if (std::abs(mu - mu_prev) <= tol * std::abs(mu)) return mu;
    mu_prev = mu;
    const Eigen::VectorXd y = sys.C->solve(w);
    const double nrm = std::sqrt(y.dot(w));
    if (nrm == 0.0) return 0.0;
    x = y / nrm;
  }
  throw ConvergenceError("coupling_strength: power iteration did not converge", std::move(history));
}

double mtilde_seminorm(const CoupledSystem& sys, const StageVector& V, const Eigen::VectorXd& weights) {
  if (V.cols() != weights.size()) throw DomainError("mtilde_seminorm: weights/stage count mismatch");
  double acc = 0.0;
  for (Eigen::Index l = 0; l < V.cols(); ++l) {
    const Eigen::VectorXd dv = sys.D * V.col(l);
    acc += weights[l] * dv.dot(sys.C->solve(dv));
  }
  return std::sqrt(std::max(acc, 0.0));
}

double weighted_stage_norm(const SparseMatrix& gram, const StageVector& V, const Eigen::VectorXd& weights) {
  if (V.cols() != weights.size()) throw DomainError("weighted_stage_norm: weights/stage count mismatch");
  double acc = 0.0;
  for (Eigen::Index l = 0; l < V.cols(); ++l) acc += weights[l] * V.col(l).dot(gram * V.col(l));
  return std::sqrt(std::max(acc, 0.0));
}

namespace {

Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uni(1.0, 10.0);
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n * n; ++i) G.data()[i] = normal(rng);
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
  Eigen::VectorXd lam(n);
  for (Eigen::Index i = 0; i < n; ++i) lam[i] = uni(rng);
  Eigen::MatrixXd S = Q * lam.asDiagonal() * Q.transpose();
  return 0.5 * (S + S.transpose());
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

ManufacturedSystem make_dense_surrogate(Eigen::Index n_u, Eigen::Index n_p, double target_omega,
                                        std::uint64_t seed) {
  if (!(target_omega >= 0.0)) throw DomainError("make_dense_surrogate: target_omega must be >= 0");
  if (n_u < 1 || n_p < 1) throw DomainError("make_dense_surrogate: dimensions must be positive");
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd A = random_spd(n_u, rng);
  const Eigen::MatrixXd B = random_spd(n_p, rng);
  const Eigen::MatrixXd C = random_spd(n_p, rng);
  Eigen::MatrixXd D(n_p, n_u);
  for (Eigen::Index i = 0; i < D.size(); ++i) D.data()[i] = std::normal_distribution<double>()(rng);
  const Eigen::VectorXd u_vec = random_vector(n_u, rng);
  const Eigen::VectorXd p_vec = random_vector(n_p, rng);
  const Eigen::VectorXd p_vec2 = random_vector(n_p, rng);

  if (target_omega == 0.0) {
    D.setZero();
  } else {
    const Eigen::MatrixXd M = D * A.llt().solve(D.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(0.5 * (M + M.transpose()), C,
                                                                 Eigen::EigenvaluesOnly);
    D *= std::sqrt(target_omega / ges.eigenvalues().maxCoeff());
  }

  ManufacturedSystem out;
  CoupledSystem& sys = out.system;
  sys.n_u = n_u;
  sys.n_p = n_p;
  sys.A = std::make_shared<SpdOperator>(A);
  sys.B = std::make_shared<SpdOperator>(B);
  sys.C = std::make_shared<SpdOperator>(C);
  sys.D = D.sparseView();
  sys.gram_V = sys.A->matrix();
  sys.gram_Q = sys.B->matrix();
  sys.gram_H = sys.C->matrix();

  const Eigen::VectorXd Au = A * u_vec;
  const Eigen::MatrixXd Dt = D.transpose();
  const Eigen::VectorXd Du = D * u_vec;
  const Eigen::VectorXd Cp1 = C * p_vec, Cp2 = C * p_vec2, Bp1 = B * p_vec, Bp2 = B * p_vec2;
  const Eigen::VectorXd Dtp1 = Dt * p_vec, Dtp2 = Dt * p_vec2;

  sys.forcing_f = [=](double t) -> Eigen::VectorXd {
    return std::cos(t) * Au - std::exp(-t) * Dtp1 - std::sin(2 * t) * Dtp2;
  };
  sys.forcing_g = [=](double t) -> Eigen::VectorXd {
    const double e = std::exp(-t);
    return -std::sin(t) * Du + (-e) * Cp1 + 2 * std::cos(2 * t) * Cp2 + e * Bp1 + std::sin(2 * t) * Bp2;
  };
  out.exact.u = [=](double t) -> Eigen::VectorXd { return std::cos(t) * u_vec; };
  out.exact.p = [=](double t) -> Eigen::VectorXd { return std::exp(-t) * p_vec + std::sin(2 * t) * p_vec2; };
  sys.u0 = out.exact.u(0.0);
  sys.p0 = out.exact.p(0.0);
  return out;
}

Eigen::MatrixXd dense_schur(const CoupledSystem& sys, Eigen::Index max_dim) {
  if (sys.n_p > max_dim)
    throw DomainError("dense_schur: n_p = " + std::to_string(sys.n_p) + " exceeds dense limit " +
                      std::to_string(max_dim));
  const Eigen::MatrixXd Dt = Eigen::MatrixXd(sys.D.transpose());
  Eigen::MatrixXd M = Eigen::MatrixXd(sys.D) * sys.A->solve(Dt);
  return 0.5 * (M + M.transpose());
}

Eigen::VectorXd pencil_eigenvalues(const CoupledSystem& sys, Eigen::Index max_dim) {
  const Eigen::MatrixXd M = dense_schur(sys, max_dim);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(M, Eigen::MatrixXd(sys.C->matrix()),
                                                               Eigen::EigenvaluesOnly);
  return ges.eigenvalues();
}

}  // namespace rkdecouple
