#include "rkdecouple/biot/assembly.hpp"

#include <string>

#include "rkdecouple/errors.hpp"

namespace rkdecouple::biot {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Basis values and reference gradients at the quadrature points of one rule.
struct Tabulated {
  std::vector<Eigen::VectorXd> values;
  std::vector<Eigen::MatrixXd> gradients;
};

Tabulated tabulate(const ReferenceBasis& basis, const TriangleRule& rule) {
  Tabulated t;
  for (const auto& xi : rule.points) {
    t.values.push_back(basis.values(xi));
    t.gradients.push_back(basis.gradients(xi));
  }
  return t;
}

SparseMatrix from_triplets(const Triplets& trips, Eigen::Index rows, Eigen::Index cols) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// Selection matrix picking the free entries of a full vector.
SparseMatrix restriction(const std::vector<int>& free, Eigen::Index n_full) {
  Triplets trips;
  for (std::size_t i = 0; i < free.size(); ++i) trips.emplace_back(static_cast<int>(i), free[i], 1.0);
  return from_triplets(trips, static_cast<Eigen::Index>(free.size()), n_full);
}

SparseMatrix reduce(const SparseMatrix& full, const SparseMatrix& R_row, const SparseMatrix& R_col) {
  SparseMatrix out = R_row * full * SparseMatrix(R_col.transpose());
  out.prune(0.0);
  out.makeCompressed();
  return out;
}

}  // namespace

BiotDiscretization assemble_biot(const Mesh& mesh, const BiotParameters& params, int degree_u, int degree_p) {
  if (!((degree_u == 2 && degree_p == 1) || (degree_u == 3 && degree_p == 2)))
    throw DomainError("assemble_biot: unsupported degree pair (" + std::to_string(degree_u) + "," +
                      std::to_string(degree_p) + "); expected (2,1) or (3,2)");
  params.validate();

  BiotDiscretization disc;
  disc.mesh = mesh;
  disc.params = params;
  disc.degree_u = degree_u;
  disc.degree_p = degree_p;
  disc.space_u = make_lagrange_space(mesh, degree_u);
  disc.space_p = make_lagrange_space(mesh, degree_p);

  const int nsu = disc.space_u.n_dofs, nsp = disc.space_p.n_dofs;
  const ReferenceBasis bu(degree_u), bp(degree_p);
  const TriangleRule rule = triangle_rule(degree_u + 1);
  const Tabulated tu = tabulate(bu, rule), tp = tabulate(bp, rule);
  const int ku = bu.size(), kp = bp.size();

  Triplets tA, tVg, tB, tC, tQg, tD, tMp;
  const double mu = params.mu, lam = params.lambda, kappa = params.kappa_over_nu;
  const double invM = 1.0 / params.biot_modulus, alpha = params.alpha;

  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    const auto& du = disc.space_u.cell_dofs[c];
    const auto& dp = disc.space_p.cell_dofs[c];
    Eigen::MatrixXd Ku = Eigen::MatrixXd::Zero(2 * ku, 2 * ku);  // elasticity, local (comp, i)
    Eigen::MatrixXd Su = Eigen::MatrixXd::Zero(ku, ku), Mu = Eigen::MatrixXd::Zero(ku, ku);
    Eigen::MatrixXd Sp = Eigen::MatrixXd::Zero(kp, kp), Mp = Eigen::MatrixXd::Zero(kp, kp);
    Eigen::MatrixXd Dl = Eigen::MatrixXd::Zero(kp, 2 * ku);

    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * std::abs(g.det);
      const Eigen::MatrixXd Gu = tu.gradients[q] * g.J_inv_T.transpose();  // ku x 2 physical gradients
      const Eigen::MatrixXd Gp = tp.gradients[q] * g.J_inv_T.transpose();
      const Eigen::VectorXd& vu = tu.values[q];
      const Eigen::VectorXd& vp = tp.values[q];

      const Eigen::MatrixXd GG = Gu * Gu.transpose();
      Su += w * GG;
      Mu += w * vu * vu.transpose();
      Sp += w * Gp * Gp.transpose();
      Mp += w * vp * vp.transpose();
      for (int cc = 0; cc < 2; ++cc)
        for (int d = 0; d < 2; ++d) {
          // mu (delta_cd grad phi_i . grad phi_j + d_d phi_i d_c phi_j) + lambda d_c phi_i d_d phi_j
          Eigen::MatrixXd blk = mu * (Gu.col(d) * Gu.col(cc).transpose()) + lam * (Gu.col(cc) * Gu.col(d).transpose());
          if (cc == d) blk += mu * GG;
          Ku.block(cc * ku, d * ku, ku, ku) += w * blk;
        }
      for (int cc = 0; cc < 2; ++cc) Dl.block(0, cc * ku, kp, ku) += w * alpha * vp * Gu.col(cc).transpose();
    }

    for (int cc = 0; cc < 2; ++cc)
      for (int i = 0; i < ku; ++i) {
        const int gi = cc * nsu + du[i];
        for (int d = 0; d < 2; ++d)
          for (int j = 0; j < ku; ++j) tA.emplace_back(gi, d * nsu + du[j], Ku(cc * ku + i, d * ku + j));
        for (int j = 0; j < ku; ++j) tVg.emplace_back(gi, cc * nsu + du[j], Su(i, j) + Mu(i, j));
      }
    for (int i = 0; i < kp; ++i) {
      for (int j = 0; j < kp; ++j) {
        tB.emplace_back(dp[i], dp[j], kappa * Sp(i, j));
        tC.emplace_back(dp[i], dp[j], invM * Mp(i, j));
        tMp.emplace_back(dp[i], dp[j], Mp(i, j));
        tQg.emplace_back(dp[i], dp[j], Sp(i, j) + Mp(i, j));
      }
      for (int cc = 0; cc < 2; ++cc)
        for (int j = 0; j < ku; ++j) tD.emplace_back(dp[i], cc * nsu + du[j], Dl(i, cc * ku + j));
    }
  }

  for (int cc = 0; cc < 2; ++cc)
    for (int d = 0; d < nsu; ++d)
      if (!disc.space_u.on_boundary[d]) disc.u_free.push_back(cc * nsu + d);
  for (int d = 0; d < nsp; ++d)
    if (!disc.space_p.on_boundary[d]) disc.p_free.push_back(d);

  const SparseMatrix Ru = restriction(disc.u_free, 2 * nsu), Rp = restriction(disc.p_free, nsp);
  disc.elasticity_full = from_triplets(tA, 2 * nsu, 2 * nsu);
  disc.pressure_mass_full = from_triplets(tMp, nsp, nsp);
  disc.A = reduce(disc.elasticity_full, Ru, Ru);
  disc.gram_V = reduce(from_triplets(tVg, 2 * nsu, 2 * nsu), Ru, Ru);
  disc.B = reduce(from_triplets(tB, nsp, nsp), Rp, Rp);
  disc.C = reduce(from_triplets(tC, nsp, nsp), Rp, Rp);
  disc.gram_H = reduce(disc.pressure_mass_full, Rp, Rp);
  disc.gram_Q = reduce(from_triplets(tQg, nsp, nsp), Rp, Rp);
  disc.D = reduce(from_triplets(tD, nsp, 2 * nsu), Rp, Ru);
  return disc;
}

Eigen::VectorXd interpolate_u(const BiotDiscretization& disc, const VectorField& f, bool full) {
  const int ns = disc.space_u.n_dofs;
  Eigen::VectorXd v(2 * ns);
  for (int d = 0; d < ns; ++d) {
    const auto& x = disc.space_u.dof_points[d];
    const Eigen::Vector2d val = f(x[0], x[1]);
    v[d] = val[0];
    v[ns + d] = val[1];
  }
  if (full) return v;
  Eigen::VectorXd r(disc.n_u());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = v[disc.u_free[i]];
  return r;
}

Eigen::VectorXd interpolate_p(const BiotDiscretization& disc, const ScalarField& f, bool full) {
  const int ns = disc.space_p.n_dofs;
  Eigen::VectorXd v(ns);
  for (int d = 0; d < ns; ++d) v[d] = f(disc.space_p.dof_points[d][0], disc.space_p.dof_points[d][1]);
  if (full) return v;
  Eigen::VectorXd r(disc.n_p());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = v[disc.p_free[i]];
  return r;
}

Eigen::VectorXd load_u(const BiotDiscretization& disc, const VectorField& f) {
  const ReferenceBasis bu(disc.degree_u);
  const TriangleRule rule = triangle_rule(disc.degree_u + 3);
  const Tabulated tu = tabulate(bu, rule);
  const int ns = disc.space_u.n_dofs;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(2 * ns);
  for (int c = 0; c < static_cast<int>(disc.mesh.num_cells()); ++c) {
    const CellGeometry g = cell_geometry(disc.mesh, c);
    const auto& du = disc.space_u.cell_dofs[c];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Eigen::Vector2d x = g.x0 + g.J * rule.points[q];
      const Eigen::Vector2d val = f(x[0], x[1]) * (rule.weights[q] * std::abs(g.det));
      for (int i = 0; i < bu.size(); ++i) {
        full[du[i]] += val[0] * tu.values[q][i];
        full[ns + du[i]] += val[1] * tu.values[q][i];
      }
    }
  }
  Eigen::VectorXd r(disc.n_u());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = full[disc.u_free[i]];
  return r;
}

Eigen::VectorXd load_p(const BiotDiscretization& disc, const ScalarField& gfun) {
  const ReferenceBasis bp(disc.degree_p);
  const TriangleRule rule = triangle_rule(disc.degree_u + 3);
  const Tabulated tp = tabulate(bp, rule);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(disc.space_p.n_dofs);
  for (int c = 0; c < static_cast<int>(disc.mesh.num_cells()); ++c) {
    const CellGeometry g = cell_geometry(disc.mesh, c);
    const auto& dp = disc.space_p.cell_dofs[c];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Eigen::Vector2d x = g.x0 + g.J * rule.points[q];
      const double val = gfun(x[0], x[1]) * rule.weights[q] * std::abs(g.det);
      for (int i = 0; i < bp.size(); ++i) full[dp[i]] += val * tp.values[q][i];
    }
  }
  Eigen::VectorXd r(disc.n_p());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = full[disc.p_free[i]];
  return r;
}

ManufacturedSystem make_biot_system(const BiotDiscretization& disc, const ManufacturedProblem& problem,
                                    BiotForcing forcing) {
  const Eigen::VectorXd U0 = interpolate_u(disc, [&](double x, double y) { return problem.u(0.0, x, y); });
  const Eigen::VectorXd P0 = interpolate_p(disc, [&](double x, double y) { return problem.p(0.0, x, y); });
  const double a = problem.decay_rate();
  Eigen::VectorXd F0, G0;
  if (forcing == BiotForcing::continuous) {
    F0 = load_u(disc, [&](double x, double y) { return problem.forcing_f(0.0, x, y); });
    G0 = load_p(disc, [&](double x, double y) { return problem.forcing_g(0.0, x, y); });
  } else {
    // interpolants times exp(-a t) solve the semi-discrete system exactly
    F0 = disc.A * U0 - disc.D.transpose() * P0;
    G0 = -a * (disc.D * U0) - a * (disc.C * P0) + disc.B * P0;
  }

  ManufacturedSystem out;
  CoupledSystem& sys = out.system;
  sys.n_u = disc.n_u();
  sys.n_p = disc.n_p();
  sys.A = std::make_shared<SpdOperator>(disc.A);
  sys.B = std::make_shared<SpdOperator>(disc.B);
  sys.C = std::make_shared<SpdOperator>(disc.C);
  sys.D = disc.D;
  sys.gram_V = disc.gram_V;
  sys.gram_Q = disc.gram_Q;
  sys.gram_H = disc.gram_H;
  sys.forcing_f = [F0, a](double t) -> Eigen::VectorXd { return std::exp(-a * t) * F0; };
  sys.forcing_g = [G0, a](double t) -> Eigen::VectorXd { return std::exp(-a * t) * G0; };
  sys.p0 = P0;
  sys.u0 = sys.A->solve(Eigen::VectorXd(F0 + disc.D.transpose() * P0));
  out.exact.u = [U0, a](double t) -> Eigen::VectorXd { return std::exp(-a * t) * U0; };
  out.exact.p = [P0, a](double t) -> Eigen::VectorXd { return std::exp(-a * t) * P0; };
  return out;
}

std::pair<double, double> error_norms(const BiotDiscretization& disc, const ManufacturedProblem& problem,
                                      const Eigen::VectorXd& u_h, const Eigen::VectorXd& p_h, double t) {
  const Eigen::VectorXd eu = u_h - interpolate_u(disc, [&](double x, double y) { return problem.u(t, x, y); });
  const Eigen::VectorXd ep = p_h - interpolate_p(disc, [&](double x, double y) { return problem.p(t, x, y); });
  return {std::sqrt(std::max(0.0, eu.dot(disc.gram_V * eu))), std::sqrt(std::max(0.0, ep.dot(disc.gram_H * ep)))};
}

}  // namespace rkdecouple::biot
