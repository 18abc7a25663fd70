#include "rkdecouple/biot/fe_space.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rkdecouple/errors.hpp"

namespace rkdecouple::biot {

Rule1D gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  Rule1D r;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.x.push_back(0.5 * (1.0 - x));
    r.w.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  }
  return r;
}

TriangleRule triangle_rule(int n) {
  const Rule1D g = gauss_legendre(n);
  TriangleRule rule;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = g.x[i], b = g.x[j];
      rule.points.emplace_back(a * (1.0 - b), b);
      rule.weights.push_back(g.w[i] * g.w[j] * (1.0 - b));
    }
  return rule;
}

ReferenceBasis::ReferenceBasis(int degree) : degree_(degree) {
  if (degree < 1 || degree > 3) throw DomainError("ReferenceBasis: degree " + std::to_string(degree) + " unsupported");
  const std::array<Eigen::Vector2d, 3> v{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  for (const auto& p : v) nodes_.push_back(p);
  for (int e = 0; e < 3; ++e)
    for (int m = 1; m < degree; ++m) nodes_.push_back(v[e] + (v[(e + 1) % 3] - v[e]) * (double(m) / degree));
  if (degree == 3) nodes_.emplace_back(1.0 / 3.0, 1.0 / 3.0);

  for (int total = 0; total <= degree; ++total)
    for (int a = total; a >= 0; --a) exponents_.push_back({a, total - a});

  const int n = size();
  Eigen::MatrixXd V(n, n);  // V(i, m) = monomial_m(node_i)
  for (int i = 0; i < n; ++i) V.row(i) = monomials(nodes_[i]).transpose();
  coeffs_ = V.fullPivLu().inverse();
}

Eigen::VectorXd ReferenceBasis::monomials(const Eigen::Vector2d& xi) const {
  Eigen::VectorXd m(exponents_.size());
  for (std::size_t k = 0; k < exponents_.size(); ++k)
    m[k] = std::pow(xi[0], exponents_[k][0]) * std::pow(xi[1], exponents_[k][1]);
  return m;
}

Eigen::MatrixXd ReferenceBasis::monomial_gradients(const Eigen::Vector2d& xi) const {
  Eigen::MatrixXd g(exponents_.size(), 2);
  for (std::size_t k = 0; k < exponents_.size(); ++k) {
    const int a = exponents_[k][0], b = exponents_[k][1];
    g(k, 0) = a == 0 ? 0.0 : a * std::pow(xi[0], a - 1) * std::pow(xi[1], b);
    g(k, 1) = b == 0 ? 0.0 : b * std::pow(xi[0], a) * std::pow(xi[1], b - 1);
  }
  return g;
}

Eigen::VectorXd ReferenceBasis::values(const Eigen::Vector2d& xi) const {
  return coeffs_.transpose() * monomials(xi);
}

Eigen::MatrixXd ReferenceBasis::gradients(const Eigen::Vector2d& xi) const {
  return coeffs_.transpose() * monomial_gradients(xi);
}

LagrangeSpace make_lagrange_space(const Mesh& mesh, int degree) {
  if (degree < 1 || degree > 3) throw DomainError("make_lagrange_space: degree " + std::to_string(degree) + " unsupported");
  LagrangeSpace sp;
  sp.degree = degree;
  const int nv = static_cast<int>(mesh.num_vertices());
  const int ne = static_cast<int>(mesh.num_edges());
  const int per_edge = degree - 1;
  const int per_cell = degree == 3 ? 1 : 0;
  sp.n_dofs = nv + ne * per_edge + static_cast<int>(mesh.num_cells()) * per_cell;
  sp.dof_points.resize(sp.n_dofs);

  for (int v = 0; v < nv; ++v) sp.dof_points[v] = mesh.vertices[v];
  for (int e = 0; e < ne; ++e) {
    const auto& a = mesh.vertices[mesh.edges[e][0]];
    const auto& b = mesh.vertices[mesh.edges[e][1]];
    for (int m = 1; m <= per_edge; ++m) sp.dof_points[nv + e * per_edge + m - 1] = a + (b - a) * (double(m) / degree);
  }

  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    std::vector<int> dofs(cell.begin(), cell.end());
    for (int e = 0; e < 3; ++e) {
      const int edge = mesh.cell_edges[c][e];
      const bool forward = cell[e] < cell[(e + 1) % 3];
      for (int m = 1; m <= per_edge; ++m) {
        const int mg = forward ? m : degree - m;
        dofs.push_back(nv + edge * per_edge + mg - 1);
      }
    }
    if (per_cell) {
      const int d = nv + ne * per_edge + static_cast<int>(c);
      dofs.push_back(d);
      sp.dof_points[d] = (mesh.vertices[cell[0]] + mesh.vertices[cell[1]] + mesh.vertices[cell[2]]) / 3.0;
    }
    sp.cell_dofs.push_back(std::move(dofs));
  }

  sp.on_boundary.resize(sp.n_dofs);
  for (int d = 0; d < sp.n_dofs; ++d) {
    const auto& x = sp.dof_points[d];
    sp.on_boundary[d] = x[0] < 1e-12 || x[1] < 1e-12 || x[0] > 1.0 - 1e-12 || x[1] > 1.0 - 1e-12;
  }
  return sp;
}

CellGeometry cell_geometry(const Mesh& mesh, int cell) {
  const auto& c = mesh.cells[cell];
  CellGeometry g;
  g.x0 = mesh.vertices[c[0]];
  g.J.col(0) = mesh.vertices[c[1]] - g.x0;
  g.J.col(1) = mesh.vertices[c[2]] - g.x0;
  g.det = g.J.determinant();
  g.J_inv_T = g.J.inverse().transpose();
  return g;
}

}  // namespace rkdecouple::biot
