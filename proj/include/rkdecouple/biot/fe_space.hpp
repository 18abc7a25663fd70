#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rkdecouple/biot/mesh.hpp"

namespace rkdecouple::biot {

/// Gauss-Legendre rule with n points on [0, 1].
struct Rule1D {
  std::vector<double> x, w;
};
Rule1D gauss_legendre(int n);

/// Collapsed tensor Gauss rule on the reference triangle {x, y >= 0, x + y <= 1}.
/// Integrates polynomials of total degree <= 2n - 2 exactly.
struct TriangleRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;  // sum to 1/2
};
TriangleRule triangle_rule(int n);

/// Nodal Lagrange basis of degree 1..3 on the reference triangle. Node order: the three vertices,
/// then degree-1 nodes along each local edge e (vertex e to vertex (e+1)%3), then interior nodes.
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }

  Eigen::VectorXd values(const Eigen::Vector2d& xi) const;
  /// size() x 2 matrix of reference gradients.
  Eigen::MatrixXd gradients(const Eigen::Vector2d& xi) const;

 private:
  Eigen::VectorXd monomials(const Eigen::Vector2d& xi) const;
  Eigen::MatrixXd monomial_gradients(const Eigen::Vector2d& xi) const;

  int degree_;
  std::vector<Eigen::Vector2d> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coeffs_;  // basis_i = sum_m coeffs_(m, i) monomial_m
};

/// Continuous scalar Lagrange space on a mesh with global dof numbering:
/// vertices, then edge dofs (ordered from the lower to the higher vertex id), then cell interiors.
struct LagrangeSpace {
  int degree = 0;
  int n_dofs = 0;
  std::vector<std::vector<int>> cell_dofs;  // local order matches ReferenceBasis
  std::vector<Eigen::Vector2d> dof_points;
  std::vector<bool> on_boundary;
};

LagrangeSpace make_lagrange_space(const Mesh& mesh, int degree);

/// Affine map data of a cell: x = x0 + J xi.
struct CellGeometry {
  Eigen::Vector2d x0;
  Eigen::Matrix2d J;
  Eigen::Matrix2d J_inv_T;
  double det = 0.0;
};
CellGeometry cell_geometry(const Mesh& mesh, int cell);

}  // namespace rkdecouple::biot
