#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "rkdecouple/biot/fe_space.hpp"
#include "rkdecouple/biot/manufactured.hpp"
#include "rkdecouple/biot/mesh.hpp"
#include "rkdecouple/coupled_system.hpp"

namespace rkdecouple::biot {

/// Taylor-Hood discretization with homogeneous Dirichlet conditions on both fields.
/// Full displacement dof index = component * space_u.n_dofs + scalar dof.
struct BiotDiscretization {
  Mesh mesh;
  BiotParameters params;
  int degree_u = 2;
  int degree_p = 1;
  LagrangeSpace space_u;
  LagrangeSpace space_p;
  std::vector<int> u_free;  // reduced index -> full index
  std::vector<int> p_free;

  // Reduced (boundary-free) operators.
  SparseMatrix A;       // int 2 mu eps(u):eps(v) + lambda div u div v
  SparseMatrix B;       // int kappa grad p . grad q
  SparseMatrix C;       // int p q / M
  SparseMatrix D;       // int alpha div(u) q, size n_p x n_u
  SparseMatrix gram_V;  // full H1 inner product, displacement
  SparseMatrix gram_Q;  // full H1 inner product, pressure
  SparseMatrix gram_H;  // L2 inner product, pressure

  // Before boundary elimination.
  SparseMatrix elasticity_full;
  SparseMatrix pressure_mass_full;

  Eigen::Index n_u() const { return static_cast<Eigen::Index>(u_free.size()); }
  Eigen::Index n_p() const { return static_cast<Eigen::Index>(p_free.size()); }
};

using VectorField = std::function<Eigen::Vector2d(double, double)>;
using ScalarField = std::function<double(double, double)>;

/// Supported pairs: (2, 1) and (3, 2). Throws DomainError otherwise.
BiotDiscretization assemble_biot(const Mesh& mesh, const BiotParameters& params, int degree_u, int degree_p);

/// Nodal interpolants; reduced vectors unless full is set.
Eigen::VectorXd interpolate_u(const BiotDiscretization& disc, const VectorField& f, bool full = false);
Eigen::VectorXd interpolate_p(const BiotDiscretization& disc, const ScalarField& f, bool full = false);

/// Reduced load vectors int f . v and int g q.
Eigen::VectorXd load_u(const BiotDiscretization& disc, const VectorField& f);
Eigen::VectorXd load_p(const BiotDiscretization& disc, const ScalarField& g);

/// continuous: load vectors of the analytic forcing terms.
/// semi_discrete: forcing chosen so that the time-scaled interpolants solve the discrete
/// system exactly, leaving only the time discretization error.
enum class BiotForcing { continuous, semi_discrete };

/// Coupled system with manufactured forcing. p0 is the pressure interpolant at t = 0 and
/// u0 solves A u0 = f(0) + D^T p0, so the initial data are consistent. The exact solution is
/// returned as nodal interpolants.
ManufacturedSystem make_biot_system(const BiotDiscretization& disc, const ManufacturedProblem& problem,
                                    BiotForcing forcing = BiotForcing::continuous);

/// (H1 error of u, L2 error of p) against the interpolants of the exact fields at time t.
std::pair<double, double> error_norms(const BiotDiscretization& disc, const ManufacturedProblem& problem,
                                      const Eigen::VectorXd& u_h, const Eigen::VectorXd& p_h, double t);

}  // namespace rkdecouple::biot
