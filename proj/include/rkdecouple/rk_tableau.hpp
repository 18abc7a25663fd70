#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

namespace rkdecouple {

/// Implicit Runge-Kutta method in Butcher form, with derived stability metadata.
struct ButcherTableau {
  std::string name;
  int s = 0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  int classical_order = 0;
  int stage_order = 0;
  double r_infinity = 0.0;  // 1 - b^T A^{-1} 1
  bool stiffly_accurate = false;

  /// Cached A^{-1}; filled by make_tableau.
  Eigen::MatrixXd A_inv;
};

/// Builds a tableau from raw coefficients. Nodes are A*1; r_infinity, A_inv and
/// stiffly_accurate are computed. Throws DomainError on size mismatch or singular A.
ButcherTableau make_tableau(std::string name, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            int classical_order, int stage_order);

/// Radau IIA with s in {1, 2, 3}.
ButcherTableau radau_iia(int s);

/// Lookup by key "radau-iia-1", "radau-iia-2" or "radau-iia-3".
ButcherTableau tableau_from_key(const std::string& key);

/// R(z) = 1 + z b^T (I - zA)^{-1} 1. Throws PoleError if I - zA is singular.
std::complex<double> stability_function(const ButcherTableau& tab, std::complex<double> z);

/// (A + zeta/(1-zeta) 1 b^T)^{-1}, evaluated through the pole-free form
/// A^{-1} - zeta A^{-1} 1 b^T A^{-1} / (1 - R(inf) zeta). Throws DomainError for |zeta| > 1.
Eigen::MatrixXcd delta_operator(const ButcherTableau& tab, std::complex<double> zeta);

/// diag(b) A + A^T diag(b) - b b^T.
Eigen::MatrixXd algebraic_stability_matrix(const ButcherTableau& tab);

/// True when the algebraic stability matrix has no eigenvalue below -tol.
bool is_algebraically_stable(const ButcherTableau& tab, double tol = 1e-13);

}  // namespace rkdecouple
