#include "rkdecouple/rk_tableau.hpp"

#include <cmath>

#include "rkdecouple/errors.hpp"

namespace rkdecouple {

ButcherTableau make_tableau(std::string name, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            int classical_order, int stage_order) {
  if (A.rows() != A.cols() || A.rows() != b.size() || A.rows() == 0)
    throw DomainError("tableau: A must be square and match the length of b");
  ButcherTableau tab;
  tab.name = std::move(name);
  tab.s = static_cast<int>(A.rows());
  tab.A = A;
  tab.b = b;
  tab.c = A.rowwise().sum();
  tab.classical_order = classical_order;
  tab.stage_order = stage_order;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw DomainError("tableau: coefficient matrix A is singular");
  tab.A_inv = lu.inverse();
  tab.r_infinity = 1.0 - b.dot(tab.A_inv * Eigen::VectorXd::Ones(tab.s));
  tab.stiffly_accurate = (A.row(tab.s - 1).transpose() - b).cwiseAbs().maxCoeff() <= 1e-15;
  return tab;
}

ButcherTableau radau_iia(int s) {
  Eigen::MatrixXd A(s > 0 ? s : 0, s > 0 ? s : 0);
  Eigen::VectorXd b(s > 0 ? s : 0);
  switch (s) {
    case 1:
      A << 1.0;
      b << 1.0;
      break;
    case 2:
      A << 5.0 / 12.0, -1.0 / 12.0,
           3.0 / 4.0, 1.0 / 4.0;
      b << 3.0 / 4.0, 1.0 / 4.0;
      break;
    case 3: {
      const double r6 = std::sqrt(6.0);
      A << (88.0 - 7.0 * r6) / 360.0, (296.0 - 169.0 * r6) / 1800.0, (-2.0 + 3.0 * r6) / 225.0,
           (296.0 + 169.0 * r6) / 1800.0, (88.0 + 7.0 * r6) / 360.0, (-2.0 - 3.0 * r6) / 225.0,
           (16.0 - r6) / 36.0, (16.0 + r6) / 36.0, 1.0 / 9.0;
      b << (16.0 - r6) / 36.0, (16.0 + r6) / 36.0, 1.0 / 9.0;
      break;
    }
    default:
      throw DomainError("radau_iia: unsupported stage count " + std::to_string(s) +
                        " (expected 1, 2 or 3)");
  }
  ButcherTableau tab = make_tableau("radau-iia-" + std::to_string(s), A, b, 2 * s - 1, s);
  // Exact for Radau IIA; the computed value differs only by rounding.
  tab.r_infinity = 0.0;
  tab.stiffly_accurate = true;
  return tab;
}

ButcherTableau tableau_from_key(const std::string& key) {
  if (key == "radau-iia-1") return radau_iia(1);
  if (key == "radau-iia-2") return radau_iia(2);
  if (key == "radau-iia-3") return radau_iia(3);
  throw DomainError("unknown tableau key '" + key + "'");
}

std::complex<double> stability_function(const ButcherTableau& tab, std::complex<double> z) {
  using Mat = Eigen::MatrixXcd;
  Mat M = Mat::Identity(tab.s, tab.s) - z * tab.A.cast<std::complex<double>>();
  Eigen::FullPivLU<Mat> lu(M);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    throw PoleError("stability_function: I - zA is singular at z = (" + std::to_string(z.real()) +
                    ", " + std::to_string(z.imag()) + ")");
  }
  Eigen::VectorXcd x = lu.solve(Eigen::VectorXcd::Ones(tab.s));
  return 1.0 + z * tab.b.cast<std::complex<double>>().dot(x);
}

Eigen::MatrixXcd delta_operator(const ButcherTableau& tab, std::complex<double> zeta) {
  if (std::abs(zeta) > 1.0 + 1e-14)
    throw DomainError("delta_operator: |zeta| > 1 is outside the closed unit disc");
  const Eigen::MatrixXcd Ainv = tab.A_inv.cast<std::complex<double>>();
  const Eigen::VectorXcd a1 = Ainv * Eigen::VectorXcd::Ones(tab.s);
  const Eigen::RowVectorXcd bA = tab.b.cast<std::complex<double>>().transpose() * Ainv;
  return Ainv - (zeta / (1.0 - tab.r_infinity * zeta)) * (a1 * bA);
}

Eigen::MatrixXd algebraic_stability_matrix(const ButcherTableau& tab) {
  Eigen::MatrixXd bA = tab.b.asDiagonal() * tab.A;
  return bA + bA.transpose() - tab.b * tab.b.transpose();
}

bool is_algebraically_stable(const ButcherTableau& tab, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(algebraic_stability_matrix(tab));
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace rkdecouple
