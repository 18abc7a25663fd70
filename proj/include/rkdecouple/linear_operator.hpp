#pragma once

#include <memory>
#include <mutex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rkdecouple {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric positive definite operator with a lazily built Cholesky factorization.
/// The factorization is created once (thread-safe); solves are then read-only.
class SpdOperator {
 public:
  explicit SpdOperator(SparseMatrix m);
  explicit SpdOperator(const Eigen::MatrixXd& dense);

  SpdOperator(const SpdOperator&) = delete;
  SpdOperator& operator=(const SpdOperator&) = delete;

  Eigen::Index rows() const { return m_.rows(); }
  const SparseMatrix& matrix() const { return m_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return m_ * x; }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const { return m_ * x; }

  /// Throws NotSpdError if the matrix is not symmetric positive definite.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  /// Symmetry to 1e-12 (relative) and successful Cholesky factorization.
  bool is_spd_checked() const;

 private:
  using Factor = Eigen::SimplicialLLT<SparseMatrix>;
  void factorize() const;
  const Factor& factor() const;

  SparseMatrix m_;
  mutable std::once_flag once_;
  mutable std::unique_ptr<Factor> llt_;
  mutable bool ok_ = false;
};

using SpdOperatorPtr = std::shared_ptr<const SpdOperator>;

/// Kronecker product of a small dense matrix with a sparse matrix.
SparseMatrix kron(const Eigen::MatrixXd& small, const SparseMatrix& big);

/// General sparse LU with a descriptive failure.
class SparseSolver {
 public:
  explicit SparseSolver(const SparseMatrix& m);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace rkdecouple
