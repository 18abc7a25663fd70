#include "rkdecouple/linear_operator.hpp"

#include <vector>

#include "rkdecouple/errors.hpp"

namespace rkdecouple {

SpdOperator::SpdOperator(SparseMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DomainError("SpdOperator: matrix must be square");
  m_.makeCompressed();
}

SpdOperator::SpdOperator(const Eigen::MatrixXd& dense) : SpdOperator(SparseMatrix(dense.sparseView())) {}

void SpdOperator::factorize() const {
  std::call_once(once_, [this] {
    const double scale = m_.norm();
    SparseMatrix asym = SparseMatrix(m_.transpose()) - m_;
    const bool symmetric = asym.norm() <= 1e-12 * (scale > 0 ? scale : 1.0);
    llt_ = std::make_unique<Factor>();
    if (symmetric && m_.rows() > 0) {
      llt_->compute(m_);
      ok_ = llt_->info() == Eigen::Success;
    }
  });
}

const SpdOperator::Factor& SpdOperator::factor() const {
  factorize();
  if (!ok_) throw NotSpdError("Cholesky factorization failed: operator is not symmetric positive definite");
  return *llt_;
}

Eigen::VectorXd SpdOperator::solve(const Eigen::VectorXd& rhs) const { return factor().solve(rhs); }

Eigen::MatrixXd SpdOperator::solve(const Eigen::MatrixXd& rhs) const { return factor().solve(rhs); }

bool SpdOperator::is_spd_checked() const {
  factorize();
  return ok_;
}

SparseMatrix kron(const Eigen::MatrixXd& small, const SparseMatrix& big) {
  const Eigen::Index s = small.rows(), t = small.cols();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(big.nonZeros() * s * t));
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < t; ++j) {
      const double a = small(i, j);
      if (a == 0.0) continue;
      for (int col = 0; col < big.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(big, col); it; ++it)
          trips.emplace_back(static_cast<int>(i * big.rows() + it.row()),
                             static_cast<int>(j * big.cols() + it.col()), a * it.value());
    }
  SparseMatrix out(s * big.rows(), t * big.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SparseSolver::SparseSolver(const SparseMatrix& m) {
  SparseMatrix mc = m;
  mc.makeCompressed();
  lu_.analyzePattern(mc);
  lu_.factorize(mc);
  if (lu_.info() != Eigen::Success)
    throw Error("sparse LU factorization failed: " + lu_.lastErrorMessage());
}

Eigen::VectorXd SparseSolver::solve(const Eigen::VectorXd& rhs) const {
  return lu_.solve(rhs);
}

}  // namespace rkdecouple
