#include "vbmhe/psd.hpp"

#include <Eigen/Eigenvalues>

namespace vbmhe {

Matrix symmetrized(const Matrix& X) {
  return 0.5 * (X + X.transpose());
}

bool is_symmetric(const Matrix& X, double tol) {
  if (X.rows() != X.cols()) return false;
  const double scale = 1.0 + X.cwiseAbs().maxCoeff();
  return (X - X.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_eigenvalue(const Matrix& X) {
  if (X.rows() != X.cols()) {
    throw std::invalid_argument("min_eigenvalue: matrix must be square");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(X, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix cholesky_lower(const Matrix& X) {
  if (X.rows() != X.cols()) {
    throw std::invalid_argument("cholesky_lower: matrix must be square");
  }
  Eigen::LLT<Matrix> llt(X);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky_lower: matrix is not positive definite");
  }
  return llt.matrixL();
}

Matrix spd_inverse(const Matrix& X) {
  if (X.rows() != X.cols()) {
    throw std::invalid_argument("spd_inverse: matrix must be square");
  }
  Eigen::LLT<Matrix> llt(X);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("spd_inverse: matrix is not positive definite");
  }
  return symmetrized(llt.solve(Matrix::Identity(X.rows(), X.cols())));
}

bool loewner_leq(const Matrix& X, const Matrix& Y) {
  const double scale =
      std::max(X.cwiseAbs().maxCoeff(), Y.cwiseAbs().maxCoeff());
  return loewner_leq(X, Y, 1e-9 * (1.0 + scale));
}

bool loewner_leq(const Matrix& X, const Matrix& Y, double tol) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols() || X.rows() != X.cols()) {
    throw std::invalid_argument("loewner_leq: dimension mismatch");
  }
  return min_eigenvalue(symmetrized(Y - X)) >= -tol;
}

Matrix covariance_factor(const Matrix& cov) {
  if (cov.rows() != cov.cols()) {
    throw std::invalid_argument("covariance_factor: matrix must be square");
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // semidefinite case: clamp negative eigenvalues to zero
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(cov));
  const double tol = 1e-9 * (1.0 + cov.cwiseAbs().maxCoeff());
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol) {
      throw NotPositiveDefinite(
          "covariance_factor: matrix has a negative eigenvalue");
    }
    ev(i) = std::max(ev(i), 0.0);
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

SpdMatrix::SpdMatrix(const Matrix& X) {
  if (X.rows() != X.cols()) {
    throw std::invalid_argument("SpdMatrix: matrix must be square");
  }
  if (!is_symmetric(X)) {
    throw std::invalid_argument("SpdMatrix: matrix is not symmetric");
  }
  m_ = symmetrized(X);
}

CovarianceConstraintSet::CovarianceConstraintSet(SpdMatrix lower,
                                                 SpdMatrix upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.dim() != upper_.dim()) {
    throw std::invalid_argument("constraint set: bound dimensions differ");
  }
  cholesky_lower(lower_.mat());  // lower bound must be positive definite
  tol_ = 1e-9 * (1.0 + upper_.mat().cwiseAbs().maxCoeff());
  if (min_eigenvalue(upper_.mat() - lower_.mat()) < -tol_) {
    throw std::invalid_argument(
        "constraint set: upper bound is not >= lower bound");
  }
}

bool CovarianceConstraintSet::contains(const Matrix& X) const {
  if (X.rows() != dim() || X.cols() != dim()) {
    throw std::invalid_argument("contains: dimension mismatch");
  }
  if (!is_symmetric(X)) return false;
  const Matrix S = symmetrized(X);
  return min_eigenvalue(S - lower_.mat()) >= -tol_ &&
         min_eigenvalue(upper_.mat() - S) >= -tol_;
}

}  // namespace vbmhe
