#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace vbmhe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Matrix symmetrized(const Matrix& X);

// symmetry within a relative tolerance scaled by the largest entry
bool is_symmetric(const Matrix& X, double tol = 1e-9);

// smallest eigenvalue of a symmetric matrix
double min_eigenvalue(const Matrix& X);

// lower-triangular G with G G^T = X; throws NotPositiveDefinite
Matrix cholesky_lower(const Matrix& X);

// inverse of a symmetric positive definite matrix, returned symmetrized
Matrix spd_inverse(const Matrix& X);

// X <= Y in the Loewner (positive semidefinite) order within tolerance
bool loewner_leq(const Matrix& X, const Matrix& Y);
bool loewner_leq(const Matrix& X, const Matrix& Y, double tol);

// factor F with F F^T = cov; positive semidefinite inputs fall back to an
// eigendecomposition with negative eigenvalues clamped to zero
Matrix covariance_factor(const Matrix& cov);

// symmetric matrix, validated and stored in symmetrized form
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& X);

  const Matrix& mat() const { return m_; }
  operator const Matrix&() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

// Loewner interval [lower, upper] of covariance matrices. lower must be
// positive definite and upper - lower positive semidefinite. Membership is
// checked up to a tolerance scaled by the magnitude of the upper bound.
class CovarianceConstraintSet {
 public:
  CovarianceConstraintSet(SpdMatrix lower, SpdMatrix upper);

  bool contains(const Matrix& X) const;

  const Matrix& lower() const { return lower_.mat(); }
  const Matrix& upper() const { return upper_.mat(); }
  Eigen::Index dim() const { return lower_.dim(); }
  double membership_tolerance() const { return tol_; }

 private:
  SpdMatrix lower_;
  SpdMatrix upper_;
  double tol_;
};

}  // namespace vbmhe
