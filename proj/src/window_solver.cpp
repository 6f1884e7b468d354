#include "vbmhe/window_solver.hpp"

namespace vbmhe {

namespace {

void check_inputs(const LinearGaussianModel& model, const WindowInputs& window,
                  const PrecisionPair& precisions) {
  const Eigen::Index nx = model.state_dim();
  const Eigen::Index ny = model.measurement_dim();
  if (window.measurements.empty()) {
    throw std::invalid_argument("window: needs at least one measurement");
  }
  for (const Vector& y : window.measurements) {
    if (y.size() != ny) {
      throw std::invalid_argument("window: measurement dimension mismatch");
    }
  }
  if (window.prior_mean.size() != nx || window.prior_cov.rows() != nx ||
      window.prior_cov.cols() != nx) {
    throw std::invalid_argument("window: prior dimension mismatch");
  }
  if (precisions.process.rows() != nx || precisions.process.cols() != nx ||
      precisions.measurement.rows() != ny ||
      precisions.measurement.cols() != ny) {
    throw std::invalid_argument("window: precision dimension mismatch");
  }
  if (!is_symmetric(precisions.process) ||
      !is_symmetric(precisions.measurement)) {
    throw std::invalid_argument("window: precisions must be symmetric");
  }
}

}  // namespace

Matrix to_dense(const BlockTridiagonal& B) {
  const Eigen::Index m = static_cast<Eigen::Index>(B.diag.size());
  if (m == 0) return Matrix();
  const Eigen::Index n = B.diag[0].rows();
  Matrix D = Matrix::Zero(m * n, m * n);
  for (Eigen::Index j = 0; j < m; ++j) {
    D.block(j * n, j * n, n, n) = B.diag[j];
    if (j + 1 < m) {
      D.block(j * n, (j + 1) * n, n, n) = B.super[j];
      D.block((j + 1) * n, j * n, n, n) = B.super[j].transpose();
    }
  }
  return D;
}

BlockTridiagonal window_information_matrix(const LinearGaussianModel& model,
                                           const WindowInputs& window,
                                           const PrecisionPair& precisions) {
  check_inputs(model, window, precisions);
  const Matrix& A = model.A();
  const Matrix& C = model.C();
  const Matrix& phi = precisions.process;
  const Matrix& psi = precisions.measurement;
  const int T = static_cast<int>(window.measurements.size());

  const Matrix meas_info = symmetrized(C.transpose() * psi * C);
  const Matrix trans_info = symmetrized(A.transpose() * phi * A);
  const Matrix prior_info = spd_inverse(window.prior_cov);

  BlockTridiagonal B;
  B.diag.resize(T + 1);
  B.super.resize(T);
  // newest first: block 0 is x_t (measured, no successor), block T is the
  // prior-anchored state (unmeasured)
  B.diag[0] = symmetrized(meas_info + phi);
  for (int j = 1; j < T; ++j) {
    B.diag[j] = symmetrized(meas_info + phi + trans_info);
  }
  B.diag[T] = symmetrized(trans_info + prior_info);
  for (int j = 0; j < T; ++j) B.super[j] = -(phi * A);
  return B;
}

Vector window_information_vector(const LinearGaussianModel& model,
                                 const WindowInputs& window,
                                 const Matrix& measurement_precision) {
  check_inputs(model, window,
               PrecisionPair{Matrix::Identity(model.state_dim(),
                                              model.state_dim()),
                             measurement_precision});
  const Matrix& C = model.C();
  const int T = static_cast<int>(window.measurements.size());
  const Eigen::Index n = model.state_dim();
  Vector rhs((T + 1) * n);
  // measurements enter newest first; the last block carries the prior
  for (int j = 0; j < T; ++j) {
    rhs.segment(j * n, n) =
        C.transpose() * measurement_precision * window.measurements[T - 1 - j];
  }
  Eigen::LLT<Matrix> llt(symmetrized(window.prior_cov));
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("window: prior covariance is not PD");
  }
  rhs.segment(T * n, n) = llt.solve(window.prior_mean);
  return rhs;
}

WindowPosterior solve_window(const LinearGaussianModel& model,
                             const WindowInputs& window,
                             const PrecisionPair& precisions) {
  const BlockTridiagonal B =
      window_information_matrix(model, window, precisions);
  const Vector rhs =
      window_information_vector(model, window, precisions.measurement);
  const int T = static_cast<int>(window.measurements.size());
  const Eigen::Index n = model.state_dim();

  // forward block elimination: Sigma_0 = D_0,
  // Sigma_{j+1} = D_{j+1} - super[j]^T Sigma_j^-1 super[j]
  std::vector<Eigen::LLT<Matrix>> llts;
  llts.reserve(T + 1);
  std::vector<Vector> z(T + 1);
  {
    Matrix sigma = B.diag[0];
    z[0] = rhs.segment(0, n);
    for (int j = 0;; ++j) {
      llts.emplace_back(sigma);
      if (llts.back().info() != Eigen::Success) {
        throw NotPositiveDefinite(
            "solve_window: information matrix is not positive definite");
      }
      if (j == T) break;
      const Matrix piv = llts.back().solve(B.super[j]);  // Sigma_j^-1 super[j]
      sigma = symmetrized(B.diag[j + 1] - B.super[j].transpose() * piv);
      z[j + 1] = rhs.segment((j + 1) * n, n) -
                 B.super[j].transpose() * llts[j].solve(z[j]);
    }
  }

  WindowPosterior post;
  post.means.resize(T + 1);
  post.cov_diag.resize(T + 1);
  post.cov_cross.resize(T);

  // back substitution for the means
  post.means[T] = llts[T].solve(z[T]);
  for (int j = T - 1; j >= 0; --j) {
    post.means[j] = llts[j].solve(z[j] - B.super[j] * post.means[j + 1]);
  }

  // Takahashi recursion for the selected inverse blocks:
  // G_{T,T} = Sigma_T^-1; W_j = Sigma_j^-1 super[j];
  // G_{j,j+1} = -W_j G_{j+1,j+1}; G_{j,j} = Sigma_j^-1 + W_j G_{j+1,j+1} W_j^T
  post.cov_diag[T] = symmetrized(llts[T].solve(Matrix::Identity(n, n)));
  for (int j = T - 1; j >= 0; --j) {
    const Matrix w = llts[j].solve(B.super[j]);
    post.cov_cross[j] = -w * post.cov_diag[j + 1];
    post.cov_diag[j] =
        symmetrized(llts[j].solve(Matrix::Identity(n, n)) +
                    w * post.cov_diag[j + 1] * w.transpose());
  }
  return post;
}

}  // namespace vbmhe
