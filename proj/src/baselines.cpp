#include "vbmhe/baselines.hpp"

namespace vbmhe {

KalmanState kf_step(const KalmanState& state, const LinearGaussianModel& model,
                    const Matrix& Q, const Matrix& R, const Vector& y) {
  const Matrix& A = model.A();
  const Matrix& C = model.C();
  const Eigen::Index nx = model.state_dim();
  const Eigen::Index ny = model.measurement_dim();
  if (state.mean.size() != nx || state.cov.rows() != nx ||
      state.cov.cols() != nx) {
    throw std::invalid_argument("kf_step: state dimension mismatch");
  }
  if (Q.rows() != nx || Q.cols() != nx || R.rows() != ny || R.cols() != ny ||
      y.size() != ny) {
    throw std::invalid_argument("kf_step: noise/measurement dimension mismatch");
  }
  const Vector pred_mean = A * state.mean;
  const Matrix pred_cov = symmetrized(A * state.cov * A.transpose() + Q);
  const Matrix innov_cov = symmetrized(C * pred_cov * C.transpose() + R);
  Eigen::LLT<Matrix> llt(innov_cov);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("kf_step: innovation covariance is singular");
  }
  const Matrix gain = llt.solve(C * pred_cov).transpose();
  const Matrix ikc = Matrix::Identity(nx, nx) - gain * C;
  KalmanState next;
  next.mean = pred_mean + gain * (y - C * pred_mean);
  next.cov = symmetrized(ikc * pred_cov * ikc.transpose() +
                         gain * R * gain.transpose());
  return next;
}

std::vector<SmoothedMoments> rts_smoother(const LinearGaussianModel& model,
                                          const Matrix& Q, const Matrix& R,
                                          const KalmanState& prior,
                                          const std::vector<Vector>& ys) {
  const int T = static_cast<int>(ys.size());
  if (T < 1) throw std::invalid_argument("rts_smoother: no measurements");
  const Matrix& A = model.A();

  std::vector<Vector> fm(T + 1);  // filtered means
  std::vector<Matrix> fP(T + 1);
  std::vector<Vector> pm(T + 1);  // one-step predictions
  std::vector<Matrix> pP(T + 1);
  fm[0] = prior.mean;
  fP[0] = symmetrized(prior.cov);
  for (int k = 1; k <= T; ++k) {
    pm[k] = A * fm[k - 1];
    pP[k] = symmetrized(A * fP[k - 1] * A.transpose() + Q);
    const KalmanState next =
        kf_step({fm[k - 1], fP[k - 1]}, model, Q, R, ys[k - 1]);
    fm[k] = next.mean;
    fP[k] = next.cov;
  }

  std::vector<SmoothedMoments> out(T + 1);
  out[T].mean = fm[T];
  out[T].cov = fP[T];
  for (int k = T - 1; k >= 0; --k) {
    Eigen::LLT<Matrix> llt(pP[k + 1]);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("rts_smoother: predicted covariance singular");
    }
    // J_k = fP[k] A^T pP[k+1]^-1
    const Matrix gain = llt.solve(A * fP[k]).transpose();
    out[k].mean = fm[k] + gain * (out[k + 1].mean - pm[k + 1]);
    out[k].cov = symmetrized(
        fP[k] + gain * (out[k + 1].cov - pP[k + 1]) * gain.transpose());
    // lag-one: Cov(x_{k+1}, x_k | all data) = P_{k+1|T} J_k^T
    out[k + 1].cross_prev = out[k + 1].cov * gain.transpose();
  }
  out[0].cross_prev = Matrix();
  return out;
}

}  // namespace vbmhe
