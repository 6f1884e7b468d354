#include "vbmhe/model.hpp"

#include <Eigen/Eigenvalues>
#include <cstdio>

#include "vbmhe/rng.hpp"

namespace vbmhe {

namespace {

// PBH test: every eigenvalue of A on or outside the unit circle must keep
// [A - lambda I; C] at full column rank
bool pbh_detectable(const Matrix& A, const Matrix& C) {
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<Matrix> es(A);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lambda = es.eigenvalues()(k);
    if (std::abs(lambda) < 1.0 - 1e-9) continue;
    Eigen::MatrixXcd M(n + C.rows(), n);
    M.topRows(n) = A.cast<std::complex<double>>();
    M.topRows(n).diagonal().array() -= lambda;
    M.bottomRows(C.rows()) = C.cast<std::complex<double>>();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(M);
    if (qr.rank() < n) return false;
  }
  return true;
}

}  // namespace

LinearGaussianModel::LinearGaussianModel(Matrix A, Matrix C)
    : A_(std::move(A)), C_(std::move(C)) {
  if (A_.rows() != A_.cols() || A_.rows() < 1) {
    throw std::invalid_argument("model: A must be square and nonempty");
  }
  if (C_.cols() != A_.rows() || C_.rows() < 1) {
    throw std::invalid_argument("model: C must have state_dim columns");
  }
  detectable_ = pbh_detectable(A_, C_);
  if (!detectable_) {
    std::fprintf(stderr,
                 "warning: (A, C) is not detectable; estimates may diverge\n");
  }
}

LinearGaussianModel constant_velocity_model(double sampling_interval) {
  if (!(sampling_interval > 0.0)) {
    throw std::invalid_argument("constant_velocity_model: interval must be > 0");
  }
  Matrix A = Matrix::Identity(4, 4);
  A(0, 2) = sampling_interval;
  A(1, 3) = sampling_interval;
  Matrix C = Matrix::Zero(2, 4);
  C(0, 0) = 1.0;
  C(1, 1) = 1.0;
  return LinearGaussianModel(std::move(A), std::move(C));
}

Matrix cv_process_noise(double sampling_interval) {
  if (!(sampling_interval > 0.0)) {
    throw std::invalid_argument("cv_process_noise: interval must be > 0");
  }
  const double dt = sampling_interval;
  Matrix Q = Matrix::Zero(4, 4);
  Q(0, 0) = Q(1, 1) = dt * dt * dt / 3.0;
  Q(2, 2) = Q(3, 3) = dt;
  Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = dt * dt / 2.0;
  return Q;
}

void validate(const Scenario& s) {
  const Eigen::Index nx = s.model.state_dim();
  const Eigen::Index ny = s.model.measurement_dim();
  if (s.true_Q.rows() != nx || s.true_Q.cols() != nx) {
    throw std::invalid_argument("scenario: true_Q must be state_dim square");
  }
  if (s.true_R.rows() != ny || s.true_R.cols() != ny) {
    throw std::invalid_argument(
        "scenario: true_R must be measurement_dim square");
  }
  if (s.x0_mean.size() != nx) {
    throw std::invalid_argument("scenario: x0_mean has wrong dimension");
  }
  if (s.x0_cov.rows() != nx || s.x0_cov.cols() != nx) {
    throw std::invalid_argument("scenario: x0_cov must be state_dim square");
  }
  if (!is_symmetric(s.true_Q) || !is_symmetric(s.true_R) ||
      !is_symmetric(s.x0_cov)) {
    throw std::invalid_argument("scenario: covariances must be symmetric");
  }
  if (s.horizon < 1) {
    throw std::invalid_argument("scenario: horizon must be >= 1");
  }
  // positive semidefinite is enough for simulation
  covariance_factor(s.true_Q);
  covariance_factor(s.true_R);
  covariance_factor(s.x0_cov);
}

Trajectory simulate(const Scenario& s) {
  validate(s);
  const Eigen::Index nx = s.model.state_dim();
  const Eigen::Index ny = s.model.measurement_dim();
  const Matrix F0 = covariance_factor(s.x0_cov);
  const Matrix FQ = covariance_factor(s.true_Q);
  const Matrix FR = covariance_factor(s.true_R);
  RngStream rng(s.seed);
  auto draw = [&rng](Eigen::Index n) {
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    return z;
  };
  Trajectory traj;
  traj.states.reserve(s.horizon + 1);
  traj.measurements.reserve(s.horizon);
  traj.states.push_back(s.x0_mean + F0 * draw(nx));
  for (int t = 1; t <= s.horizon; ++t) {
    traj.states.push_back(s.model.A() * traj.states.back() + FQ * draw(nx));
    traj.measurements.push_back(s.model.C() * traj.states.back() +
                                FR * draw(ny));
  }
  return traj;
}

}  // namespace vbmhe
