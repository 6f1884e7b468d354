#pragma once

// shared fixtures for the tracking benchmark scenario and small utilities

#include <vbmhe/experiment.hpp>

namespace th {

using vbmhe::Matrix;
using vbmhe::Vector;

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double rel_err(const Matrix& got, const Matrix& want) {
  return max_abs(got - want) / (1.0 + max_abs(want));
}

inline double rel_err(const Vector& got, const Vector& want) {
  return (got - want).cwiseAbs().maxCoeff() /
         (1.0 + want.cwiseAbs().maxCoeff());
}

inline Matrix tracking_Q0() { return vbmhe::cv_process_noise(1.0); }

inline Matrix tracking_R0() {
  Matrix R(2, 2);
  R << 100.0, 50.0, 50.0, 100.0;
  return R;
}

inline vbmhe::LinearGaussianModel tracking_model() {
  return vbmhe::constant_velocity_model(1.0);
}

inline vbmhe::Scenario tracking_scenario(std::uint64_t seed, int horizon,
                                         double q_scale = 50.0,
                                         double r_scale = 3.0) {
  vbmhe::Scenario s{tracking_model(),
                    q_scale * tracking_Q0(),
                    r_scale * tracking_R0(),
                    Vector(4),
                    100.0 * Matrix::Identity(4, 4),
                    horizon,
                    seed};
  s.x0_mean << 0.0, 10.0, 0.0, 10.0;
  return s;
}

// benchmark hyperparameters: forgetting 0.9, priors centered on the nominal
// covariances (scale 3, dof = 3 + dim + 1), bounds [0.001, 1000] Q0 and
// [0.1, 10] R0
inline vbmhe::Hyperparams tracking_hyper(int T, int N, int J) {
  using vbmhe::CovarianceConstraintSet;
  using vbmhe::InverseWishartParams;
  using vbmhe::SpdMatrix;
  const Matrix Q0 = tracking_Q0();
  const Matrix R0 = tracking_R0();
  return vbmhe::Hyperparams{
      T,
      N,
      J,
      0.9,
      InverseWishartParams(SpdMatrix(3.0 * Q0), 8.0),
      InverseWishartParams(SpdMatrix(3.0 * R0), 6.0),
      CovarianceConstraintSet(SpdMatrix(0.001 * Q0), SpdMatrix(1000.0 * Q0)),
      CovarianceConstraintSet(SpdMatrix(0.1 * R0), SpdMatrix(10.0 * R0))};
}

// random SPD matrix with unit-ish scale
inline Matrix random_spd(int n, vbmhe::RngStream& rng, double ridge = 0.3) {
  Matrix G(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
  }
  return Matrix(G * G.transpose() / n + ridge * Matrix::Identity(n, n));
}

inline Vector random_vector(int n, vbmhe::RngStream& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

inline Matrix random_matrix(int rows, int cols, vbmhe::RngStream& rng,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

}  // namespace th
