#pragma once

#include <cstdint>
#include <vector>

#include "vbmhe/psd.hpp"

namespace vbmhe {

// Linear time-invariant Gaussian state-space model
//   x_t = A x_{t-1} + w_t,   y_t = C x_t + v_t.
// Construction runs a PBH detectability check on (A, C); an undetectable pair
// is advisory only (flagged and warned on stderr, never rejected).
class LinearGaussianModel {
 public:
  LinearGaussianModel(Matrix A, Matrix C);

  const Matrix& A() const { return A_; }
  const Matrix& C() const { return C_; }
  Eigen::Index state_dim() const { return A_.rows(); }
  Eigen::Index measurement_dim() const { return C_.rows(); }
  bool detectable() const { return detectable_; }

 private:
  Matrix A_;
  Matrix C_;
  bool detectable_;
};

// 2-D constant-velocity kinematics, state (px, py, vx, vy), positions measured
LinearGaussianModel constant_velocity_model(double sampling_interval);

// discretized white-acceleration covariance for the constant-velocity model,
// unit intensity: per-axis blocks [[dt^3/3, dt^2/2], [dt^2/2, dt]]
Matrix cv_process_noise(double sampling_interval);

struct Scenario {
  LinearGaussianModel model;
  Matrix true_Q;
  Matrix true_R;
  Vector x0_mean;
  Matrix x0_cov;
  int horizon = 0;
  std::uint64_t seed = 0;
};

// throws std::invalid_argument on dimension or validity problems
void validate(const Scenario& scenario);

struct Trajectory {
  std::vector<Vector> states;        // x_0 .. x_horizon
  std::vector<Vector> measurements;  // y_1 .. y_horizon
};

// Draws x_0, then per step the process noise followed by the measurement
// noise, each as a block of iid standard normals through the covariance
// factor. Fixed order, so one seed pins the whole trajectory.
Trajectory simulate(const Scenario& scenario);

}  // namespace vbmhe
