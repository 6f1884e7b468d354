#pragma once

#include <vector>

#include "vbmhe/model.hpp"

namespace vbmhe {

struct KalmanState {
  Vector mean;
  Matrix cov;
};

// one predict + measurement update with the given fixed (Q, R); Joseph-form
// covariance update
KalmanState kf_step(const KalmanState& state, const LinearGaussianModel& model,
                    const Matrix& Q, const Matrix& R, const Vector& y);

struct SmoothedMoments {
  Vector mean;
  Matrix cov;
  // Cov(x_k, x_{k-1} | all data); empty at k = 0
  Matrix cross_prev;
};

// Fixed-interval RTS smoother over times 0..T with a Gaussian prior at time 0
// (no measurement there) and measurements y_1..y_T. Returned oldest first.
std::vector<SmoothedMoments> rts_smoother(const LinearGaussianModel& model,
                                          const Matrix& Q, const Matrix& R,
                                          const KalmanState& prior,
                                          const std::vector<Vector>& ys);

}  // namespace vbmhe
