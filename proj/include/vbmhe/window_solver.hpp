#pragma once

#include <vector>

#include "vbmhe/model.hpp"

namespace vbmhe {

// expected noise precisions driving one window solve
struct PrecisionPair {
  Matrix process;      // E[Q^-1]
  Matrix measurement;  // E[R^-1]
};

// One estimation window: measurements oldest first (y_{t-T+1} .. y_t) plus a
// Gaussian prior on the state one step BEFORE the oldest measurement. The
// window therefore covers T+1 states and the oldest one is unmeasured.
struct WindowInputs {
  std::vector<Vector> measurements;
  Vector prior_mean;
  Matrix prior_cov;
};

// Symmetric block-tridiagonal matrix. Blocks are ordered NEWEST STATE FIRST:
// diag[0] belongs to x_t, diag[T] to the prior-anchored oldest state.
// super[j] is block (j, j+1); the subdiagonal blocks are its transposes.
struct BlockTridiagonal {
  std::vector<Matrix> diag;
  std::vector<Matrix> super;
};

Matrix to_dense(const BlockTridiagonal& B);

// joint Gaussian over the window's states, newest first
struct WindowPosterior {
  std::vector<Vector> means;
  std::vector<Matrix> cov_diag;
  // cov_cross[j] = Cov(x at position j, x at position j+1), i.e. covariance of
  // a state with its predecessor in time
  std::vector<Matrix> cov_cross;
};

// normal equations of the window MAP problem under the given precisions
BlockTridiagonal window_information_matrix(const LinearGaussianModel& model,
                                           const WindowInputs& window,
                                           const PrecisionPair& precisions);

Vector window_information_vector(const LinearGaussianModel& model,
                                 const WindowInputs& window,
                                 const Matrix& measurement_precision);

// Means via a block LDL^T (Thomas) sweep; diagonal and first off-diagonal
// covariance blocks via the Takahashi selected-inversion recursion. O(T n^3).
WindowPosterior solve_window(const LinearGaussianModel& model,
                             const WindowInputs& window,
                             const PrecisionPair& precisions);

}  // namespace vbmhe
