#pragma once

#include <vector>

#include "vbmhe/inverse_wishart.hpp"

namespace vbmhe {

// every importance weight vanished (no sample with positive weight)
struct ZeroWeightMass : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ImportanceEstimate {
  Matrix value;
  double effective_sample_size = 0.0;  // (sum w)^2 / sum w^2, in-set samples
  double accepted_fraction = 0.0;      // in-set samples / total samples
};

// Self-normalized weighted mean of the given matrices; invariant under adding
// a constant to every log weight. Throws ZeroWeightMass when the normalized
// weights underflow to zero or the result is not finite.
Matrix self_normalized_mean(const std::vector<Matrix>& values,
                            const std::vector<double>& log_weights);

// Importance-sampling estimate of E[X] (respectively E[X^-1]) under the
// target restricted to the constraint set, drawing num_samples from the
// proposal. Out-of-set samples receive weight zero; if none land inside,
// ZeroWeightMass is thrown and the caller decides the fallback.
ImportanceEstimate constrained_mean(const InverseWishartParams& target,
                                    const CovarianceConstraintSet& set,
                                    const InverseWishartParams& proposal,
                                    int num_samples, RngStream& rng);

ImportanceEstimate constrained_mean_of_inverse(
    const InverseWishartParams& target, const CovarianceConstraintSet& set,
    const InverseWishartParams& proposal, int num_samples, RngStream& rng);

// Inverse-Wishart proposal whose analytic mean equals previous_estimate:
// scale = (dof - d - 1) * previous_estimate. Requires dof > d + 1.
InverseWishartParams centered_proposal(const Matrix& previous_estimate,
                                       double dof);

}  // namespace vbmhe
