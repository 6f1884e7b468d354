#include "vbmhe/importance.hpp"

#include <algorithm>
#include <cmath>

namespace vbmhe {

Matrix self_normalized_mean(const std::vector<Matrix>& values,
                            const std::vector<double>& log_weights) {
  if (values.empty() || values.size() != log_weights.size()) {
    throw std::invalid_argument(
        "self_normalized_mean: need matching, nonempty values and weights");
  }
  const double lw_max =
      *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(lw_max)) {
    throw ZeroWeightMass("self_normalized_mean: no finite weight");
  }
  Matrix acc = Matrix::Zero(values[0].rows(), values[0].cols());
  double w_sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = std::exp(log_weights[i] - lw_max);
    acc += w * values[i];
    w_sum += w;
  }
  if (!(w_sum > 0.0) || !acc.allFinite()) {
    throw ZeroWeightMass("self_normalized_mean: weights sum to zero");
  }
  return acc / w_sum;
}

namespace {

template <typename Transform>
ImportanceEstimate estimate(const InverseWishartParams& target,
                            const CovarianceConstraintSet& set,
                            const InverseWishartParams& proposal,
                            int num_samples, RngStream& rng, Transform&& f) {
  if (num_samples < 1) {
    throw std::invalid_argument("importance estimate: num_samples must be >= 1");
  }
  if (target.dim() != set.dim() || proposal.dim() != set.dim()) {
    throw std::invalid_argument("importance estimate: dimension mismatch");
  }
  std::vector<Matrix> values;
  std::vector<double> log_w;
  values.reserve(num_samples);
  log_w.reserve(num_samples);
  for (int j = 0; j < num_samples; ++j) {
    const Matrix x = sample(proposal, rng);
    if (!set.contains(x)) continue;  // weight zero outside the set
    values.push_back(f(x));
    log_w.push_back(log_density(target, x) - log_density(proposal, x));
  }
  if (values.empty()) {
    throw ZeroWeightMass(
        "importance estimate: no sample fell inside the constraint set");
  }
  ImportanceEstimate est;
  est.value = self_normalized_mean(values, log_w);
  const double lw_max = *std::max_element(log_w.begin(), log_w.end());
  double w_sum = 0.0;
  double w2_sum = 0.0;
  for (double lw : log_w) {
    const double w = std::exp(lw - lw_max);
    w_sum += w;
    w2_sum += w * w;
  }
  est.effective_sample_size = w_sum * w_sum / w2_sum;
  est.accepted_fraction =
      static_cast<double>(values.size()) / static_cast<double>(num_samples);
  return est;
}

}  // namespace

ImportanceEstimate constrained_mean(const InverseWishartParams& target,
                                    const CovarianceConstraintSet& set,
                                    const InverseWishartParams& proposal,
                                    int num_samples, RngStream& rng) {
  return estimate(target, set, proposal, num_samples, rng,
                  [](const Matrix& x) { return x; });
}

ImportanceEstimate constrained_mean_of_inverse(
    const InverseWishartParams& target, const CovarianceConstraintSet& set,
    const InverseWishartParams& proposal, int num_samples, RngStream& rng) {
  return estimate(target, set, proposal, num_samples, rng,
                  [](const Matrix& x) { return spd_inverse(x); });
}

InverseWishartParams centered_proposal(const Matrix& previous_estimate,
                                       double dof) {
  const double d = static_cast<double>(previous_estimate.rows());
  if (!(dof > d + 1.0)) {
    throw std::invalid_argument("centered_proposal: dof must exceed dim + 1");
  }
  return InverseWishartParams(SpdMatrix((dof - d - 1.0) * previous_estimate),
                              dof);
}

}  // namespace vbmhe
