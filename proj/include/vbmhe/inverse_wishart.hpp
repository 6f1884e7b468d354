#pragma once

#include "vbmhe/psd.hpp"
#include "vbmhe/rng.hpp"

namespace vbmhe {

// Inverse-Wishart distribution over d x d SPD matrices with density
//   p(X) proportional to |X|^-(dof+d+1)/2 * exp(-tr(scale X^-1)/2),
// the convention under which mean = scale/(dof-d-1) and E[X^-1] = dof*scale^-1.
// For d = 1 this is InvGamma(dof/2, scale/2). Requires dof > d + 1 so the mean
// exists.
class InverseWishartParams {
 public:
  InverseWishartParams(SpdMatrix scale, double dof);

  const Matrix& scale() const { return scale_.mat(); }
  double dof() const { return dof_; }
  Eigen::Index dim() const { return scale_.dim(); }

  // log of the density's normalizing constant (cached at construction)
  double log_normalizer() const { return log_norm_; }

 private:
  SpdMatrix scale_;
  double dof_;
  double log_norm_;
};

// log Gamma_d(a), the multivariate gamma function
double log_multivariate_gamma(int d, double a);

// normalized log density at X; X is symmetrized, must be positive definite
double log_density(const InverseWishartParams& params, const Matrix& X);

// One draw via the Bartlett decomposition of the Wishart(scale^-1, dof)
// precision: dof - i degrees of freedom in the i-th diagonal chi-square
// (0-indexed), diagonal entries drawn before the subdiagonal within each row.
Matrix sample(const InverseWishartParams& params, RngStream& rng);

Matrix mean(const InverseWishartParams& params);
Matrix mean_of_inverse(const InverseWishartParams& params);

}  // namespace vbmhe
