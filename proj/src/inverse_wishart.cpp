#include "vbmhe/inverse_wishart.hpp"

#include <cmath>
#include <numbers>

namespace vbmhe {

namespace {

// log det of an SPD matrix from its Cholesky factor
double spd_log_det(const Matrix& X) {
  const Matrix L = cholesky_lower(X);
  double s = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

}  // namespace

double log_multivariate_gamma(int d, double a) {
  double s = 0.25 * d * (d - 1) * std::log(std::numbers::pi);
  for (int j = 0; j < d; ++j) s += std::lgamma(a - 0.5 * j);
  return s;
}

InverseWishartParams::InverseWishartParams(SpdMatrix scale, double dof)
    : scale_(std::move(scale)), dof_(dof) {
  const double d = static_cast<double>(scale_.dim());
  if (!(dof_ > d + 1.0)) {
    throw std::invalid_argument(
        "inverse Wishart: dof must exceed dimension + 1");
  }
  const double log_det_scale = spd_log_det(scale_.mat());  // also checks PD
  const int id = static_cast<int>(scale_.dim());
  log_norm_ = 0.5 * dof_ * log_det_scale -
              0.5 * dof_ * d * std::log(2.0) -
              log_multivariate_gamma(id, 0.5 * dof_);
}

double log_density(const InverseWishartParams& params, const Matrix& X) {
  if (X.rows() != params.dim() || X.cols() != params.dim()) {
    throw std::invalid_argument("log_density: dimension mismatch");
  }
  const Matrix S = symmetrized(X);
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("log_density: X is not positive definite");
  }
  double log_det_x = 0.0;
  const Matrix L = llt.matrixL();
  for (Eigen::Index i = 0; i < L.rows(); ++i) log_det_x += std::log(L(i, i));
  log_det_x *= 2.0;
  const Matrix x_inv = llt.solve(Matrix::Identity(S.rows(), S.cols()));
  const double trace_term = params.scale().cwiseProduct(x_inv).sum();
  const double d = static_cast<double>(params.dim());
  return params.log_normalizer() -
         0.5 * (params.dof() + d + 1.0) * log_det_x - 0.5 * trace_term;
}

Matrix sample(const InverseWishartParams& params, RngStream& rng) {
  const int d = static_cast<int>(params.dim());
  Matrix L;
  try {
    L = cholesky_lower(spd_inverse(params.scale()));
  } catch (const NotPositiveDefinite&) {
    // near-singular scale: retry with a trace-scaled jitter
    const double jitter = 1e-12 * params.scale().trace() / d;
    L = cholesky_lower(
        spd_inverse(params.scale() + jitter * Matrix::Identity(d, d)));
  }
  Matrix bart = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    bart(i, i) = std::sqrt(rng.chi_square(params.dof() - i));
    for (int j = 0; j < i; ++j) bart(i, j) = rng.normal();
  }
  // W = (L bart)(L bart)^T ~ Wishart(scale^-1, dof); return W^-1
  const Matrix root = L * bart;
  const Matrix root_inv = root.triangularView<Eigen::Lower>().solve(
      Matrix::Identity(d, d));
  return symmetrized(root_inv.transpose() * root_inv);
}

Matrix mean(const InverseWishartParams& params) {
  const double d = static_cast<double>(params.dim());
  return params.scale() / (params.dof() - d - 1.0);
}

Matrix mean_of_inverse(const InverseWishartParams& params) {
  return symmetrized(params.dof() * spd_inverse(params.scale()));
}

}  // namespace vbmhe
