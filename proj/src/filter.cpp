#include "vbmhe/filter.hpp"

namespace vbmhe {

void validate(const Hyperparams& h, const LinearGaussianModel& model) {
  if (h.window_length < 1) {
    throw std::invalid_argument("hyperparams: window_length must be >= 1");
  }
  if (h.vb_iterations < 1) {
    throw std::invalid_argument("hyperparams: vb_iterations must be >= 1");
  }
  if (h.importance_samples < 1) {
    throw std::invalid_argument(
        "hyperparams: importance_samples must be >= 1");
  }
  if (!(h.forgetting > 0.0) || !(h.forgetting < 1.0)) {
    throw std::invalid_argument(
        "hyperparams: forgetting factor must lie in (0, 1)");
  }
  const Eigen::Index nx = model.state_dim();
  const Eigen::Index ny = model.measurement_dim();
  if (h.Q_prior.dim() != nx || h.Q_set.dim() != nx) {
    throw std::invalid_argument("hyperparams: Q prior/set dimension mismatch");
  }
  if (h.R_prior.dim() != ny || h.R_set.dim() != ny) {
    throw std::invalid_argument("hyperparams: R prior/set dimension mismatch");
  }
}

double decayed_dof(double dof, double forgetting, Eigen::Index dim) {
  const double d = static_cast<double>(dim);
  return forgetting * (dof - d - 1.0) + d + 1.0;
}

Matrix process_noise_statistic(const LinearGaussianModel& model,
                               const WindowPosterior& post) {
  const Matrix& A = model.A();
  const Eigen::Index nx = model.state_dim();
  const int steps = static_cast<int>(post.cov_cross.size());
  Matrix acc = Matrix::Zero(nx, nx);
  for (int p = 0; p < steps; ++p) {
    const Vector r = post.means[p] - A * post.means[p + 1];
    acc += r * r.transpose() + post.cov_diag[p] +
           A * post.cov_diag[p + 1] * A.transpose() -
           post.cov_cross[p] * A.transpose() -
           A * post.cov_cross[p].transpose();
  }
  return symmetrized(acc);
}

Matrix measurement_noise_statistic(const LinearGaussianModel& model,
                                   const std::vector<Vector>& ys,
                                   const WindowPosterior& post) {
  const Matrix& C = model.C();
  const Eigen::Index ny = model.measurement_dim();
  const int steps = static_cast<int>(ys.size());
  Matrix acc = Matrix::Zero(ny, ny);
  // measurements are oldest first, posterior blocks newest first
  for (int p = 0; p < steps; ++p) {
    const Vector e = ys[steps - 1 - p] - C * post.means[p];
    acc += e * e.transpose() + C * post.cov_diag[p] * C.transpose();
  }
  return symmetrized(acc);
}

namespace {

// substream tags within one step
enum : std::uint64_t {
  kTagProcessPrecision = 0,
  kTagMeasurementPrecision = 1,
  kTagQEstimate = 2,
  kTagREstimate = 3,
};

struct InitValues {
  Matrix phi;
  Matrix psi;
  Matrix q_hat;
  Matrix r_hat;
  int fallbacks = 0;
};

// Time-zero integrals: proposal is the prior itself. Fallbacks use the
// analytic prior moments, which satisfy the constraints by precondition
// (prior mean in set; the inverse of an in-set matrix lies in the inverted
// interval).
InitValues init_from_priors(const Hyperparams& h, std::uint64_t seed) {
  const std::uint64_t s0 = derive_seed(seed, {0});
  InitValues v;
  try {
    RngStream rng(derive_seed(s0, {1, kTagProcessPrecision}));
    v.phi = constrained_mean_of_inverse(h.Q_prior, h.Q_set, h.Q_prior,
                                        h.importance_samples, rng)
                .value;
  } catch (const ZeroWeightMass&) {
    v.phi = spd_inverse(mean(h.Q_prior));
    ++v.fallbacks;
  }
  try {
    RngStream rng(derive_seed(s0, {1, kTagMeasurementPrecision}));
    v.psi = constrained_mean_of_inverse(h.R_prior, h.R_set, h.R_prior,
                                        h.importance_samples, rng)
                .value;
  } catch (const ZeroWeightMass&) {
    v.psi = spd_inverse(mean(h.R_prior));
    ++v.fallbacks;
  }
  try {
    RngStream rng(derive_seed(s0, {1, kTagQEstimate}));
    v.q_hat = constrained_mean(h.Q_prior, h.Q_set, h.Q_prior,
                               h.importance_samples, rng)
                  .value;
  } catch (const ZeroWeightMass&) {
    v.q_hat = mean(h.Q_prior);
    ++v.fallbacks;
  }
  try {
    RngStream rng(derive_seed(s0, {1, kTagREstimate}));
    v.r_hat = constrained_mean(h.R_prior, h.R_set, h.R_prior,
                               h.importance_samples, rng)
                  .value;
  } catch (const ZeroWeightMass&) {
    v.r_hat = mean(h.R_prior);
    ++v.fallbacks;
  }
  return v;
}

void require_prior_means_in_sets(const Hyperparams& h) {
  if (!h.Q_set.contains(mean(h.Q_prior))) {
    throw std::invalid_argument(
        "hyperparams: Q prior mean lies outside the constraint set");
  }
  if (!h.R_set.contains(mean(h.R_prior))) {
    throw std::invalid_argument(
        "hyperparams: R prior mean lies outside the constraint set");
  }
}

}  // namespace

VariationalResult variational_pass(const LinearGaussianModel& model,
                                   const Hyperparams& hyper,
                                   const WindowInputs& window,
                                   const InverseWishartParams& q_stats_prior,
                                   const InverseWishartParams& r_stats_prior,
                                   const Matrix& initial_process_precision,
                                   const Matrix& initial_measurement_precision,
                                   const Matrix& prev_Q_hat,
                                   const Matrix& prev_R_hat,
                                   std::uint64_t step_seed) {
  const int steps = static_cast<int>(window.measurements.size());
  VariationalResult out;
  out.m_dof = q_stats_prior.dof() + steps;
  out.s_dof = r_stats_prior.dof() + steps;
  out.process_precision = initial_process_precision;
  out.measurement_precision = initial_measurement_precision;
  const InverseWishartParams prop_q = centered_proposal(prev_Q_hat, out.m_dof);
  const InverseWishartParams prop_r = centered_proposal(prev_R_hat, out.s_dof);

  for (int k = 1; k <= hyper.vb_iterations; ++k) {
    out.posterior = solve_window(
        model, window, {out.process_precision, out.measurement_precision});
    out.M = symmetrized(q_stats_prior.scale() +
                        process_noise_statistic(model, out.posterior));
    out.S = symmetrized(r_stats_prior.scale() +
                        measurement_noise_statistic(
                            model, window.measurements, out.posterior));
    try {
      RngStream rng(derive_seed(step_seed,
                                {static_cast<std::uint64_t>(k),
                                 kTagProcessPrecision}));
      const ImportanceEstimate est = constrained_mean_of_inverse(
          InverseWishartParams(SpdMatrix(out.M), out.m_dof), hyper.Q_set,
          prop_q, hyper.importance_samples, rng);
      out.process_precision = est.value;
      out.ess_process = est.effective_sample_size;
    } catch (const ZeroWeightMass&) {
      ++out.fallbacks;  // keep the previous iterate
    }
    try {
      RngStream rng(derive_seed(step_seed,
                                {static_cast<std::uint64_t>(k),
                                 kTagMeasurementPrecision}));
      const ImportanceEstimate est = constrained_mean_of_inverse(
          InverseWishartParams(SpdMatrix(out.S), out.s_dof), hyper.R_set,
          prop_r, hyper.importance_samples, rng);
      out.measurement_precision = est.value;
      out.ess_measurement = est.effective_sample_size;
    } catch (const ZeroWeightMass&) {
      ++out.fallbacks;
    }
  }

  try {
    RngStream rng(derive_seed(step_seed, {0, kTagQEstimate}));
    const ImportanceEstimate est = constrained_mean(
        InverseWishartParams(SpdMatrix(out.M), out.m_dof), hyper.Q_set,
        prop_q, hyper.importance_samples, rng);
    out.Q_hat = est.value;
    out.ess_q = est.effective_sample_size;
  } catch (const ZeroWeightMass&) {
    out.Q_hat = prev_Q_hat;
    ++out.fallbacks;
  }
  try {
    RngStream rng(derive_seed(step_seed, {0, kTagREstimate}));
    const ImportanceEstimate est = constrained_mean(
        InverseWishartParams(SpdMatrix(out.S), out.s_dof), hyper.R_set,
        prop_r, hyper.importance_samples, rng);
    out.R_hat = est.value;
    out.ess_r = est.effective_sample_size;
  } catch (const ZeroWeightMass&) {
    out.R_hat = prev_R_hat;
    ++out.fallbacks;
  }
  return out;
}

FullInformationResult full_information_solve(
    const LinearGaussianModel& model, const Hyperparams& hyper,
    const std::vector<Vector>& measurements, const Vector& x0_mean,
    const Matrix& x0_cov, std::uint64_t seed) {
  validate(hyper, model);
  require_prior_means_in_sets(hyper);
  if (measurements.empty()) {
    throw std::invalid_argument(
        "full_information_solve: needs at least one measurement");
  }
  const InitValues init = init_from_priors(hyper, seed);
  const WindowInputs window{measurements, x0_mean, symmetrized(x0_cov)};
  VariationalResult res = variational_pass(
      model, hyper, window, hyper.Q_prior, hyper.R_prior, init.phi, init.psi,
      init.q_hat, init.r_hat,
      derive_seed(seed, {static_cast<std::uint64_t>(measurements.size())}));
  return {std::move(res.posterior), std::move(res.Q_hat),
          std::move(res.R_hat)};
}

VbMheFilter::VbMheFilter(LinearGaussianModel model, Hyperparams hyper,
                         Vector x0_mean, Matrix x0_cov, std::uint64_t seed)
    : model_(std::move(model)),
      hyper_(std::move(hyper)),
      seed_(seed),
      anchor_mean_(std::move(x0_mean)),
      anchor_cov_(symmetrized(x0_cov)),
      q_stats_prior_(hyper_.Q_prior),
      r_stats_prior_(hyper_.R_prior) {
  validate(hyper_, model_);
  if (anchor_mean_.size() != model_.state_dim() ||
      anchor_cov_.rows() != model_.state_dim() ||
      anchor_cov_.cols() != model_.state_dim()) {
    throw std::invalid_argument("filter: initial state dimension mismatch");
  }
  cholesky_lower(anchor_cov_);  // initial covariance must be PD
  require_prior_means_in_sets(hyper_);
  const InitValues init = init_from_priors(hyper_, seed_);
  phi_ = init.phi;
  psi_ = init.psi;
  q_hat_ = init.q_hat;
  r_hat_ = init.r_hat;
}

void VbMheFilter::time_update(const Vector& next_y) {
  // fold the oldest window state into the prior with the current estimates
  const KalmanState next = kf_step({anchor_mean_, anchor_cov_}, model_,
                                   q_hat_, r_hat_, window_.front());
  anchor_mean_ = next.mean;
  anchor_cov_ = next.cov;
  // decay the noise statistics, keeping their means fixed
  const double rho = hyper_.forgetting;
  q_stats_prior_ = InverseWishartParams(
      SpdMatrix(rho * last_M_),
      decayed_dof(last_m_, rho, model_.state_dim()));
  r_stats_prior_ = InverseWishartParams(
      SpdMatrix(rho * last_S_),
      decayed_dof(last_s_, rho, model_.measurement_dim()));
  window_.pop_front();
  window_.push_back(next_y);
}

FilterOutput VbMheFilter::step(const Vector& y) {
  if (y.size() != model_.measurement_dim()) {
    throw std::invalid_argument("step: measurement dimension mismatch");
  }
  if (steady_) {
    time_update(y);
  } else {
    window_.push_back(y);
    if (static_cast<int>(window_.size()) == hyper_.window_length) {
      steady_ = true;
    }
  }
  ++t_;
  const WindowInputs inputs{{window_.begin(), window_.end()},
                            anchor_mean_,
                            anchor_cov_};
  const std::uint64_t step_seed =
      derive_seed(seed_, {static_cast<std::uint64_t>(t_)});
  VariationalResult res = variational_pass(
      model_, hyper_, inputs, q_stats_prior_, r_stats_prior_, phi_, psi_,
      q_hat_, r_hat_, step_seed);

  FilterOutput out;
  out.state_estimate = res.posterior.means[0];
  out.state_cov = res.posterior.cov_diag[0];
  out.Q_hat = res.Q_hat;
  out.R_hat = res.R_hat;
  out.diagnostics.ess_process = res.ess_process;
  out.diagnostics.ess_measurement = res.ess_measurement;
  out.diagnostics.ess_q = res.ess_q;
  out.diagnostics.ess_r = res.ess_r;
  out.diagnostics.fallbacks = res.fallbacks;
  out.diagnostics.warmup = !steady_;

  if (steady_) {
    // commit: warm-up solves are output-only and leave the carried state at
    // its time-zero values, so the first full window reproduces the one-shot
    // full-information solve exactly
    phi_ = res.process_precision;
    psi_ = res.measurement_precision;
    q_hat_ = res.Q_hat;
    r_hat_ = res.R_hat;
    last_M_ = res.M;
    last_S_ = res.S;
    last_m_ = res.m_dof;
    last_s_ = res.s_dof;
  }
  last_posterior_ = std::move(res.posterior);
  return out;
}

}  // namespace vbmhe
