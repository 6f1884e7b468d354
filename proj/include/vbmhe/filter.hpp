#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "vbmhe/baselines.hpp"
#include "vbmhe/importance.hpp"
#include "vbmhe/window_solver.hpp"

namespace vbmhe {

struct Hyperparams {
  int window_length;       // T >= 1
  int vb_iterations;       // fixed-point sweeps per step, >= 1
  int importance_samples;  // draws per Monte-Carlo integral, >= 1
  double forgetting;       // in (0, 1)
  InverseWishartParams Q_prior;
  InverseWishartParams R_prior;
  CovarianceConstraintSet Q_set;
  CovarianceConstraintSet R_set;
};

// throws std::invalid_argument on range or dimension problems
void validate(const Hyperparams& hyper, const LinearGaussianModel& model);

// forgetting-factor decay that keeps an inverse-Wishart mean fixed:
// dof -> forgetting * (dof - dim - 1) + dim + 1
double decayed_dof(double dof, double forgetting, Eigen::Index dim);

// sum over window transitions of E[(x_i - A x_{i-1})(x_i - A x_{i-1})^T]
// under the window posterior
Matrix process_noise_statistic(const LinearGaussianModel& model,
                               const WindowPosterior& posterior);

// sum over window steps of E[(y_i - C x_i)(y_i - C x_i)^T]
Matrix measurement_noise_statistic(const LinearGaussianModel& model,
                                   const std::vector<Vector>& measurements,
                                   const WindowPosterior& posterior);

struct StepDiagnostics {
  double ess_process = 0.0;      // last E[Q^-1] integral
  double ess_measurement = 0.0;  // last E[R^-1] integral
  double ess_q = 0.0;            // Q estimate integral
  double ess_r = 0.0;            // R estimate integral
  int fallbacks = 0;             // integrals with zero in-set weight this step
  bool warmup = false;           // window not yet full
};

struct FilterOutput {
  Vector state_estimate;  // newest window state
  Matrix state_cov;
  Matrix Q_hat;
  Matrix R_hat;
  StepDiagnostics diagnostics;
};

// everything one variational pass over a window produces
struct VariationalResult {
  WindowPosterior posterior;
  Matrix M;      // process-noise statistic scale (prior + window sum)
  Matrix S;      // measurement-noise statistic scale
  double m_dof = 0.0;
  double s_dof = 0.0;
  Matrix process_precision;      // final E[Q^-1]
  Matrix measurement_precision;  // final E[R^-1]
  Matrix Q_hat;
  Matrix R_hat;
  double ess_process = 0.0;
  double ess_measurement = 0.0;
  double ess_q = 0.0;
  double ess_r = 0.0;
  int fallbacks = 0;
};

// N coordinate-ascent sweeps over one window: solve the Gaussian block, absorb
// it into the noise statistics, refresh the precisions by constrained
// Monte-Carlo integration, then form the covariance estimates. Proposals stay
// centered on the previous step's estimates for the whole pass. Each integral
// draws from its own substream of step_seed, so results are independent of
// call history. A ZeroWeightMass from an integral keeps the previous iterate
// (precisions) or the previous estimate (Q_hat/R_hat) and is counted.
VariationalResult variational_pass(const LinearGaussianModel& model,
                                   const Hyperparams& hyper,
                                   const WindowInputs& window,
                                   const InverseWishartParams& q_stats_prior,
                                   const InverseWishartParams& r_stats_prior,
                                   const Matrix& initial_process_precision,
                                   const Matrix& initial_measurement_precision,
                                   const Matrix& prev_Q_hat,
                                   const Matrix& prev_R_hat,
                                   std::uint64_t step_seed);

struct FullInformationResult {
  WindowPosterior posterior;
  Matrix Q_hat;
  Matrix R_hat;
};

// One-shot variational solve over ALL measurements with the time-zero priors.
// window_length in hyper is ignored here. Consumes the same random substreams
// as a filter constructed with the same seed would while reaching time
// measurements.size(), so the two coincide when T equals that length.
FullInformationResult full_information_solve(
    const LinearGaussianModel& model, const Hyperparams& hyper,
    const std::vector<Vector>& measurements, const Vector& x0_mean,
    const Matrix& x0_cov, std::uint64_t seed);

// Adaptive moving-horizon filter with unknown noise covariances confined to
// Loewner intervals. Until the window first fills, each step runs the
// full-information solve on the growing window without touching the carried
// precisions or statistics; from then on the oldest state is folded into the
// prior by a Kalman step and the statistics decay by the forgetting factor.
class VbMheFilter {
 public:
  VbMheFilter(LinearGaussianModel model, Hyperparams hyper, Vector x0_mean,
              Matrix x0_cov, std::uint64_t seed);

  FilterOutput step(const Vector& y);

  int time() const { return t_; }
  bool steady() const { return steady_; }
  const Vector& prior_mean() const { return anchor_mean_; }
  const Matrix& prior_cov() const { return anchor_cov_; }
  const Matrix& q_hat() const { return q_hat_; }
  const Matrix& r_hat() const { return r_hat_; }
  const Matrix& process_precision() const { return phi_; }
  const Matrix& measurement_precision() const { return psi_; }
  const WindowPosterior& last_posterior() const { return last_posterior_; }
  // decayed statistics entering the next window solve
  const InverseWishartParams& q_statistics_prior() const {
    return q_stats_prior_;
  }
  const InverseWishartParams& r_statistics_prior() const {
    return r_stats_prior_;
  }
  // statistics produced by the last steady-state solve
  const Matrix& last_M() const { return last_M_; }
  const Matrix& last_S() const { return last_S_; }
  double last_m_dof() const { return last_m_; }
  double last_s_dof() const { return last_s_; }
  std::vector<Vector> window() const {
    return {window_.begin(), window_.end()};
  }

 private:
  void time_update(const Vector& next_y);

  LinearGaussianModel model_;
  Hyperparams hyper_;
  std::uint64_t seed_;
  int t_ = 0;
  bool steady_ = false;
  std::deque<Vector> window_;
  Vector anchor_mean_;
  Matrix anchor_cov_;
  InverseWishartParams q_stats_prior_;
  InverseWishartParams r_stats_prior_;
  Matrix phi_;
  Matrix psi_;
  Matrix q_hat_;
  Matrix r_hat_;
  Matrix last_M_;
  Matrix last_S_;
  double last_m_ = 0.0;
  double last_s_ = 0.0;
  WindowPosterior last_posterior_;
};

}  // namespace vbmhe
