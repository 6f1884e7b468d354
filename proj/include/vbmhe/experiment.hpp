#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vbmhe/filter.hpp"

namespace vbmhe {

// fixed-covariance Kalman filter baseline
struct NominalKfSpec {
  Matrix Q;
  Matrix R;
};

struct FilterSpec {
  std::string name;
  std::variant<NominalKfSpec, Hyperparams> config;
};

// window length for reporting; 0 for the non-windowed baseline
int window_length_of(const FilterSpec& spec);

// which state components enter the position / velocity error norms
struct ErrorComponents {
  std::vector<Eigen::Index> position;
  std::vector<Eigen::Index> velocity;
};

// default split for kinematic states: first half positions, second half
// velocities; requires an even state dimension
ErrorComponents tracking_components(Eigen::Index state_dim);

// per-trial, per-filter outcome
struct TrialSeries {
  std::vector<double> sq_pos;  // squared position error norm per step
  std::vector<double> sq_vel;
  std::vector<double> q_trace;
  std::vector<double> r_trace;
  bool failed = false;
  int fail_step = -1;  // 0 = construction, otherwise 1-based step
  std::string fail_reason;
};

struct FilterSeries {
  std::string name;
  int window_length = 0;
  std::vector<double> rmse_pos;  // across trials, per step
  std::vector<double> rmse_vel;
  double armse_pos = 0.0;
  double armse_vel = 0.0;
  int trials_used = 0;
  int trials_failed = 0;
};

struct BenchmarkReport {
  std::vector<FilterSeries> filters;
  int trial_count = 0;
  std::uint64_t master_seed = 0;
};

// sqrt of the per-step mean over trials; input indexed [trial][step]
std::vector<double> rmse_over_trials(
    const std::vector<std::vector<double>>& squared_errors);

// mean over steps of the per-step RMSE over trials
double armse(const std::vector<std::vector<double>>& squared_errors);

// one filter over one simulated trajectory
TrialSeries run_single(const Scenario& scenario, const Trajectory& trajectory,
                       const FilterSpec& spec,
                       const ErrorComponents& components,
                       std::uint64_t filter_seed);

// Monte-Carlo benchmark: trial_count independent trajectories, every filter
// on each. Trial i simulates with derive_seed(master_seed, {1, i}) and filter
// f runs with derive_seed(master_seed, {2, i, f}), so the report depends only
// on master_seed, never on the worker count. Failed (trial, filter) runs are
// excluded from the averages and counted.
BenchmarkReport run_trials(const Scenario& base,
                           const std::vector<FilterSpec>& filters,
                           const ErrorComponents& components, int trial_count,
                           std::uint64_t master_seed, int parallelism);

}  // namespace vbmhe
