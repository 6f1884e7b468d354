#include "vbmhe/experiment.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace vbmhe {

int window_length_of(const FilterSpec& spec) {
  if (const auto* h = std::get_if<Hyperparams>(&spec.config)) {
    return h->window_length;
  }
  return 0;
}

ErrorComponents tracking_components(Eigen::Index state_dim) {
  if (state_dim < 2 || state_dim % 2 != 0) {
    throw std::invalid_argument(
        "tracking_components: state dimension must be even");
  }
  ErrorComponents c;
  for (Eigen::Index i = 0; i < state_dim / 2; ++i) c.position.push_back(i);
  for (Eigen::Index i = state_dim / 2; i < state_dim; ++i) {
    c.velocity.push_back(i);
  }
  return c;
}

std::vector<double> rmse_over_trials(
    const std::vector<std::vector<double>>& sq) {
  if (sq.empty() || sq[0].empty()) {
    throw std::invalid_argument("rmse_over_trials: empty error table");
  }
  const std::size_t steps = sq[0].size();
  for (const auto& row : sq) {
    if (row.size() != steps) {
      throw std::invalid_argument("rmse_over_trials: ragged error table");
    }
  }
  std::vector<double> out(steps, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    double acc = 0.0;
    for (const auto& row : sq) acc += row[t];
    out[t] = std::sqrt(acc / static_cast<double>(sq.size()));
  }
  return out;
}

double armse(const std::vector<std::vector<double>>& sq) {
  const std::vector<double> rmse = rmse_over_trials(sq);
  double acc = 0.0;
  for (double v : rmse) acc += v;
  return acc / static_cast<double>(rmse.size());
}

namespace {

double sq_norm_over(const Vector& err,
                    const std::vector<Eigen::Index>& components) {
  double acc = 0.0;
  for (Eigen::Index i : components) acc += err(i) * err(i);
  return acc;
}

void record_step(TrialSeries& series, const Vector& estimate,
                 const Vector& truth, const ErrorComponents& comps,
                 double q_trace, double r_trace) {
  const Vector err = estimate - truth;
  series.sq_pos.push_back(sq_norm_over(err, comps.position));
  series.sq_vel.push_back(sq_norm_over(err, comps.velocity));
  series.q_trace.push_back(q_trace);
  series.r_trace.push_back(r_trace);
}

}  // namespace

TrialSeries run_single(const Scenario& scenario, const Trajectory& traj,
                       const FilterSpec& spec, const ErrorComponents& comps,
                       std::uint64_t filter_seed) {
  TrialSeries series;
  const int horizon = static_cast<int>(traj.measurements.size());
  try {
    if (const auto* nominal = std::get_if<NominalKfSpec>(&spec.config)) {
      KalmanState state{scenario.x0_mean, scenario.x0_cov};
      for (int t = 1; t <= horizon; ++t) {
        state = kf_step(state, scenario.model, nominal->Q, nominal->R,
                        traj.measurements[t - 1]);
        record_step(series, state.mean, traj.states[t], comps,
                    nominal->Q.trace(), nominal->R.trace());
      }
    } else {
      const Hyperparams& hyper = std::get<Hyperparams>(spec.config);
      VbMheFilter filter(scenario.model, hyper, scenario.x0_mean,
                         scenario.x0_cov, filter_seed);
      for (int t = 1; t <= horizon; ++t) {
        const FilterOutput out = filter.step(traj.measurements[t - 1]);
        record_step(series, out.state_estimate, traj.states[t], comps,
                    out.Q_hat.trace(), out.R_hat.trace());
      }
    }
  } catch (const std::exception& e) {
    series.failed = true;
    series.fail_step = static_cast<int>(series.sq_pos.size());
    series.fail_reason = e.what();
  }
  return series;
}

BenchmarkReport run_trials(const Scenario& base,
                           const std::vector<FilterSpec>& filters,
                           const ErrorComponents& comps, int trial_count,
                           std::uint64_t master_seed, int parallelism) {
  if (trial_count < 1) {
    throw std::invalid_argument("run_trials: trial_count must be >= 1");
  }
  if (filters.empty()) {
    throw std::invalid_argument("run_trials: no filters given");
  }
  validate(base);
  for (Eigen::Index i : comps.position) {
    if (i < 0 || i >= base.model.state_dim()) {
      throw std::invalid_argument("run_trials: position component out of range");
    }
  }
  for (Eigen::Index i : comps.velocity) {
    if (i < 0 || i >= base.model.state_dim()) {
      throw std::invalid_argument("run_trials: velocity component out of range");
    }
  }

  // results are keyed by (trial, filter); workers pull trial indices from a
  // shared counter, so the layout is independent of scheduling
  std::vector<std::vector<TrialSeries>> results(
      trial_count, std::vector<TrialSeries>(filters.size()));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= trial_count) break;
      Scenario sc = base;
      sc.seed = derive_seed(master_seed, {1, static_cast<std::uint64_t>(i)});
      const Trajectory traj = simulate(sc);
      for (std::size_t f = 0; f < filters.size(); ++f) {
        results[i][f] = run_single(
            sc, traj, filters[f], comps,
            derive_seed(master_seed, {2, static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(f)}));
      }
    }
  };
  const int workers = std::max(1, std::min(parallelism, trial_count));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  BenchmarkReport report;
  report.trial_count = trial_count;
  report.master_seed = master_seed;
  for (std::size_t f = 0; f < filters.size(); ++f) {
    FilterSeries fs;
    fs.name = filters[f].name;
    fs.window_length = window_length_of(filters[f]);
    std::vector<std::vector<double>> pos;
    std::vector<std::vector<double>> vel;
    for (int i = 0; i < trial_count; ++i) {
      if (results[i][f].failed) {
        ++fs.trials_failed;
        continue;
      }
      pos.push_back(results[i][f].sq_pos);
      vel.push_back(results[i][f].sq_vel);
    }
    fs.trials_used = trial_count - fs.trials_failed;
    if (fs.trials_used > 0) {
      fs.rmse_pos = rmse_over_trials(pos);
      fs.rmse_vel = rmse_over_trials(vel);
      fs.armse_pos = armse(pos);
      fs.armse_vel = armse(vel);
    } else {
      fs.armse_pos = std::numeric_limits<double>::quiet_NaN();
      fs.armse_vel = std::numeric_limits<double>::quiet_NaN();
    }
    report.filters.push_back(std::move(fs));
  }
  return report;
}

}  // namespace vbmhe
