#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "vbmhe/config.hpp"
#include "vbmhe/csv.hpp"

namespace {

using namespace vbmhe;

// filter failure while processing a measurement stream
struct FilterRunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const RunConfig& cfg, bool seed_given,
                           std::uint64_t seed_flag) {
  if (seed_given) return seed_flag;
  if (cfg.has_seed) return cfg.scenario.seed;
  throw ConfigError("scenario.seed",
                    "no seed: set scenario.seed in the config or pass --seed");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::ios_base::failure("cannot open output file: " + path);
  }
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out.good()) {
    throw std::ios_base::failure("failed writing output file: " + path);
  }
}

void cmd_simulate(const RunConfig& cfg, const std::string& output) {
  Scenario sc = cfg.scenario;
  const Trajectory traj = simulate(sc);
  std::ofstream out = open_output(output);
  write_csv_row(out, {"kind", "time", "values..."});
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    std::vector<std::string> row{"state", std::to_string(t)};
    for (Eigen::Index i = 0; i < traj.states[t].size(); ++i) {
      row.push_back(format_double(traj.states[t](i)));
    }
    write_csv_row(out, row);
  }
  for (std::size_t t = 0; t < traj.measurements.size(); ++t) {
    std::vector<std::string> row{"measurement", std::to_string(t + 1)};
    for (Eigen::Index i = 0; i < traj.measurements[t].size(); ++i) {
      row.push_back(format_double(traj.measurements[t](i)));
    }
    write_csv_row(out, row);
  }
  finish_output(out, output);
  std::printf("wrote %zu states and %zu measurements to %s\n",
              traj.states.size(), traj.measurements.size(), output.c_str());
}

void cmd_run(const RunConfig& cfg, const std::string& output) {
  if (cfg.filters.size() != 1) {
    throw ConfigError("filters", "run needs exactly one filter, got " +
                                     std::to_string(cfg.filters.size()));
  }
  const FilterSpec& spec = cfg.filters[0];
  const Trajectory traj = simulate(cfg.scenario);
  const std::uint64_t filter_seed =
      derive_seed(cfg.scenario.seed, {2, 0, 0});

  std::ofstream out = open_output(output);
  std::vector<std::string> header{"time"};
  for (Eigen::Index i = 0; i < cfg.scenario.model.state_dim(); ++i) {
    header.push_back("x" + std::to_string(i));
  }
  for (const char* name : {"cov_trace", "q_trace", "r_trace", "ess_q",
                           "ess_r", "fallbacks", "warmup"}) {
    header.push_back(name);
  }
  write_csv_row(out, header);

  auto emit = [&](int t, const Vector& estimate, double cov_trace,
                  double q_trace, double r_trace, double ess_q, double ess_r,
                  int fallbacks, bool warmup) {
    std::vector<std::string> row{std::to_string(t)};
    for (Eigen::Index i = 0; i < estimate.size(); ++i) {
      row.push_back(format_double(estimate(i)));
    }
    row.push_back(format_double(cov_trace));
    row.push_back(format_double(q_trace));
    row.push_back(format_double(r_trace));
    row.push_back(format_double(ess_q));
    row.push_back(format_double(ess_r));
    row.push_back(std::to_string(fallbacks));
    row.push_back(warmup ? "1" : "0");
    write_csv_row(out, row);
  };

  int t = 0;
  try {
    if (const auto* nominal = std::get_if<NominalKfSpec>(&spec.config)) {
      KalmanState state{cfg.scenario.x0_mean, cfg.scenario.x0_cov};
      for (t = 1; t <= cfg.scenario.horizon; ++t) {
        state = kf_step(state, cfg.scenario.model, nominal->Q, nominal->R,
                        traj.measurements[t - 1]);
        emit(t, state.mean, state.cov.trace(), nominal->Q.trace(),
             nominal->R.trace(), 0.0, 0.0, 0, false);
      }
    } else {
      VbMheFilter filter(cfg.scenario.model,
                         std::get<Hyperparams>(spec.config),
                         cfg.scenario.x0_mean, cfg.scenario.x0_cov,
                         filter_seed);
      for (t = 1; t <= cfg.scenario.horizon; ++t) {
        const FilterOutput step = filter.step(traj.measurements[t - 1]);
        emit(t, step.state_estimate, step.state_cov.trace(),
             step.Q_hat.trace(), step.R_hat.trace(), step.diagnostics.ess_q,
             step.diagnostics.ess_r, step.diagnostics.fallbacks,
             step.diagnostics.warmup);
      }
    }
  } catch (const std::exception& e) {
    throw FilterRunError("filter \"" + spec.name + "\" failed at step " +
                         std::to_string(t) + ": " + e.what());
  }
  finish_output(out, output);
  std::printf("wrote %d steps of filter \"%s\" to %s\n", cfg.scenario.horizon,
              spec.name.c_str(), output.c_str());
}

void cmd_bench(const RunConfig& cfg, const std::string& outdir, int jobs,
               int trials) {
  if (cfg.filters.empty()) {
    throw ConfigError("filters", "bench needs at least one filter");
  }
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) {
    throw std::ios_base::failure("cannot create output directory: " + outdir);
  }
  const BenchmarkReport report =
      run_trials(cfg.scenario, cfg.filters, cfg.components, trials,
                 cfg.scenario.seed, jobs);

  const std::string armse_path = outdir + "/armse.csv";
  {
    std::ofstream out = open_output(armse_path);
    write_csv_row(out, {"filter", "T", "armse_pos", "armse_vel",
                        "trials_used", "trials_failed"});
    for (const FilterSeries& fs : report.filters) {
      write_csv_row(out, {fs.name, std::to_string(fs.window_length),
                          format_double(fs.armse_pos),
                          format_double(fs.armse_vel),
                          std::to_string(fs.trials_used),
                          std::to_string(fs.trials_failed)});
    }
    finish_output(out, armse_path);
  }

  const std::string series_path = outdir + "/rmse_timeseries.csv";
  {
    std::ofstream out = open_output(series_path);
    write_csv_row(out, {"time", "filter", "T", "rmse_pos", "rmse_vel"});
    for (const FilterSeries& fs : report.filters) {
      for (std::size_t t = 0; t < fs.rmse_pos.size(); ++t) {
        write_csv_row(out, {std::to_string(t + 1), fs.name,
                            std::to_string(fs.window_length),
                            format_double(fs.rmse_pos[t]),
                            format_double(fs.rmse_vel[t])});
      }
    }
    finish_output(out, series_path);
  }

  const std::string report_path = outdir + "/report.json";
  {
    nlohmann::json j;
    j["master_seed"] = report.master_seed;
    j["trials"] = report.trial_count;
    j["config"] = nlohmann::json::parse(cfg.echo);
    for (const FilterSeries& fs : report.filters) {
      nlohmann::json f;
      f["name"] = fs.name;
      f["window_length"] = fs.window_length;
      f["armse_pos"] = fs.armse_pos;
      f["armse_vel"] = fs.armse_vel;
      f["trials_used"] = fs.trials_used;
      f["trials_failed"] = fs.trials_failed;
      j["filters"].push_back(std::move(f));
    }
    std::ofstream out = open_output(report_path);
    out << j.dump(2) << '\n';
    finish_output(out, report_path);
  }

  std::printf("%-24s %4s %12s %12s %7s %7s\n", "filter", "T", "armse_pos",
              "armse_vel", "used", "failed");
  for (const FilterSeries& fs : report.filters) {
    char window[16];
    if (fs.window_length > 0) {
      std::snprintf(window, sizeof(window), "%d", fs.window_length);
    } else {
      std::snprintf(window, sizeof(window), "-");
    }
    std::printf("%-24s %4s %12.3f %12.3f %7d %7d\n", fs.name.c_str(), window,
                fs.armse_pos, fs.armse_vel, fs.trials_used, fs.trials_failed);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive moving-horizon state estimation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::uint64_t seed_flag = 0;
  int jobs = 1;
  int trials_flag = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->required();
    cmd->add_option("--seed", seed_flag,
                    "master seed (overrides scenario.seed)");
  };
  CLI::App* sim = app.add_subcommand(
      "simulate", "write one simulated trajectory as CSV");
  add_common(sim);
  sim->add_option("--output", output, "output CSV path")->required();

  CLI::App* run = app.add_subcommand(
      "run", "run the config's single filter over one trajectory");
  add_common(run);
  run->add_option("--output", output, "output CSV path")->required();

  CLI::App* bench = app.add_subcommand(
      "bench", "Monte-Carlo benchmark of all configured filters");
  add_common(bench);
  bench->add_option("--output", output, "output directory")->required();
  bench->add_option("--jobs", jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  bench->add_option("--trials", trials_flag,
                    "override experiment.trials from the config")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(config_path);
    CLI::App* active = app.get_subcommands().front();
    const bool seed_given = active->count("--seed") > 0;
    cfg.scenario.seed = resolve_seed(cfg, seed_given, seed_flag);
    cfg.has_seed = true;
    if (sim->parsed()) {
      cmd_simulate(cfg, output);
    } else if (run->parsed()) {
      cmd_run(cfg, output);
    } else {
      cmd_bench(cfg, output, jobs, trials_flag > 0 ? trials_flag : cfg.trials);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 1;
  } catch (const FilterRunError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
