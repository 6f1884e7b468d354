#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* p = std::getenv("VBMHE_CLI");
  REQUIRE_MESSAGE(p != nullptr, "VBMHE_CLI must point at the binary");
  return p;
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = "\"" + cli_path() + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) {
    res.output.append(buf, n);
  }
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("vbmhe_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string& text) {
  int n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
  REQUIRE(out.good());
}

// small two-filter benchmark config, horizon 30
std::string bench_config(int trials) {
  std::ostringstream ss;
  ss << R"({
  "schema_version": 1,
  "scenario": {
    "model": {"type": "constant_velocity", "sampling_interval": 1.0},
    "true_Q": [[16.666666666666664,0.0,25.0,0.0],[0.0,16.666666666666664,0.0,25.0],
               [25.0,0.0,50.0,0.0],[0.0,25.0,0.0,50.0]],
    "true_R": [[300.0,150.0],[150.0,300.0]],
    "x0_mean": [0.0,10.0,0.0,10.0],
    "x0_cov": [[100.0,0,0,0],[0,100.0,0,0],[0,0,100.0,0],[0,0,0,100.0]],
    "horizon": 30,
    "seed": 99
  },
  "filters": [
    {"name": "kf", "type": "nominal-kf",
     "Q": [[0.3333333333333333,0.0,0.5,0.0],[0.0,0.3333333333333333,0.0,0.5],
           [0.5,0.0,1.0,0.0],[0.0,0.5,0.0,1.0]],
     "R": [[100.0,50.0],[50.0,100.0]]},
    {"name": "vb", "type": "vb-mhe", "window_length": 3,
     "vb_iterations": 1, "importance_samples": 20, "forgetting": 0.9,
     "q_prior": {"scale": [[1.0,0.0,1.5,0.0],[0.0,1.0,0.0,1.5],
                           [1.5,0.0,3.0,0.0],[0.0,1.5,0.0,3.0]], "dof": 8.0},
     "r_prior": {"scale": [[300.0,150.0],[150.0,300.0]], "dof": 6.0},
     "q_set": {"lower": [[0.0003333,0.0,0.0005,0.0],[0.0,0.0003333,0.0,0.0005],
                         [0.0005,0.0,0.001,0.0],[0.0,0.0005,0.0,0.001]],
               "upper": [[333.33,0.0,500.0,0.0],[0.0,333.33,0.0,500.0],
                         [500.0,0.0,1000.0,0.0],[0.0,500.0,0.0,1000.0]]},
     "r_set": {"lower": [[10.0,5.0],[5.0,10.0]],
               "upper": [[1000.0,500.0],[500.0,1000.0]]}}
  ],
  "experiment": {"trials": )"
     << trials << R"(}
})";
  return ss.str();
}

// single-filter config for the run subcommand; the prior mean sits inside the
// constraint interval unless moved
std::string run_config(bool poisoned) {
  std::ostringstream ss;
  ss << R"({
  "schema_version": 1,
  "scenario": {
    "model": {"type": "custom", "A": [[1.0]], "C": [[1.0]]},
    "true_Q": [[1.0]],
    "true_R": [[1.0]],
    "x0_mean": [0.0],
    "x0_cov": [[1.0]],
    "horizon": 20,
    "seed": 5
  },
  "filters": [
    {"name": "vb", "type": "vb-mhe", "window_length": 2,
     "vb_iterations": 1, "importance_samples": 15, "forgetting": 0.9,
     "q_prior": {"scale": [[3.0]], "dof": 6.0},
     "r_prior": {"scale": [[3.0]], "dof": 6.0},
     "q_set": {"lower": [[)"
     << (poisoned ? 50.0 : 0.01) << R"(]], "upper": [[100.0]]},
     "r_set": {"lower": [[0.01]], "upper": [[100.0]]}}
  ],
  "error_components": {"position": [0], "velocity": [0]}
})";
  return ss.str();
}

}  // namespace

TEST_CASE("help and argument errors") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("bench --help").exit_code == 0);
  // missing required options and unknown subcommands are parser errors
  CHECK(run_cli("bench").exit_code != 0);
  CHECK(run_cli("explode --config x").exit_code != 0);
}

TEST_CASE("simulate writes one row per state and measurement") {
  const fs::path dir = fresh_dir("simulate");
  write_file(dir / "cfg.json", bench_config(2));
  const fs::path out = dir / "traj.csv";
  const CliResult res = run_cli("simulate --config \"" + (dir / "cfg.json").string() +
                                "\" --output \"" + out.string() + "\"");
  CHECK(res.exit_code == 0);
  const std::string text = slurp(out);
  // header + 31 states + 30 measurements
  CHECK(line_count(text) == 62);
  CHECK(text.rfind("kind,time,", 0) == 0);

  // byte-stable across reruns, sensitive to the seed
  run_cli("simulate --config \"" + (dir / "cfg.json").string() +
          "\" --output \"" + (dir / "traj2.csv").string() + "\"");
  CHECK(slurp(dir / "traj2.csv") == text);
  run_cli("simulate --config \"" + (dir / "cfg.json").string() +
          "\" --seed 123 --output \"" + (dir / "traj3.csv").string() + "\"");
  CHECK(slurp(dir / "traj3.csv") != text);
}

TEST_CASE("run emits a per-step diagnostic row for the single filter") {
  const fs::path dir = fresh_dir("run");
  write_file(dir / "cfg.json", run_config(false));
  const fs::path out = dir / "run.csv";
  const CliResult res = run_cli("run --config \"" + (dir / "cfg.json").string() +
                                "\" --output \"" + out.string() + "\"");
  CHECK(res.exit_code == 0);
  const std::string text = slurp(out);
  CHECK(line_count(text) == 21);  // header + 20 steps
  CHECK(text.rfind("time,x0,", 0) == 0);

  // two filters make run refuse with a config error
  write_file(dir / "two.json", bench_config(1));
  const CliResult two = run_cli("run --config \"" + (dir / "two.json").string() +
                                "\" --output \"" + (dir / "x.csv").string() + "\"");
  CHECK(two.exit_code == 2);
}

TEST_CASE("run reports filter construction failures as runtime errors") {
  const fs::path dir = fresh_dir("poisoned");
  write_file(dir / "cfg.json", run_config(true));  // prior mean outside set
  const CliResult res = run_cli("run --config \"" + (dir / "cfg.json").string() +
                                "\" --output \"" + (dir / "x.csv").string() + "\"");
  CHECK(res.exit_code == 3);
  CHECK(res.output.find("vb") != std::string::npos);
}

TEST_CASE("bench writes summary, timeseries and report, all seed-pinned") {
  const fs::path dir = fresh_dir("bench");
  write_file(dir / "cfg.json", bench_config(3));

  const CliResult res = run_cli("bench --config \"" + (dir / "cfg.json").string() +
                                "\" --output \"" + (dir / "a").string() +
                                "\" --jobs 1");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("armse_pos") != std::string::npos);

  const std::string armse = slurp(dir / "a" / "armse.csv");
  CHECK(line_count(armse) == 3);  // header + 2 filters
  const std::string series = slurp(dir / "a" / "rmse_timeseries.csv");
  CHECK(line_count(series) == 1 + 2 * 30);
  const std::string report = slurp(dir / "a" / "report.json");
  CHECK(report.find("\"armse_pos\"") != std::string::npos);
  CHECK(report.find("\"master_seed\"") != std::string::npos);

  // threaded run produces identical bytes
  run_cli("bench --config \"" + (dir / "cfg.json").string() + "\" --output \"" +
          (dir / "b").string() + "\" --jobs 2");
  CHECK(slurp(dir / "b" / "armse.csv") == armse);
  CHECK(slurp(dir / "b" / "rmse_timeseries.csv") == series);

  // the seed flag overrides the config seed
  run_cli("bench --config \"" + (dir / "cfg.json").string() + "\" --output \"" +
          (dir / "c").string() + "\" --jobs 1 --seed 31337");
  CHECK(slurp(dir / "c" / "armse.csv") != armse);

  // trial count override shows up in the summary
  run_cli("bench --config \"" + (dir / "cfg.json").string() + "\" --output \"" +
          (dir / "d").string() + "\" --trials 2");
  const std::string overridden = slurp(dir / "d" / "armse.csv");
  CHECK(overridden.find(",2,0") != std::string::npos);
}

TEST_CASE("io and config failures use distinct exit codes") {
  const fs::path dir = fresh_dir("errors");
  // missing config file
  CHECK(run_cli("bench --config \"" + (dir / "missing.json").string() +
                "\" --output \"" + (dir / "o").string() + "\"").exit_code == 1);
  // malformed JSON
  write_file(dir / "broken.json", "{ not json");
  CHECK(run_cli("bench --config \"" + (dir / "broken.json").string() +
                "\" --output \"" + (dir / "o").string() + "\"").exit_code == 2);
  // unwritable output location
  write_file(dir / "cfg.json", bench_config(1));
  CHECK(run_cli("simulate --config \"" + (dir / "cfg.json").string() +
                "\" --output \"/nonexistent_root_dir/x.csv\"").exit_code == 1);
}

TEST_CASE("config without a seed needs the flag") {
  const fs::path dir = fresh_dir("noseed");
  std::string cfg = bench_config(1);
  const auto pos = cfg.find(",\n    \"seed\": 99");
  REQUIRE(pos != std::string::npos);
  cfg.erase(pos, std::string(",\n    \"seed\": 99").size());
  write_file(dir / "cfg.json", cfg);

  CHECK(run_cli("simulate --config \"" + (dir / "cfg.json").string() +
                "\" --output \"" + (dir / "t.csv").string() + "\"").exit_code == 2);
  CHECK(run_cli("simulate --config \"" + (dir / "cfg.json").string() +
                "\" --seed 4 --output \"" + (dir / "t.csv").string() +
                "\"").exit_code == 0);
}
