#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vbmhe/config.hpp>

#include "helpers.hpp"

using namespace vbmhe;

namespace {

// minimal valid config with a scalar custom model and one fixed filter
std::string base_config() {
  return R"({
    "schema_version": 1,
    "scenario": {
      "model": {"type": "custom", "A": [[1.0]], "C": [[1.0]]},
      "true_Q": [[1.0]],
      "true_R": [[2.0]],
      "x0_mean": [0.0],
      "x0_cov": [[1.0]],
      "horizon": 10,
      "seed": 7
    },
    "filters": [
      {"name": "kf", "type": "nominal-kf", "Q": [[1.0]], "R": [[2.0]]}
    ],
    "error_components": {"position": [0], "velocity": [0]}
  })";
}

// returns the ConfigError path for a parse that must fail
std::string failing_path(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

std::string replaced(std::string text, const std::string& from,
                     const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("the shipped tracking benchmark config loads") {
  const RunConfig cfg = load_config(std::string(VBMHE_CONFIG_DIR) +
                                    "/tracking.json");
  CHECK(cfg.trials == 20);
  CHECK(cfg.scenario.horizon == 500);
  CHECK(cfg.has_seed);
  CHECK(cfg.scenario.seed == 12345);
  REQUIRE(cfg.filters.size() == 3);
  CHECK(cfg.filters[0].name == "nominal-kf");
  CHECK(cfg.filters[1].name == "vb-mhe-t20");
  CHECK(cfg.filters[2].name == "vb-mhe-t4");
  CHECK(window_length_of(cfg.filters[1]) == 20);
  CHECK(window_length_of(cfg.filters[2]) == 4);

  // scenario matches the constant-velocity tracking setup
  CHECK(th::rel_err(cfg.scenario.true_Q, Matrix(50.0 * th::tracking_Q0())) <
        1e-12);
  CHECK(th::rel_err(cfg.scenario.true_R, Matrix(3.0 * th::tracking_R0())) <
        1e-12);
  const auto* hyper = std::get_if<Hyperparams>(&cfg.filters[1].config);
  REQUIRE(hyper != nullptr);
  CHECK(hyper->vb_iterations == 1);
  CHECK(hyper->importance_samples == 100);
  CHECK(hyper->forgetting == doctest::Approx(0.9));
  CHECK(th::rel_err(mean(hyper->Q_prior), th::tracking_Q0()) < 1e-12);
  CHECK(th::rel_err(mean(hyper->R_prior), th::tracking_R0()) < 1e-12);
  CHECK(cfg.components.position == std::vector<Eigen::Index>{0, 1});
  CHECK(cfg.components.velocity == std::vector<Eigen::Index>{2, 3});
  CHECK_FALSE(cfg.echo.empty());
}

TEST_CASE("minimal config round trips") {
  const RunConfig cfg = parse_config(base_config());
  CHECK(cfg.scenario.model.state_dim() == 1);
  CHECK(cfg.scenario.horizon == 10);
  CHECK(cfg.has_seed);
  CHECK(cfg.scenario.seed == 7);
  CHECK(cfg.trials == 1);  // experiment block is optional
  REQUIRE(cfg.filters.size() == 1);
  CHECK(window_length_of(cfg.filters[0]) == 0);
}

TEST_CASE("seed is optional and reported as absent") {
  const std::string text = replaced(base_config(), "\"horizon\": 10,\n      \"seed\": 7",
                                    "\"horizon\": 10");
  const RunConfig cfg = parse_config(text);
  CHECK_FALSE(cfg.has_seed);
  CHECK(cfg.scenario.seed == 0);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK(failing_path(replaced(base_config(), "\"schema_version\": 1",
                              "\"schema_version\": 1, \"extra\": 3")) ==
        "<config>.extra");
  CHECK(failing_path(replaced(base_config(), "\"horizon\": 10",
                              "\"horizon\": 10, \"color\": \"red\"")) ==
        "scenario.color");
  CHECK(failing_path(replaced(base_config(), "\"type\": \"nominal-kf\"",
                              "\"type\": \"nominal-kf\", \"window_length\": 4")) ==
        "filters[0].window_length");
}

TEST_CASE("schema version must be present and supported") {
  CHECK(failing_path(replaced(base_config(), "\"schema_version\": 1",
                              "\"schema_version\": 2")) == "schema_version");
  const std::string no_version =
      replaced(base_config(), "\"schema_version\": 1,", "");
  CHECK(failing_path(no_version) == "<config>.schema_version");
}

TEST_CASE("malformed JSON and wrong types are config errors") {
  CHECK(failing_path("{") == "<config>");
  CHECK(failing_path(replaced(base_config(), "\"horizon\": 10",
                              "\"horizon\": \"ten\"")) == "scenario.horizon");
  CHECK(failing_path(replaced(base_config(), "\"true_Q\": [[1.0]]",
                              "\"true_Q\": [[1.0, 2.0]]")) ==
        "scenario.true_Q");
  CHECK(failing_path(replaced(base_config(), "\"true_Q\": [[1.0]]",
                              "\"true_Q\": 5")) == "scenario.true_Q");
}

TEST_CASE("ragged matrices name the offending row") {
  const std::string text = replaced(
      base_config(), "\"model\": {\"type\": \"custom\", \"A\": [[1.0]], \"C\": [[1.0]]}",
      "\"model\": {\"type\": \"custom\", \"A\": [[1.0, 0.0], [1.0]], \"C\": [[1.0, 0.0]]}");
  CHECK(failing_path(text) == "scenario.model.A[1]");
}

TEST_CASE("duplicate filter names are rejected") {
  const std::string text = replaced(
      base_config(),
      "{\"name\": \"kf\", \"type\": \"nominal-kf\", \"Q\": [[1.0]], \"R\": [[2.0]]}",
      "{\"name\": \"kf\", \"type\": \"nominal-kf\", \"Q\": [[1.0]], \"R\": [[2.0]]},\n"
      "      {\"name\": \"kf\", \"type\": \"nominal-kf\", \"Q\": [[1.0]], \"R\": [[2.0]]}");
  CHECK(failing_path(text) == "filters[1].name");
}

TEST_CASE("filter names are restricted to safe characters") {
  CHECK(failing_path(replaced(base_config(), "\"name\": \"kf\"",
                              "\"name\": \"k f\"")) == "filters[0].name");
  CHECK(failing_path(replaced(base_config(), "\"name\": \"kf\"",
                              "\"name\": \"\"")) == "filters[0].name");
}

TEST_CASE("unknown model and filter types are named in the error") {
  CHECK(failing_path(replaced(base_config(), "\"type\": \"custom\"",
                              "\"type\": \"rocket\"")) ==
        "scenario.model.type");
  CHECK(failing_path(replaced(base_config(), "\"type\": \"nominal-kf\"",
                              "\"type\": \"particle\"")) ==
        "filters[0].type");
}

TEST_CASE("scenario validity is checked at parse time") {
  // indefinite true_Q
  CHECK(failing_path(replaced(base_config(), "\"true_Q\": [[1.0]]",
                              "\"true_Q\": [[-1.0]]")) == "scenario");
  // zero horizon
  CHECK(failing_path(replaced(base_config(), "\"horizon\": 10",
                              "\"horizon\": 0")) == "scenario.horizon");
  // negative seed
  CHECK(failing_path(replaced(base_config(), "\"seed\": 7", "\"seed\": -1")) ==
        "scenario.seed");
}

TEST_CASE("vb filter hyperparameters are validated in context") {
  const std::string vb_filter =
      R"({"name": "vb", "type": "vb-mhe", "window_length": 0,
          "vb_iterations": 1, "importance_samples": 10, "forgetting": 0.9,
          "q_prior": {"scale": [[3.0]], "dof": 6.0},
          "r_prior": {"scale": [[6.0]], "dof": 6.0},
          "q_set": {"lower": [[0.1]], "upper": [[10.0]]},
          "r_set": {"lower": [[0.2]], "upper": [[20.0]]}})";
  const std::string text = replaced(
      base_config(),
      "{\"name\": \"kf\", \"type\": \"nominal-kf\", \"Q\": [[1.0]], \"R\": [[2.0]]}",
      vb_filter);
  CHECK(failing_path(text) == "filters[0]");  // window_length 0

  const RunConfig ok = parse_config(replaced(text, "\"window_length\": 0",
                                             "\"window_length\": 3"));
  const auto* hyper = std::get_if<Hyperparams>(&ok.filters[0].config);
  REQUIRE(hyper != nullptr);
  CHECK(hyper->window_length == 3);
  CHECK(mean(hyper->Q_prior)(0, 0) == doctest::Approx(0.75));
}

TEST_CASE("missing files raise an io failure, not a config error") {
  CHECK_THROWS_AS(load_config("/nonexistent/path/config.json"),
                  std::ios_base::failure);
}

TEST_CASE("error components must index valid states") {
  CHECK(failing_path(replaced(base_config(), "\"position\": [0]",
                              "\"position\": [5]")) ==
        "error_components.position[0]");
}
