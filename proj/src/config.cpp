#include "vbmhe/config.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vbmhe {

namespace {

using nlohmann::json;

std::string type_name(const json& j) {
  return j.type_name();
}

const json& require(const json& obj, const char* key, const std::string& at) {
  if (!obj.is_object()) {
    throw ConfigError(at, "expected an object, got " + type_name(obj));
  }
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError(at + "." + key, "missing required key");
  }
  return *it;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& at) {
  if (!obj.is_object()) {
    throw ConfigError(at, "expected an object, got " + type_name(obj));
  }
  for (const auto& item : obj.items()) {
    if (allowed.count(item.key()) == 0) {
      throw ConfigError(at + "." + item.key(), "unknown key");
    }
  }
}

double as_number(const json& j, const std::string& at) {
  if (!j.is_number()) {
    throw ConfigError(at, "expected a number, got " + type_name(j));
  }
  return j.get<double>();
}

int as_int(const json& j, const std::string& at) {
  if (!j.is_number_integer()) {
    throw ConfigError(at, "expected an integer, got " + type_name(j));
  }
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& at) {
  if (!j.is_string()) {
    throw ConfigError(at, "expected a string, got " + type_name(j));
  }
  return j.get<std::string>();
}

Vector parse_vector(const json& j, const std::string& at) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(at, "expected a nonempty numeric array");
  }
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) =
        as_number(j[i], at + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix parse_matrix(const json& j, const std::string& at) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(at, "expected a nonempty array of rows");
  }
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    throw ConfigError(at, "expected rows to be nonempty numeric arrays");
  }
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_at = at + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(row_at, "ragged matrix: expected " +
                                    std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(j[r][c], row_at + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

Matrix parse_sized_matrix(const json& j, const std::string& at,
                          Eigen::Index rows, Eigen::Index cols) {
  const Matrix m = parse_matrix(j, at);
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << "expected a " << rows << "x" << cols << " matrix, got " << m.rows()
        << "x" << m.cols();
    throw ConfigError(at, msg.str());
  }
  return m;
}

LinearGaussianModel parse_model(const json& j, const std::string& at) {
  const std::string type = as_string(require(j, "type", at), at + ".type");
  if (type == "constant_velocity") {
    reject_unknown(j, {"type", "sampling_interval"}, at);
    const double dt = as_number(require(j, "sampling_interval", at),
                                at + ".sampling_interval");
    if (!(dt > 0.0)) {
      throw ConfigError(at + ".sampling_interval", "must be > 0");
    }
    return constant_velocity_model(dt);
  }
  if (type == "custom") {
    reject_unknown(j, {"type", "A", "C"}, at);
    const Matrix A = parse_matrix(require(j, "A", at), at + ".A");
    const Matrix C = parse_matrix(require(j, "C", at), at + ".C");
    if (A.rows() != A.cols()) {
      throw ConfigError(at + ".A", "must be square");
    }
    if (C.cols() != A.rows()) {
      throw ConfigError(at + ".C",
                        "column count must match the state dimension");
    }
    return LinearGaussianModel(A, C);
  }
  throw ConfigError(at + ".type",
                    "unknown model type \"" + type +
                        "\" (expected constant_velocity or custom)");
}

InverseWishartParams parse_iw(const json& j, const std::string& at,
                              Eigen::Index dim) {
  reject_unknown(j, {"scale", "dof"}, at);
  const Matrix scale =
      parse_sized_matrix(require(j, "scale", at), at + ".scale", dim, dim);
  const double dof = as_number(require(j, "dof", at), at + ".dof");
  try {
    return InverseWishartParams(SpdMatrix(scale), dof);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(at, e.what());
  } catch (const NotPositiveDefinite& e) {
    throw ConfigError(at, e.what());
  }
}

CovarianceConstraintSet parse_set(const json& j, const std::string& at,
                                  Eigen::Index dim) {
  reject_unknown(j, {"lower", "upper"}, at);
  const Matrix lower =
      parse_sized_matrix(require(j, "lower", at), at + ".lower", dim, dim);
  const Matrix upper =
      parse_sized_matrix(require(j, "upper", at), at + ".upper", dim, dim);
  try {
    return CovarianceConstraintSet(SpdMatrix(lower), SpdMatrix(upper));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(at, e.what());
  } catch (const NotPositiveDefinite& e) {
    throw ConfigError(at, e.what());
  }
}

FilterSpec parse_filter(const json& j, const std::string& at,
                        const LinearGaussianModel& model) {
  const Eigen::Index nx = model.state_dim();
  const Eigen::Index ny = model.measurement_dim();
  const std::string name = as_string(require(j, "name", at), at + ".name");
  if (name.empty() ||
      name.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                             "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
          std::string::npos) {
    throw ConfigError(at + ".name",
                      "must be nonempty, characters [A-Za-z0-9_.-] only");
  }
  const std::string type = as_string(require(j, "type", at), at + ".type");
  if (type == "nominal-kf") {
    reject_unknown(j, {"name", "type", "Q", "R"}, at);
    NominalKfSpec kf;
    kf.Q = parse_sized_matrix(require(j, "Q", at), at + ".Q", nx, nx);
    kf.R = parse_sized_matrix(require(j, "R", at), at + ".R", ny, ny);
    return FilterSpec{name, std::move(kf)};
  }
  if (type == "vb-mhe") {
    reject_unknown(j,
                   {"name", "type", "window_length", "vb_iterations",
                    "importance_samples", "forgetting", "q_prior", "r_prior",
                    "q_set", "r_set"},
                   at);
    Hyperparams h{
        as_int(require(j, "window_length", at), at + ".window_length"),
        as_int(require(j, "vb_iterations", at), at + ".vb_iterations"),
        as_int(require(j, "importance_samples", at),
               at + ".importance_samples"),
        as_number(require(j, "forgetting", at), at + ".forgetting"),
        parse_iw(require(j, "q_prior", at), at + ".q_prior", nx),
        parse_iw(require(j, "r_prior", at), at + ".r_prior", ny),
        parse_set(require(j, "q_set", at), at + ".q_set", nx),
        parse_set(require(j, "r_set", at), at + ".r_set", ny)};
    try {
      validate(h, model);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(at, e.what());
    }
    return FilterSpec{name, std::move(h)};
  }
  throw ConfigError(at + ".type",
                    "unknown filter type \"" + type +
                        "\" (expected nominal-kf or vb-mhe)");
}

std::vector<Eigen::Index> parse_indices(const json& j, const std::string& at,
                                        Eigen::Index nx) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(at, "expected a nonempty array of state indices");
  }
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const int v = as_int(j[i], at + "[" + std::to_string(i) + "]");
    if (v < 0 || v >= nx) {
      throw ConfigError(at + "[" + std::to_string(i) + "]",
                        "state index out of range");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<config>", e.what());
  }
  reject_unknown(root,
                 {"schema_version", "scenario", "filters", "experiment",
                  "error_components"},
                 "<config>");
  const int version = as_int(require(root, "schema_version", "<config>"),
                             "schema_version");
  if (version != 1) {
    throw ConfigError("schema_version",
                      "unsupported schema version " +
                          std::to_string(version) + " (supported: 1)");
  }

  const json& sc = require(root, "scenario", "<config>");
  reject_unknown(sc,
                 {"model", "true_Q", "true_R", "x0_mean", "x0_cov", "horizon",
                  "seed"},
                 "scenario");
  LinearGaussianModel model =
      parse_model(require(sc, "model", "scenario"), "scenario.model");
  const Eigen::Index nx = model.state_dim();
  const Eigen::Index ny = model.measurement_dim();

  RunConfig cfg{Scenario{std::move(model),
                         parse_sized_matrix(require(sc, "true_Q", "scenario"),
                                            "scenario.true_Q", nx, nx),
                         parse_sized_matrix(require(sc, "true_R", "scenario"),
                                            "scenario.true_R", ny, ny),
                         parse_vector(require(sc, "x0_mean", "scenario"),
                                      "scenario.x0_mean"),
                         parse_sized_matrix(require(sc, "x0_cov", "scenario"),
                                            "scenario.x0_cov", nx, nx),
                         as_int(require(sc, "horizon", "scenario"),
                                "scenario.horizon"),
                         0}};
  if (cfg.scenario.x0_mean.size() != nx) {
    throw ConfigError("scenario.x0_mean",
                      "expected " + std::to_string(nx) + " entries");
  }
  if (cfg.scenario.horizon < 1) {
    throw ConfigError("scenario.horizon", "must be >= 1");
  }
  if (sc.contains("seed")) {
    const json& seed = sc["seed"];
    if (!seed.is_number_unsigned()) {
      throw ConfigError("scenario.seed", "expected a nonnegative integer");
    }
    cfg.scenario.seed = seed.get<std::uint64_t>();
    cfg.has_seed = true;
  }
  try {
    validate(cfg.scenario);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario", e.what());
  } catch (const NotPositiveDefinite& e) {
    throw ConfigError("scenario", e.what());
  }

  const json& filters = require(root, "filters", "<config>");
  if (!filters.is_array()) {
    throw ConfigError("filters", "expected an array");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const std::string at = "filters[" + std::to_string(i) + "]";
    cfg.filters.push_back(parse_filter(filters[i], at, cfg.scenario.model));
    if (!names.insert(cfg.filters.back().name).second) {
      throw ConfigError(at + ".name",
                        "duplicate filter name \"" +
                            cfg.filters.back().name + "\"");
    }
  }

  if (root.contains("experiment")) {
    const json& ex = root["experiment"];
    reject_unknown(ex, {"trials"}, "experiment");
    cfg.trials = as_int(require(ex, "trials", "experiment"),
                        "experiment.trials");
    if (cfg.trials < 1) {
      throw ConfigError("experiment.trials", "must be >= 1");
    }
  }

  if (root.contains("error_components")) {
    const json& ec = root["error_components"];
    reject_unknown(ec, {"position", "velocity"}, "error_components");
    cfg.components.position =
        parse_indices(require(ec, "position", "error_components"),
                      "error_components.position", nx);
    cfg.components.velocity =
        parse_indices(require(ec, "velocity", "error_components"),
                      "error_components.velocity", nx);
  } else {
    if (nx % 2 != 0) {
      throw ConfigError("error_components",
                        "required for odd state dimensions");
    }
    cfg.components = tracking_components(nx);
  }

  cfg.echo = root.dump(2);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::ios_base::failure("cannot open config file: " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) {
    throw std::ios_base::failure("failed reading config file: " + path);
  }
  return parse_config(text.str());
}

}  // namespace vbmhe
