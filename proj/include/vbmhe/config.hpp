#pragma once

#include <string>

#include "vbmhe/experiment.hpp"

namespace vbmhe {

// schema violation; path names the offending key ("scenario.true_Q", ...)
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct RunConfig {
  Scenario scenario;  // seed is 0 unless has_seed
  bool has_seed = false;
  std::vector<FilterSpec> filters;
  ErrorComponents components;
  int trials = 1;
  std::string echo;  // normalized config for report sidecars
};

// Strict loader: unknown keys, missing keys, malformed or wrongly sized
// matrices all raise ConfigError naming the key path. IO failures raise
// std::ios_base::failure.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

}  // namespace vbmhe
