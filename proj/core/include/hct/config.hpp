#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hct/data.hpp"
#include "hct/optimizers.hpp"

namespace hct {

enum class Algorithm { Adam, SslAlm, Ssw };

std::string to_string(Algorithm algorithm);
/// Accepts adam, ssl_alm / ssl-alm / sslalm, ssw (case-insensitive).
Algorithm parse_algorithm(const std::string& name);

struct DataSource {
  /// When absent, a synthetic dataset is generated from `synthetic`.
  std::optional<std::filesystem::path> csv;
  std::string label_column = "label";
  std::string group_column = "group";
  SyntheticSpec synthetic;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::SslAlm;
  DataSource data;
  std::vector<std::size_t> hidden_dims{64, 32};
  double fairness_bound = 0.05;

  SslAlmConfig ssl_alm;
  SswConfig ssw;
  AdamConfig adam;

  double budget_seconds = 60.0;
  std::size_t repeats = 5;
  std::size_t per_group = 16;
  std::uint64_t base_seed = 0;
  std::uint64_t split_seed = 0;
  double test_fraction = 0.2;
  std::size_t eval_interval = 20;
  /// 0 means unlimited; otherwise the run also stops after this many steps.
  std::uint64_t max_iterations = 0;
  std::filesystem::path output_dir = "hct_out";

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Sets one key. Throws ConfigError for unknown keys or unparsable values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat `key = value` lines; `#` starts a comment. Unspecified keys keep
/// their defaults.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Serializes every key, so the output parses back to an equal config.
std::string format_config(const ExperimentConfig& cfg);

/// All recognised keys, in the order format_config writes them.
const std::vector<std::string>& config_keys();

}  // namespace hct
