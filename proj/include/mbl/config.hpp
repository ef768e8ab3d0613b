#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mbl/baselines.hpp"
#include "mbl/env_markov.hpp"
#include "mbl/reduction_known.hpp"
#include "mbl/reduction_unknown.hpp"

namespace mbl {

/// Everything one experiment needs. The file format is flat `key=value`
/// lines with dotted keys (`env.n_states=40`); `#` starts a comment.
/// Defaults are the desk-scale experiment (T = 50000, 20 runs).
struct RunConfig {
  long horizon = 50000;
  int n_runs = 20;
  std::uint64_t base_seed = 1;
  std::vector<std::string> algos{"known", "baseline"};
  bool paired = true;
  int checkpoints = 50;
  bool full_trace = false;
  std::string out_dir = "out";

  EnvParams env;
  std::uint64_t env_seed = 7;

  int bank_size = 256;
  bool bank_include_theta_star = false;

  KnownConfig known = default_known();
  UnknownConfig unknown;
  BaselineParams baseline;

  static KnownConfig default_known();

  /// Throws ConfigError naming the first offending key.
  void validate() const;
};

/// Every accepted key, in canonical order.
const std::vector<std::string>& config_keys();

/// Applies one `key=value` assignment. Unknown keys and malformed values throw ConfigError.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Parses the text of a config file on top of the defaults. Does not validate.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Applies `key=value` overrides in order.
void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments);

/// Canonical text form: every key in canonical order. parse_config(serialize_config(c))
/// reproduces c exactly.
std::string serialize_config(const RunConfig& config);

/// FNV-1a of the canonical text (run.out_dir excluded), as 16 hex digits.
std::string config_digest(const RunConfig& config);

}  // namespace mbl
