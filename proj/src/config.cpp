#include "mbl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace mbl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::string format_double(double x) {
  if (std::isinf(x)) return "inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + xs[i];
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define MBL_INT(expr)                                                                                  \
  Field {                                                                                              \
    [](RunConfig& c, const std::string& k, const std::string& v) {                                     \
      expr = parse_int<std::remove_reference_t<decltype(expr)>>(k, v);                                 \
    },                                                                                                 \
        [](const RunConfig& c) { return std::to_string(expr); }                                        \
  }
#define MBL_DOUBLE(expr)                                                                                     \
  Field {                                                                                                    \
    [](RunConfig& c, const std::string& k, const std::string& v) { expr = parse_double(k, v); },             \
        [](const RunConfig& c) { return format_double(expr); }                                               \
  }
#define MBL_BOOL(expr)                                                                                       \
  Field {                                                                                                    \
    [](RunConfig& c, const std::string& k, const std::string& v) { expr = parse_bool(k, v); },               \
        [](const RunConfig& c) { return format_bool(expr); }                                                 \
  }

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"run.horizon", MBL_INT(c.horizon)},
      {"run.n_runs", MBL_INT(c.n_runs)},
      {"run.base_seed", MBL_INT(c.base_seed)},
      {"run.algos", Field{[](RunConfig& c, const std::string&, const std::string& v) { c.algos = split_list(v); },
                          [](const RunConfig& c) { return join(c.algos); }}},
      {"run.paired", MBL_BOOL(c.paired)},
      {"run.checkpoints", MBL_INT(c.checkpoints)},
      {"run.full_trace", MBL_BOOL(c.full_trace)},
      {"run.out_dir", Field{[](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
                            [](const RunConfig& c) { return c.out_dir; }}},
      {"env.n_states", MBL_INT(c.env.n_states)},
      {"env.n_actions", MBL_INT(c.env.n_actions)},
      {"env.dim", MBL_INT(c.env.dim)},
      {"env.p_loop", MBL_DOUBLE(c.env.p_loop)},
      {"env.n_neighbors", MBL_INT(c.env.n_neighbors)},
      {"env.beta", MBL_DOUBLE(c.env.beta)},
      {"env.pi_mode", Field{[](RunConfig& c, const std::string&, const std::string& v) { c.env.pi_mode = v; },
                            [](const RunConfig& c) { return c.env.pi_mode; }}},
      {"env.sigma", MBL_DOUBLE(c.env.sigma)},
      {"env.c_mix", MBL_DOUBLE(c.env.c_mix)},
      {"env.seed", MBL_INT(c.env_seed)},
      {"env.theta_star",
       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
               c.env.theta_star.clear();
               for (const auto& item : split_list(v)) c.env.theta_star.push_back(parse_double(k, item));
             },
             [](const RunConfig& c) {
               std::vector<std::string> parts;
               for (double x : c.env.theta_star) parts.push_back(format_double(x));
               return join(parts);
             }}},
      {"bank.size", MBL_INT(c.bank_size)},
      {"bank.include_theta_star", MBL_BOOL(c.bank_include_theta_star)},
      {"known.lambda", MBL_DOUBLE(c.known.ucb.lambda)},
      {"known.radius",
       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
               if (v == "fixed") {
                 c.known.ucb.mode = RadiusMode::kFixed;
               } else if (v == "self_normalized") {
                 c.known.ucb.mode = RadiusMode::kSelfNormalized;
               } else {
                 throw ConfigError(k, "expected fixed or self_normalized, got '" + v + "'");
               }
             },
             [](const RunConfig& c) {
               return std::string(c.known.ucb.mode == RadiusMode::kFixed ? "fixed" : "self_normalized");
             }}},
      {"known.alpha", MBL_DOUBLE(c.known.ucb.alpha)},
      {"known.noise_proxy", MBL_DOUBLE(c.known.ucb.noise_proxy)},
      {"known.delta", MBL_DOUBLE(c.known.ucb.delta)},
      {"known.bonus_cap", MBL_DOUBLE(c.known.ucb.bonus_cap)},
      {"known.c_tau", MBL_DOUBLE(c.known.c_tau)},
      {"known.tau", MBL_INT(c.known.tau_override)},
      {"known.auto_bias_level", MBL_BOOL(c.known.auto_bias_level)},
      {"known.bias_level", MBL_DOUBLE(c.known.ucb.bias_level)},
      {"known.theory_mode", MBL_BOOL(c.known.theory_mode)},
      {"unknown.c_tau", MBL_DOUBLE(c.unknown.c_tau)},
      {"unknown.tau", MBL_INT(c.unknown.tau_override)},
      {"unknown.delta", MBL_DOUBLE(c.unknown.delta)},
      {"unknown.delta_pe", MBL_DOUBLE(c.unknown.delta_pe)},
      {"unknown.c_mix_bound", MBL_DOUBLE(c.unknown.c_mix_bound)},
      {"unknown.beta_bound", MBL_DOUBLE(c.unknown.beta_bound)},
      {"baseline.lambda", MBL_DOUBLE(c.baseline.lambda)},
      {"baseline.alpha", MBL_DOUBLE(c.baseline.alpha)},
  };
  return table;
}

#undef MBL_INT
#undef MBL_DOUBLE
#undef MBL_BOOL

const Field& field(const std::string& key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return f;
  }
  throw ConfigError(key, "unknown key");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

KnownConfig RunConfig::default_known() {
  KnownConfig k;
  k.ucb.lambda = 100.0;
  k.ucb.mode = RadiusMode::kFixed;
  k.ucb.alpha = 2.0;
  k.ucb.bonus_cap = 2.5;
  k.c_tau = 1.0;
  return k;
}

void RunConfig::validate() const {
  require(horizon >= 2, "run.horizon", "must be >= 2");
  require(n_runs >= 1, "run.n_runs", "must be >= 1");
  require(checkpoints >= 1, "run.checkpoints", "must be >= 1");
  require(!algos.empty(), "run.algos", "must name at least one algorithm");
  std::set<std::string> seen;
  for (const auto& a : algos) {
    require(a == "known" || a == "unknown" || a == "baseline", "run.algos",
            "unknown algorithm '" + a + "' (known, unknown, baseline)");
    require(seen.insert(a).second, "run.algos", "duplicate algorithm '" + a + "'");
  }
  require(!out_dir.empty(), "run.out_dir", "must not be empty");

  require(env.n_states >= 3, "env.n_states", "must be >= 3");
  require(env.n_actions >= 1, "env.n_actions", "must be >= 1");
  require(env.dim >= 1, "env.dim", "must be >= 1");
  require(in_open_unit(env.p_loop), "env.p_loop", "must lie in (0, 1)");
  require(env.n_neighbors >= 1 && 2 * env.n_neighbors < env.n_states, "env.n_neighbors",
          "must be >= 1 with 2 n_neighbors < n_states");
  require(env.beta >= 0.0 && env.beta < 1.0, "env.beta", "must lie in [0, 1)");
  require(env.pi_mode == "uniform" || env.pi_mode == "random", "env.pi_mode", "must be uniform or random");
  require(env.sigma >= 0.0, "env.sigma", "must be >= 0");
  require(env.c_mix >= 1.0, "env.c_mix", "must be >= 1");
  if (!env.theta_star.empty()) {
    require(static_cast<int>(env.theta_star.size()) == env.dim, "env.theta_star", "must have env.dim entries");
    double sq = 0.0;
    for (double x : env.theta_star) sq += x * x;
    require(std::sqrt(sq) <= 1.0 + 1e-12, "env.theta_star", "must have norm <= 1");
  }

  require(bank_size >= 2, "bank.size", "must be >= 2");

  require(known.ucb.lambda > 0.0, "known.lambda", "must be > 0");
  require(known.ucb.alpha >= 0.0, "known.alpha", "must be >= 0");
  require(known.ucb.noise_proxy > 0.0, "known.noise_proxy", "must be > 0");
  require(in_open_unit(known.ucb.delta), "known.delta", "must lie in (0, 1)");
  require(known.ucb.bonus_cap > 0.0, "known.bonus_cap", "must be > 0");
  require(known.c_tau > 0.0, "known.c_tau", "must be > 0");
  require(!known.theory_mode || known.c_tau > 1.0, "known.c_tau", "theory mode requires c_tau > 1");
  require(known.tau_override >= -1, "known.tau", "must be >= 0, or -1 for the default");
  require(known.ucb.bias_level >= 0.0, "known.bias_level", "must be >= 0");

  require(unknown.c_tau > 0.0, "unknown.c_tau", "must be > 0");
  require(unknown.tau_override >= -1, "unknown.tau", "must be >= 0, or -1 for the default");
  require(in_open_unit(unknown.delta), "unknown.delta", "must lie in (0, 1)");
  require(in_open_unit(unknown.delta_pe), "unknown.delta_pe", "must lie in (0, 1)");
  require(unknown.c_mix_bound == 0.0 || unknown.c_mix_bound >= 1.0, "unknown.c_mix_bound", "must be 0 or >= 1");
  require(unknown.beta_bound == 0.0 || in_open_unit(unknown.beta_bound), "unknown.beta_bound",
          "must be 0 or lie in (0, 1)");

  require(baseline.lambda > 0.0, "baseline.lambda", "must be > 0");
  require(baseline.alpha >= 0.0, "baseline.alpha", "must be >= 0");

  for (const auto& a : algos) {
    if (a == "known") {
      const int tau = known.tau_override >= 0 ? known.tau_override : compute_tau(horizon, env.beta, known.c_tau);
      require(horizon > tau, "run.horizon", "must exceed the known-reduction delay tau = " + std::to_string(tau));
    } else if (a == "unknown") {
      const double beta = unknown.beta_bound > 0.0 ? unknown.beta_bound : env.beta;
      const int tau = unknown.tau_override >= 0 ? unknown.tau_override : compute_tau(horizon, beta, unknown.c_tau);
      require(horizon > tau + 1, "run.horizon", "must exceed tau + 1 = " + std::to_string(tau + 1));
    }
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, f] : fields()) out.push_back(k);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  field(key).set(config, key, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return field(key).get(config); }

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::set<std::string> seen;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError(key, "set twice");
    set_config_value(config, key, trim(line.substr(eq + 1)));
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("--set", "expected key=value, got '" + a + "'");
    const std::string key = trim(a.substr(0, eq));
    set_config_value(config, key, trim(a.substr(eq + 1)));
  }
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + "=" + f.get(config) + "\n";
  return out;
}

std::string config_digest(const RunConfig& config) {
  // The output location does not change what is computed.
  RunConfig c = config;
  c.out_dir = RunConfig{}.out_dir;
  Fnv1a h;
  h.add(std::string_view(serialize_config(c)));
  return hex64(h.value());
}

}  // namespace mbl
