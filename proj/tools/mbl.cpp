#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mbl/config.hpp"
#include "mbl/harness.hpp"
#include "mbl/verify_concentration.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kVerifyFailed = 2;

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("MBL_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument("trailing characters");
    return s;
  } catch (const std::exception&) {
    throw mbl::ConfigError("MBL_SEED", std::string("not an unsigned integer: '") + v + "'");
  }
}

struct RunArgs {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool full_trace = false;
  std::vector<std::string> sets;
  int jobs = 0;
  std::string env_path;
};

int cmd_run(const RunArgs& a) {
  mbl::RunConfig config = mbl::load_config(a.config_path);
  mbl::apply_overrides(config, a.sets);
  if (a.seed) {
    config.base_seed = *a.seed;
  } else if (auto s = env_seed()) {
    config.base_seed = *s;
  }
  if (!a.out.empty()) config.out_dir = a.out;
  if (a.full_trace) config.full_trace = true;
  config.validate();

  std::optional<mbl::FiniteMarkovEnv> env;
  if (!a.env_path.empty()) {
    std::ifstream in(a.env_path);
    if (!in) throw mbl::ConfigError("--env", "cannot read '" + a.env_path + "'");
    try {
      env = mbl::env_from_json(nlohmann::json::parse(in));
      env->validate();
    } catch (const std::exception& e) {
      throw mbl::ConfigError("--env", e.what());
    }
  }

  const mbl::ExperimentResult result = mbl::run_experiment(config, a.jobs, std::move(env));
  for (const auto& run : result.runs) {
    std::cout << "run " << run.run_id << " seed " << run.seed;
    for (const auto& t : run.traces) std::cout << " " << t.algo << "=" << t.final_regret();
    std::cout << '\n';
  }
  mbl::write_outputs(result, config.out_dir);
  std::cout << "wrote " << config.out_dir << " (config " << result.summary.config_digest << ")\n";
  return kOk;
}

int cmd_verify(const std::string& suite, int trials, std::uint64_t seed, const std::string& json_path) {
  const auto reports = mbl::run_verify_suite(suite, trials, seed);
  bool ok = true;
  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : reports) {
    std::printf("%-10s %s  violations %ld/%ld  statistic %.6g  bound %.6g  %.2fs  %s\n", r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.violations, r.trials, r.statistic, r.bound, r.runtime_seconds,
                r.detail.c_str());
    ok = ok && r.pass;
    all.push_back(r.to_json());
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write '" + json_path + "'");
    out << all.dump(2) << '\n';
  }
  return ok ? kOk : kVerifyFailed;
}

int cmd_report(const std::string& dir, bool emit_csv) {
  const mbl::Summary s = mbl::load_summary(dir);
  if (emit_csv) {
    std::cout << mbl::summary_csv(s);
    return kOk;
  }
  std::cout << "config " << s.config_digest << ", T = " << s.checkpoints.back() << '\n';
  for (std::size_t a = 0; a < s.algos.size(); ++a) {
    std::printf("%-16s final cumulative regret %.3f +- %.3f", s.algos[a].c_str(), s.mean[a].back(),
                s.stderr_[a].back());
    if (a < s.n_runs.size()) std::printf("  (%d runs)", s.n_runs[a]);
    std::printf("\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markovian contextual linear bandit reductions: experiments and checks"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
  run_cmd->add_option("config", run.config_path, "config file (key=value lines)")->required();
  run_cmd->add_option("--out", run.out, "output directory (overrides run.out_dir)");
  run_cmd->add_option("--seed", run.seed, "base seed (falls back to MBL_SEED, then run.base_seed)");
  run_cmd->add_flag("--full-trace", run.full_trace, "write every round to the CSV");
  run_cmd->add_option("--set", run.sets, "override a config key, key=value (repeatable)");
  run_cmd->add_option("--jobs", run.jobs, "worker threads (default: all cores)");
  run_cmd->add_option("--env", run.env_path, "load the environment from a JSON file instead of building it");

  std::string suite = "all";
  int trials = 0;
  std::uint64_t verify_seed = 1;
  std::string verify_json;
  auto* verify_cmd = app.add_subcommand("verify", "run numerical checks");
  verify_cmd->add_option("--suite", suite, "suite name, or all");
  verify_cmd->add_option("--trials", trials, "Monte-Carlo trials/runs (0: suite default)");
  verify_cmd->add_option("--seed", verify_seed, "seed");
  verify_cmd->add_option("--json", verify_json, "also write the reports as JSON");

  std::string report_dir;
  bool emit_csv = false;
  auto* report_cmd = app.add_subcommand("report", "summarize an output directory");
  report_cmd->add_option("dir", report_dir, "directory written by run")->required();
  report_cmd->add_flag("--emit-csv", emit_csv, "print the summary as CSV (algo,t,mean,stderr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*verify_cmd) {
      if (verify_cmd->count("--seed") == 0) {
        if (auto s = env_seed()) verify_seed = *s;
      }
      return cmd_verify(suite, trials, verify_seed, verify_json);
    }
    if (*report_cmd) return cmd_report(report_dir, emit_csv);
  } catch (const mbl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
