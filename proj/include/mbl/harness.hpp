#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbl/config.hpp"
#include "mbl/reduction_unknown.hpp"
#include "mbl/surrogate_map.hpp"
#include "mbl/trace.hpp"

namespace mbl {

inline constexpr const char* kCsvHeader = "run_id,algo,t,inst_regret,cum_regret,seed,traj_hash";

/// Trace label for a config algorithm name ("baseline" -> "baseline-linucb").
std::string algo_label(const std::string& name);

/// Environment, bank and precomputed surrogate data shared read-only by every run.
struct ExperimentSetup {
  FiniteMarkovEnv env;
  ParameterBank bank;
  GreedyTable table;
  SurrogateSet surrogates;
};

/// Builds the environment from env.seed (or takes `env` as given) and the
/// bank from the same seed's bank stream.
ExperimentSetup make_setup(const RunConfig& config, std::optional<FiniteMarkovEnv> env = std::nullopt);

struct RunRecord {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::vector<RegretTrace> traces;  // one per algorithm, in config order
  std::vector<EpochDiagnostics> unknown_epochs;
};

/// One replica: seed = base_seed + run_id. With `paired`, every algorithm
/// consumes the same episode.
RunRecord run_replica(const ExperimentSetup& setup, const RunConfig& config, int run_id);

/// log-spaced rounds in [1, T], deduplicated, always ending at T.
std::vector<long> log_checkpoints(long horizon, int count);

struct Summary {
  std::string config_digest;
  std::vector<std::string> algos;
  std::vector<long> checkpoints;
  std::vector<std::vector<double>> mean;    // [algo][checkpoint]
  std::vector<std::vector<double>> stderr_;  // sample std / sqrt(n); 0 for a single run
  std::vector<int> n_runs;

  nlohmann::json to_json() const;
  static Summary from_json(const nlohmann::json& j);
};

/// Mean and standard error of cumulative regret at each checkpoint, per
/// algorithm label (first-appearance order). Throws std::invalid_argument
/// on an empty set or mixed horizons.
Summary aggregate(const std::vector<RegretTrace>& traces, const std::vector<long>& checkpoints,
                  const std::string& config_digest = "");

struct ExperimentResult {
  RunConfig config;
  ExperimentSetup setup;
  std::vector<RunRecord> runs;  // ordered by run_id
  Summary summary;

  std::vector<RegretTrace> traces() const;
  nlohmann::json summary_json() const;  // summary plus run metadata and diagnostics
};

/// Runs all replicas on `jobs` worker threads (<= 0: hardware concurrency).
/// Output does not depend on `jobs`.
ExperimentResult run_experiment(const RunConfig& config, int jobs = 1,
                                std::optional<FiniteMarkovEnv> env = std::nullopt);

/// Writes trace CSV rows for one trace. Per-round unless `checkpoints` is non-empty.
void write_csv_rows(std::ostream& out, const RegretTrace& trace, const std::vector<long>& checkpoints);

/// trace.csv, summary.json, env.json and config.cfg under `dir`. The CSV is
/// checkpointed when T >= 1e5 and full_trace is off. Throws std::runtime_error on I/O failure.
void write_outputs(const ExperimentResult& result, const std::string& dir);

/// Reads a trace CSV back into per-(run, algo) traces. Only per-round files
/// can be re-read exactly; checkpointed files yield the checkpoint rows.
struct CsvRow {
  int run_id;
  std::string algo;
  long t;
  double inst_regret;
  double cum_regret;
  std::uint64_t seed;
  std::string traj_hash;
};
std::vector<CsvRow> read_trace_csv(const std::string& path);

/// Loads `dir`/summary.json.
Summary load_summary(const std::string& dir);

/// Summary as CSV rows `algo,t,mean,stderr`.
std::string summary_csv(const Summary& summary);

}  // namespace mbl
