#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mbl/harness.hpp"

using namespace mbl;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.horizon = 3000;
  c.n_runs = 4;
  c.algos = {"known", "unknown", "baseline"};
  c.env.n_states = 6;
  c.env.n_actions = 4;
  c.env.dim = 3;
  c.env.n_neighbors = 1;
  c.bank_size = 16;
  c.bank_include_theta_star = true;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RegretTrace constant_trace(const std::string& algo, long horizon, double value) {
  RegretTrace t;
  t.algo = algo;
  t.inst_regret.assign(horizon, value);
  return t;
}

}  // namespace

TEST(Aggregate, MeanAndStandardError) {
  // cumulative regrets 10 and 14 at t = 2
  const std::vector<RegretTrace> traces{constant_trace("a", 2, 5.0), constant_trace("a", 2, 7.0)};
  const Summary s = aggregate(traces, {1, 2});
  ASSERT_EQ(s.algos, std::vector<std::string>{"a"});
  EXPECT_DOUBLE_EQ(s.mean[0][1], 12.0);
  EXPECT_DOUBLE_EQ(s.stderr_[0][1], 2.0);
  EXPECT_DOUBLE_EQ(s.mean[0][0], 6.0);
}

TEST(Aggregate, SingleTraceHasZeroError) {
  const Summary s = aggregate({constant_trace("a", 5, 1.0)}, {1, 5});
  EXPECT_EQ(s.stderr_[0], (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(s.n_runs, std::vector<int>{1});
}

TEST(Aggregate, RejectsMixedHorizonsAndEmpty) {
  EXPECT_THROW(aggregate({constant_trace("a", 5, 1.0), constant_trace("a", 6, 1.0)}, {1}), std::invalid_argument);
  EXPECT_THROW(aggregate({}, {1}), std::invalid_argument);
}

TEST(Aggregate, SummaryJsonKeys) {
  const Summary s = aggregate({constant_trace("a", 5, 1.0), constant_trace("b", 5, 2.0)}, {1, 5}, "abc");
  const auto j = s.to_json();
  for (const char* k : {"config_digest", "algos", "checkpoints", "mean", "stderr"}) EXPECT_TRUE(j.contains(k)) << k;
  const Summary back = Summary::from_json(j);
  EXPECT_EQ(back.mean, s.mean);
  EXPECT_EQ(back.algos, s.algos);
}

TEST(Checkpoints, LogSpacedDefault) {
  const auto c = log_checkpoints(200000, 50);
  EXPECT_EQ(c.size(), 50u);
  EXPECT_EQ(c.front(), 1);
  EXPECT_EQ(c.back(), 200000);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GT(c[i], c[i - 1]);
  const auto tiny = log_checkpoints(10, 50);
  EXPECT_LE(tiny.size(), 10u);
  EXPECT_EQ(tiny.back(), 10);
}

TEST(Experiment, PairedRunsShareTrajectories) {
  const ExperimentResult r = run_experiment(small_config(), 1);
  ASSERT_EQ(r.runs.size(), 4u);
  for (const auto& run : r.runs) {
    ASSERT_EQ(run.traces.size(), 3u);
    EXPECT_EQ(run.seed, 1u + static_cast<unsigned>(run.run_id));
    for (const auto& t : run.traces) {
      EXPECT_EQ(t.traj_hash, run.traces[0].traj_hash);
      EXPECT_EQ(t.run_id, run.run_id);
    }
    EXPECT_EQ(run.traces[2].algo, "baseline-linucb");
    EXPECT_FALSE(run.unknown_epochs.empty());
  }
  EXPECT_NE(r.runs[0].traces[0].traj_hash, r.runs[1].traces[0].traj_hash);
}

TEST(Experiment, UnpairedRunsUseDistinctTrajectories) {
  RunConfig c = small_config();
  c.paired = false;
  const ExperimentResult r = run_experiment(c, 1);
  EXPECT_NE(r.runs[0].traces[0].traj_hash, r.runs[0].traces[2].traj_hash);
}

TEST(Experiment, JobsDoNotChangeResults) {
  const auto a = run_experiment(small_config(), 1);
  const auto b = run_experiment(small_config(), 3);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    for (std::size_t k = 0; k < a.runs[i].traces.size(); ++k) {
      EXPECT_EQ(a.runs[i].traces[k].inst_regret, b.runs[i].traces[k].inst_regret);
    }
  }
}

TEST(Experiment, OutputsAreByteIdenticalAcrossReruns) {
  const auto dir = std::filesystem::temp_directory_path() / "mbl_harness_test";
  std::filesystem::remove_all(dir);
  write_outputs(run_experiment(small_config(), 2), (dir / "a").string());
  write_outputs(run_experiment(small_config(), 1), (dir / "b").string());
  for (const char* f : {"trace.csv", "summary.json", "env.json", "config.cfg"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  const std::string csv = slurp(dir / "a" / "trace.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "run_id,algo,t,inst_regret,cum_regret,seed,traj_hash");

  const auto rows = read_trace_csv((dir / "a" / "trace.csv").string());
  EXPECT_EQ(rows.size(), 4u * 3u * 3000u);
  double prev = -1.0;
  for (std::size_t i = 0; i < 3000; ++i) {
    EXPECT_GE(rows[i].cum_regret, prev);
    prev = rows[i].cum_regret;
  }
  const Summary s = load_summary((dir / "a").string());
  EXPECT_EQ(s.algos, (std::vector<std::string>{"known", "unknown", "baseline-linucb"}));
  std::filesystem::remove_all(dir);
}

TEST(Experiment, LongHorizonsWriteCheckpointsUnlessFullTrace) {
  RunConfig c = small_config();
  c.horizon = 100000;
  c.n_runs = 1;
  c.algos = {"baseline"};
  c.checkpoints = 20;
  const auto result = run_experiment(c, 1);
  const auto dir = std::filesystem::temp_directory_path() / "mbl_checkpoint_test";
  write_outputs(result, dir.string());
  EXPECT_EQ(read_trace_csv((dir / "trace.csv").string()).size(), result.summary.checkpoints.size());
  ExperimentResult full = result;
  full.config.full_trace = true;
  write_outputs(full, dir.string());
  EXPECT_EQ(read_trace_csv((dir / "trace.csv").string()).size(), 100000u);
  std::filesystem::remove_all(dir);
}

TEST(Experiment, InvalidConfigIsReported) {
  RunConfig c = small_config();
  c.env.beta = 1.5;
  EXPECT_THROW(run_experiment(c, 1), ConfigError);
}
