#include "mbl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mbl/baselines.hpp"
#include "mbl/reduction_known.hpp"

namespace mbl {

namespace {

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::uint64_t unpaired_seed(std::uint64_t seed, std::size_t algo_index) {
  return splitmix64(seed ^ (0xA5A5A5A5ULL * (algo_index + 1)));
}

}  // namespace

std::string algo_label(const std::string& name) { return name == "baseline" ? "baseline-linucb" : name; }

ExperimentSetup make_setup(const RunConfig& config, std::optional<FiniteMarkovEnv> env) {
  ExperimentSetup s;
  s.env = env ? std::move(*env) : make_env(config.env, config.env_seed);
  s.env.validate();
  Rng bank_rng(config.env_seed, Stream::kBank);
  s.bank = make_bank(config.bank_size, s.env.dim, config.bank_include_theta_star, s.env.theta_star, bank_rng);
  s.table = GreedyTable(s.env, s.bank);
  s.surrogates = exact_surrogate(s.env, s.table);
  return s;
}

RunRecord run_replica(const ExperimentSetup& setup, const RunConfig& config, int run_id) {
  RunRecord rec;
  rec.run_id = run_id;
  rec.seed = config.base_seed + static_cast<std::uint64_t>(run_id);
  std::optional<Episode> shared;
  if (config.paired) shared = simulate_episode(setup.env, config.horizon, rec.seed);
  for (std::size_t a = 0; a < config.algos.size(); ++a) {
    const Episode episode =
        shared ? *shared : simulate_episode(setup.env, config.horizon, unpaired_seed(rec.seed, a));
    const std::string& name = config.algos[a];
    RegretTrace trace;
    if (name == "known") {
      trace = run_known(setup.env, setup.bank, setup.table, setup.surrogates, episode, config.known, rec.seed).trace;
    } else if (name == "unknown") {
      UnknownRunResult r = run_unknown(setup.env, setup.bank, setup.table, episode, config.unknown, rec.seed);
      rec.unknown_epochs = std::move(r.epochs);
      trace = std::move(r.trace);
    } else {
      trace = run_baseline(setup.env, episode, config.baseline);
    }
    trace.run_id = run_id;
    trace.seed = rec.seed;
    rec.traces.push_back(std::move(trace));
  }
  return rec;
}

std::vector<long> log_checkpoints(long horizon, int count) {
  if (horizon < 1 || count < 1) throw std::invalid_argument("log_checkpoints: horizon and count must be >= 1");
  std::vector<long> out;
  const double top = std::log(static_cast<double>(horizon));
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 1.0 : static_cast<double>(k) / (count - 1);
    long t = std::lround(std::exp(frac * top));
    if (!out.empty()) t = std::max(t, out.back() + 1);
    if (t > horizon) break;
    out.push_back(std::max(t, 1L));
  }
  if (out.back() != horizon) out.push_back(horizon);
  return out;
}

nlohmann::json Summary::to_json() const {
  return {{"config_digest", config_digest}, {"algos", algos}, {"checkpoints", checkpoints},
          {"mean", mean},                   {"stderr", stderr_}, {"n_runs", n_runs}};
}

Summary Summary::from_json(const nlohmann::json& j) {
  Summary s;
  for (const char* key : {"config_digest", "algos", "checkpoints", "mean", "stderr"}) {
    if (!j.contains(key)) throw std::runtime_error(std::string("summary: missing key '") + key + "'");
  }
  s.config_digest = j.at("config_digest").get<std::string>();
  s.algos = j.at("algos").get<std::vector<std::string>>();
  s.checkpoints = j.at("checkpoints").get<std::vector<long>>();
  s.mean = j.at("mean").get<std::vector<std::vector<double>>>();
  s.stderr_ = j.at("stderr").get<std::vector<std::vector<double>>>();
  if (j.contains("n_runs")) s.n_runs = j.at("n_runs").get<std::vector<int>>();
  if (s.mean.size() != s.algos.size() || s.stderr_.size() != s.algos.size()) {
    throw std::runtime_error("summary: mean/stderr do not match algos");
  }
  return s;
}

Summary aggregate(const std::vector<RegretTrace>& traces, const std::vector<long>& checkpoints,
                  const std::string& config_digest) {
  if (traces.empty()) throw std::invalid_argument("aggregate: no traces");
  const long horizon = traces.front().horizon();
  for (const auto& t : traces) {
    if (t.horizon() != horizon) throw std::invalid_argument("aggregate: traces have mixed horizons");
  }
  for (long c : checkpoints) {
    if (c < 1 || c > horizon) throw std::invalid_argument("aggregate: checkpoint outside [1, T]");
  }
  Summary s;
  s.config_digest = config_digest;
  s.checkpoints = checkpoints;
  std::vector<std::vector<std::vector<double>>> values;  // [algo][run][checkpoint]
  for (const auto& t : traces) {
    auto it = std::find(s.algos.begin(), s.algos.end(), t.algo);
    if (it == s.algos.end()) {
      s.algos.push_back(t.algo);
      values.emplace_back();
      it = s.algos.end() - 1;
    }
    std::vector<double> row;
    row.reserve(checkpoints.size());
    double cum = 0.0;
    std::size_t k = 0;
    for (long r = 0; r < horizon && k < checkpoints.size(); ++r) {
      cum += t.inst_regret[r];
      while (k < checkpoints.size() && checkpoints[k] == r + 1) {
        row.push_back(cum);
        ++k;
      }
    }
    values[it - s.algos.begin()].push_back(std::move(row));
  }
  for (const auto& runs : values) {
    const double n = static_cast<double>(runs.size());
    std::vector<double> mean(checkpoints.size(), 0.0);
    std::vector<double> se(checkpoints.size(), 0.0);
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
      for (const auto& r : runs) mean[k] += r[k];
      mean[k] /= n;
      if (runs.size() > 1) {
        double ss = 0.0;
        for (const auto& r : runs) ss += (r[k] - mean[k]) * (r[k] - mean[k]);
        se[k] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
    }
    s.mean.push_back(std::move(mean));
    s.stderr_.push_back(std::move(se));
    s.n_runs.push_back(static_cast<int>(runs.size()));
  }
  return s;
}

std::vector<RegretTrace> ExperimentResult::traces() const {
  std::vector<RegretTrace> out;
  for (const auto& r : runs) out.insert(out.end(), r.traces.begin(), r.traces.end());
  return out;
}

nlohmann::json ExperimentResult::summary_json() const {
  nlohmann::json j = summary.to_json();
  j["horizon"] = config.horizon;
  j["base_seed"] = config.base_seed;
  nlohmann::json final_regret = nlohmann::json::object();
  for (std::size_t a = 0; a < summary.algos.size(); ++a) {
    final_regret[summary.algos[a]] = {{"mean", summary.mean[a].back()}, {"stderr", summary.stderr_[a].back()}};
  }
  j["final"] = final_regret;
  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto& r : runs) {
    nlohmann::json entry = {{"run_id", r.run_id}, {"seed", r.seed}};
    for (const auto& t : r.traces) entry["final_regret"][t.algo] = t.final_regret();
    if (!r.traces.empty()) entry["traj_hash"] = hex64(r.traces.front().traj_hash);
    if (!r.unknown_epochs.empty()) {
      nlohmann::json epochs = nlohmann::json::array();
      for (const auto& e : r.unknown_epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"start", e.start},
                          {"end", e.end},
                          {"epsilon", e.epsilon},
                          {"max_misspec", e.max_misspec},
                          {"pairs_fed", e.pairs_fed},
                          {"active_arms_end", e.active_arms_end},
                          {"phases_completed", e.phases_completed}});
      }
      entry["unknown_epochs"] = std::move(epochs);
    }
    runs_json.push_back(std::move(entry));
  }
  j["runs"] = std::move(runs_json);
  return j;
}

ExperimentResult run_experiment(const RunConfig& config, int jobs, std::optional<FiniteMarkovEnv> env) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  result.setup = make_setup(config, std::move(env));
  result.runs.resize(config.n_runs);

  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, config.n_runs);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < config.n_runs; i = next++) {
      try {
        result.runs[i] = run_replica(result.setup, config, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.summary = aggregate(result.traces(), log_checkpoints(config.horizon, config.checkpoints),
                             config_digest(config));
  return result;
}

void write_csv_rows(std::ostream& out, const RegretTrace& trace, const std::vector<long>& checkpoints) {
  const std::string tail = "," + std::to_string(trace.seed) + "," + hex64(trace.traj_hash) + "\n";
  const std::string head = std::to_string(trace.run_id) + "," + trace.algo + ",";
  double cum = 0.0;
  std::size_t k = 0;
  for (long r = 0; r < trace.horizon(); ++r) {
    cum += trace.inst_regret[r];
    if (!checkpoints.empty()) {
      if (k >= checkpoints.size() || checkpoints[k] != r + 1) continue;
      ++k;
    }
    out << head << (r + 1) << ',' << fmt(trace.inst_regret[r]) << ',' << fmt(cum) << tail;
  }
}

void write_outputs(const ExperimentResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  auto open = [&dir](const std::string& name) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + (fs::path(dir) / name).string() + "'");
    return f;
  };

  const bool checkpointed = result.config.horizon >= 100000 && !result.config.full_trace;
  {
    auto f = open("trace.csv");
    f << kCsvHeader << '\n';
    for (const auto& run : result.runs) {
      for (const auto& t : run.traces) write_csv_rows(f, t, checkpointed ? result.summary.checkpoints : std::vector<long>{});
    }
    if (!f) throw std::runtime_error("failed writing trace.csv");
  }
  {
    auto f = open("summary.json");
    f << result.summary_json().dump(2) << '\n';
  }
  {
    auto f = open("env.json");
    nlohmann::json j = env_to_json(result.setup.env);
    j["bank"] = bank_to_json(result.setup.bank);
    f << j.dump(2) << '\n';
  }
  {
    auto f = open("config.cfg");
    f << serialize_config(result.config);
  }
}

std::vector<CsvRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != kCsvHeader) throw std::runtime_error("unexpected CSV header in '" + path + "'");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[7];
    for (auto& x : f) std::getline(ss, x, ',');
    rows.push_back({std::stoi(f[0]), f[1], std::stol(f[2]), std::stod(f[3]), std::stod(f[4]),
                    std::stoull(f[5]), f[6]});
  }
  return rows;
}

Summary load_summary(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "summary.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed '" + path.string() + "': " + e.what());
  }
  return Summary::from_json(j);
}

std::string summary_csv(const Summary& s) {
  std::string out = "algo,t,mean,stderr\n";
  for (std::size_t a = 0; a < s.algos.size(); ++a) {
    for (std::size_t k = 0; k < s.checkpoints.size(); ++k) {
      out += s.algos[a] + "," + std::to_string(s.checkpoints[k]) + "," + fmt(s.mean[a][k]) + "," +
             fmt(s.stderr_[a][k]) + "\n";
    }
  }
  return out;
}

}  // namespace mbl
