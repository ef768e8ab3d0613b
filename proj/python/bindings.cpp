#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mbl/config.hpp"
#include "mbl/harness.hpp"
#include "mbl/reduction_known.hpp"
#include "mbl/reduction_unknown.hpp"
#include "mbl/verify_concentration.hpp"

namespace py = pybind11;
using namespace mbl;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

RunConfig config_from(const std::string& text, const std::vector<std::string>& overrides) {
  RunConfig c = parse_config(text);
  apply_overrides(c, overrides);
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_mbl, m) {
  m.doc() = "Markovian contextual linear bandit reductions";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<FiniteMarkovEnv>(m, "Env")
      .def_readonly("n_states", &FiniteMarkovEnv::n_states)
      .def_readonly("n_actions", &FiniteMarkovEnv::n_actions)
      .def_readonly("dim", &FiniteMarkovEnv::dim)
      .def_readonly("kernel", &FiniteMarkovEnv::kernel)
      .def_readonly("stationary", &FiniteMarkovEnv::stationary)
      .def_readonly("beta", &FiniteMarkovEnv::doeblin_beta)
      .def_readonly("c_mix", &FiniteMarkovEnv::c_mix)
      .def_readonly("sigma", &FiniteMarkovEnv::noise_sigma)
      .def_readonly("theta_star", &FiniteMarkovEnv::theta_star)
      .def("actions", [](const FiniteMarkovEnv& e, int s) { return e.actions.at(s); }, py::arg("state"))
      .def("to_json", [](const FiniteMarkovEnv& e) { return env_to_json(e).dump(); });

  m.def(
      "make_env",
      [](int n_states, int n_actions, int dim, double p_loop, int n_neighbors, double beta, const std::string& pi_mode,
         double sigma, std::uint64_t seed) {
        EnvParams p;
        p.n_states = n_states;
        p.n_actions = n_actions;
        p.dim = dim;
        p.p_loop = p_loop;
        p.n_neighbors = n_neighbors;
        p.beta = beta;
        p.pi_mode = pi_mode;
        p.sigma = sigma;
        return make_env(p, seed);
      },
      py::arg("n_states") = 40, py::arg("n_actions") = 20, py::arg("dim") = 20, py::arg("p_loop") = 0.2,
      py::arg("n_neighbors") = 2, py::arg("beta") = 0.75, py::arg("pi_mode") = "uniform", py::arg("sigma") = 0.5,
      py::arg("seed") = 7);
  m.def("env_from_json", [](const std::string& s) { return env_from_json(nlohmann::json::parse(s)); });

  m.def("tv_distance", &tv_distance, py::arg("p"), py::arg("q"));
  m.def("kernel_power_row", &kernel_power_row, py::arg("env"), py::arg("state"), py::arg("t"));
  m.def("compute_tau", &compute_tau, py::arg("horizon"), py::arg("beta"), py::arg("c_tau") = 1.0);
  m.def("bias_level", &bias_level, py::arg("horizon"), py::arg("c_tau"), py::arg("c_mix"));
  m.def("paulin_bound", &paulin_bound, py::arg("horizon"), py::arg("beta"), py::arg("c_mix"), py::arg("delta"));
  m.def(
      "epoch_starts",
      [](long horizon, int tau) {
        const EpochSchedule s = build_schedule(horizon, tau);
        return std::vector<long>(s.starts.begin(), s.starts.end() - 1);
      },
      py::arg("horizon"), py::arg("tau"));
  m.def(
      "epsilon_m",
      [](long t_m, double c_mix, double beta, double delta, int n_epochs, int bank_size, long horizon) {
        return epsilon_m(t_m, MisspecConstants{c_mix, beta, delta, n_epochs, bank_size, horizon});
      },
      py::arg("t_m"), py::arg("c_mix"), py::arg("beta"), py::arg("delta"), py::arg("n_epochs"), py::arg("bank_size"),
      py::arg("horizon"));

  m.def(
      "surrogate",
      [](const FiniteMarkovEnv& env, const Vector& rho, const Vector& theta) { return surrogate_under(env, rho, theta); },
      py::arg("env"), py::arg("rho"), py::arg("theta"), "Expected greedy action under the state distribution rho.");

  m.def(
      "normalize_config",
      [](const std::string& text, const std::vector<std::string>& overrides) {
        const RunConfig c = config_from(text, overrides);
        return py::make_tuple(serialize_config(c), config_digest(c));
      },
      py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
      "Validated canonical config text and its digest.");

  m.def(
      "run_experiment",
      [](const std::string& text, const std::vector<std::string>& overrides, int jobs, const std::string& out) {
        const RunConfig c = config_from(text, overrides);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c, jobs);
          if (!out.empty()) write_outputs(r, out);
        }
        py::dict regret;
        for (std::size_t a = 0; a < c.algos.size(); ++a) {
          py::array_t<double> arr({static_cast<py::ssize_t>(r.runs.size()), static_cast<py::ssize_t>(c.horizon)});
          auto view = arr.mutable_unchecked<2>();
          for (std::size_t i = 0; i < r.runs.size(); ++i) {
            const auto& inst = r.runs[i].traces[a].inst_regret;
            for (long t = 0; t < c.horizon; ++t) view(i, t) = inst[t];
          }
          regret[py::str(algo_label(c.algos[a]))] = arr;
        }
        return py::make_tuple(to_py(r.summary_json()), regret);
      },
      py::arg("config_text"), py::arg("overrides") = std::vector<std::string>{}, py::arg("jobs") = 1,
      py::arg("out") = "",
      "Runs an experiment; returns (summary dict, {algo: runs x T instantaneous regret}).");

  m.def("verify_suites", &verify_suite_names);
  m.def(
      "verify",
      [](const std::string& suite, int trials, std::uint64_t seed) {
        std::vector<VerificationReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_verify_suite(suite, trials, seed);
        }
        py::list out;
        for (const auto& r : reports) out.append(to_py(r.to_json()));
        return out;
      },
      py::arg("suite") = "all", py::arg("trials") = 0, py::arg("seed") = 1);

  m.attr("CSV_HEADER") = kCsvHeader;
}
