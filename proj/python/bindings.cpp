#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "structrl/bench.hpp"
#include "structrl/dp_oracle.hpp"
#include "structrl/environments.hpp"
#include "structrl/learners.hpp"

namespace py = pybind11;
using namespace structrl;

namespace {

std::vector<int> action_codes(const std::vector<Action>& actions) {
  std::vector<int> out;
  out.reserve(actions.size());
  for (Action a : actions) out.push_back(static_cast<int>(index_of(a)));
  return out;
}

py::dict trace_dict(const RunTrace& t) {
  std::vector<std::size_t> n;
  std::vector<double> cum, exact, empirical, threshold;
  std::vector<std::uint64_t> ops;
  for (const auto& r : t.rows) {
    n.push_back(r.n);
    cum.push_back(r.cum_step);
    exact.push_back(r.sigma_exact);
    empirical.push_back(r.sigma_empirical);
    threshold.push_back(r.threshold);
    ops.push_back(r.ops);
  }
  py::dict d;
  d["n"] = n;
  d["cum_step"] = cum;
  d["sigma_exact"] = exact;
  d["sigma_empirical"] = empirical;
  d["threshold"] = threshold;
  d["ops"] = ops;
  d["failed"] = t.failed;
  d["failure"] = t.failure;
  d["final_greedy"] = action_codes(t.final_greedy);
  d["final_threshold"] = t.final_threshold;
  d["storage"] = t.storage;
  return d;
}

template <typename Fn>
py::tuple run_command(Fn fn, const std::string& config_path, const std::string& out) {
  const CommandResult r = fn(load_config(config_path), out);
  return py::make_tuple(r.exit_code, r.report);
}

}  // namespace

PYBIND11_MODULE(_structrl, m) {
  m.doc() = "Tabular average-reward MDP oracles and learners";

  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::enum_<MixerKind>(m, "Mixer").value("SIGMOID", MixerKind::Sigmoid).value("PIECEWISE_LINEAR", MixerKind::PiecewiseLinear);
  py::enum_<LearnerKind>(m, "Learner")
      .value("SAL", LearnerKind::Sal)
      .value("Q_LEARNING", LearnerKind::QLearning)
      .value("PDS", LearnerKind::Pds);

  py::class_<MdpModel>(m, "Model")
      .def_property_readonly("n_states", &MdpModel::n_states)
      .def("kernel", [](const MdpModel& mdl, int a) { return mdl.kernel(a ? Action::A2 : Action::A1); })
      .def_property_readonly("reward", &MdpModel::reward_table)
      .def("feasible", [](const MdpModel& mdl, std::size_t i, int a) { return mdl.feasible(i, a ? Action::A2 : Action::A1); });

  m.def("birth_death", &build_birth_death_model, py::arg("N"), py::arg("p"), py::arg("r"));
  m.def(
      "koole_queue",
      [](std::size_t capacity, double arrival_rate, double service_rate, double blocking_cost,
         std::optional<std::vector<double>> holding_cost) {
        KooleQueueConfig q = KooleQueueConfig::default_instance(service_rate);
        q.capacity = capacity;
        q.arrival_rate = arrival_rate;
        q.blocking_cost = blocking_cost;
        q.holding_cost = holding_cost ? *holding_cost : KooleQueueConfig::power_holding(capacity, 0.1, 2.0);
        return koole_queue_model(q);
      },
      py::arg("capacity") = 20, py::arg("arrival_rate") = 1.0, py::arg("service_rate") = 1.2,
      py::arg("blocking_cost") = 10.0, py::arg("holding_cost") = py::none());

  m.def(
      "rvia",
      [](const MdpModel& mdl, double tol, std::size_t ref_state) {
        SolverOptions o;
        o.tol = tol;
        o.ref_state = ref_state;
        const RviaResult r = rvia(mdl, o);
        return py::make_tuple(r.table.values, r.table.sigma, action_codes(r.greedy));
      },
      py::arg("model"), py::arg("tol") = 1e-10, py::arg("ref_state") = 0,
      "Returns (relative values, sigma, greedy actions as 0/1).");
  m.def(
      "value_iteration",
      [](const MdpModel& mdl, double tol) {
        SolverOptions o;
        o.tol = tol;
        const ViaResult r = value_iteration(mdl, o);
        return py::make_tuple(r.trace.iterates, r.gain, action_codes(r.greedy));
      },
      py::arg("model"), py::arg("tol") = 1e-10);
  m.def(
      "evaluate_threshold",
      [](const MdpModel& mdl, double T, MixerKind mixer) {
        const ThresholdEvaluation e = evaluate_threshold(mdl, T, mixer);
        return py::make_tuple(e.sigma, e.stationary.probs, e.table.values);
      },
      py::arg("model"), py::arg("T"), py::arg("mixer") = MixerKind::Sigmoid,
      "Returns (sigma, stationary distribution, relative values).");
  m.def(
      "sigma_gradient",
      [](const MdpModel& mdl, double T, MixerKind mixer) { return exact_sigma_gradient(mdl, T, mixer); },
      py::arg("model"), py::arg("T"), py::arg("mixer") = MixerKind::Sigmoid);
  m.def(
      "optimal_threshold",
      [](const MdpModel& mdl) {
        const OptimalThreshold o = brute_force_optimal_threshold(mdl);
        return py::make_tuple(o.threshold, o.sigma);
      },
      py::arg("model"));
  m.def("integer_sweep", &integer_threshold_sweep, py::arg("model"));
  m.def("sigmoid_mix", &sigmoid_mix, py::arg("i"), py::arg("T"));
  m.def("piecewise_linear_mix", &piecewise_linear_mix, py::arg("i"), py::arg("T"));

  m.def(
      "run_learner",
      [](LearnerKind kind, const MdpModel& mdl, std::uint64_t seed, std::size_t iterations,
         std::optional<double> queue_service_rate) {
        EnvSpec spec{std::make_shared<const MdpModel>(mdl), std::nullopt};
        if (queue_service_rate) {
          const KooleQueueConfig q = KooleQueueConfig::default_instance(*queue_service_rate);
          spec.model = std::make_shared<const MdpModel>(koole_queue_model(q));
          spec.events = koole_event_decomposition(q);
        }
        py::gil_scoped_release release;
        RunTrace t = run_learner(kind, spec, LearnerConfig{}, seed, iterations);
        py::gil_scoped_acquire acquire;
        return trace_dict(t);
      },
      py::arg("kind"), py::arg("model"), py::arg("seed"), py::arg("iterations"),
      py::arg("queue_service_rate") = py::none(),
      "Runs a learner with default settings. Pass queue_service_rate to run on the default "
      "queue instance with its event view (required for PDS); model is then ignored.");

  m.def("solve", [](const std::string& c, const std::string& o) { return run_command(cmd_solve, c, o); },
        py::arg("config"), py::arg("out"));
  m.def("sweep", [](const std::string& c, const std::string& o) { return run_command(cmd_sweep, c, o); },
        py::arg("config"), py::arg("out"));
  m.def("bench", [](const std::string& c, const std::string& o) { return run_command(cmd_bench, c, o); },
        py::arg("config"), py::arg("out"));
  m.def("check", [](const std::string& c, const std::string& o) { return run_command(cmd_check, c, o); },
        py::arg("config"), py::arg("out"));
}
