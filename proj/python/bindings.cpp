#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aoisched/baselines.hpp"
#include "aoisched/config.hpp"
#include "aoisched/io.hpp"
#include "aoisched/link.hpp"
#include "aoisched/mdp.hpp"
#include "aoisched/simulator.hpp"
#include "aoisched/solver.hpp"

namespace py = pybind11;
using namespace aoisched;

namespace {

py::array_t<std::uint8_t> to_array(const Policy& policy) {
  py::array_t<std::uint8_t> out(static_cast<py::ssize_t>(policy.size()));
  std::copy(policy.begin(), policy.end(), out.mutable_data());
  return out;
}

Policy from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw py::value_error("policy must be a 1-D array of action codes");
  return Policy(a.data(), a.data() + a.size());
}

State make_state(const std::array<int, 4>& s) { return State{{s[0], s[1]}, {s[2], s[3]}}; }
using StateTuple = std::tuple<int, int, int, int>;
StateTuple state_tuple(const State& s) { return {s.delta[0], s.delta[1], s.energy[0], s.energy[1]}; }

struct Solution {
  Policy policy;
  ValueFunction value;
  SolveLog log;
  std::string preset;
};

Solution solve(const SystemParams& params, const std::string& preset) {
  const Preset p = parse_preset(preset);
  Solution s;
  {
    py::gil_scoped_release release;
    auto r = solve_restricted(params, preset_schemes(p));
    s.policy = std::move(r.policy);
    s.value = std::move(r.value);
    s.log = std::move(r.log);
  }
  s.preset = std::string(preset_name(p));
  return s;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["mean"] = r.mean;
  d["stderr"] = r.std_error ? py::cast(*r.std_error) : py::none();
  d["ci95"] = r.ci_low ? py::cast(std::make_pair(*r.ci_low, *r.ci_high)) : py::none();
  d["mean_age"] = r.mean_age;
  py::dict usage;
  for (const Scheme s : {Scheme::Wet, Scheme::Oma, Scheme::Noma, Scheme::WetOma}) {
    usage[py::str(std::string(scheme_name(s)))] = r.scheme_usage[static_cast<std::size_t>(s)];
  }
  d["scheme_usage"] = usage;
  d["horizon"] = r.horizon;
  d["episodes"] = r.episodes;
  return d;
}

SimConfig sim_config(std::size_t horizon, std::size_t episodes, std::uint64_t seed, const std::string& mode,
                     const std::string& harvest, unsigned threads) {
  SimConfig c;
  c.horizon = horizon;
  c.n_episodes = episodes;
  c.base_seed = seed;
  c.threads = threads;
  if (mode == "kernel") c.mode = SimMode::Kernel;
  else if (mode == "physical") c.mode = SimMode::Physical;
  else throw py::value_error("mode must be 'kernel' or 'physical'");
  if (harvest == "deterministic") c.harvest = HarvestMode::Deterministic;
  else if (harvest == "sampled") c.harvest = HarvestMode::Sampled;
  else throw py::value_error("harvest must be 'deterministic' or 'sampled'");
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Age-of-information scheduling for a two-device wireless-powered uplink";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<SimulationError>(m, "SimulationError", base.ptr());

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("p_hap_watts", &SystemParams::p_hap_watts)
      .def_readwrite("p_s_max_watts", &SystemParams::p_s_max_watts)
      .def_readwrite("power_levels", &SystemParams::power_levels)
      .def_readwrite("battery_levels", &SystemParams::battery_levels)
      .def_readwrite("e_max_joules", &SystemParams::e_max_joules)
      .def_readwrite("r_bar", &SystemParams::r_bar)
      .def_readwrite("tau_s", &SystemParams::tau_s)
      .def_readwrite("eta", &SystemParams::eta)
      .def_readwrite("lambda0", &SystemParams::lambda0)
      .def_readwrite("lambda_", &SystemParams::lambda)
      .def_readwrite("weight", &SystemParams::weight)
      .def_readwrite("delta_max", &SystemParams::delta_max)
      .def_readwrite("snr_db", &SystemParams::snr_db)
      .def_readwrite("gamma", &SystemParams::gamma)
      .def_readwrite("eps_star", &SystemParams::eps_star)
      .def("validate", &SystemParams::validate)
      .def("to_config_text", [](const SystemParams& p) { return to_config_text(p); })
      .def("num_states", [](const SystemParams& p) { return StateSpace(p.delta_max, p.battery_levels).size(); })
      .def(py::self == py::self)
      .def("__repr__", [](const SystemParams& p) {
        std::string out = "SystemParams(";
        bool first = true;
        for (const auto& [k, v] : config_entries(p)) {
          out += (first ? "" : ", ") + k + "=" + v;
          first = false;
        }
        return out + ")";
      });

  m.def("load_config", &load_config, py::arg("text"), py::arg("use_defaults") = true,
        "Parse a `key = value` document into SystemParams.");
  m.def("derive", [](const SystemParams& p) {
    const DerivedParams d = derive(p);
    py::dict out;
    out["beta"] = d.beta;
    out["sigma2"] = d.sigma2;
    out["p_step"] = d.p_step;
    out["e_step"] = d.e_step;
    out["cost_levels"] = d.cost_levels;
    out["harvest_levels"] = d.harvest_levels;
    return out;
  });

  py::class_<LinkModel>(m, "LinkModel")
      .def(py::init<const SystemParams&>())
      .def("outage_oma", &LinkModel::outage_oma, py::arg("device"), py::arg("power"))
      .def("outage_wet_oma", &LinkModel::outage_wet_oma, py::arg("device"), py::arg("power"))
      .def("outage_noma", [](const LinkModel& l, double p1, double p2) { return l.outage_noma(p1, p2).p_out; })
      .def("mean_harvest", &LinkModel::mean_harvest, py::arg("device"))
      .def(
          "mc_outage",
          [](const LinkModel& l, bool wet, double p1, double p2, std::uint64_t n, std::uint64_t seed) {
            McEstimate e;
            {
              py::gil_scoped_release release;
              e = l.mc_outage_estimate(SlotPlan{wet, {p1, p2}}, n, seed);
            }
            return py::make_tuple(e.outage, e.std_error);
          },
          py::arg("wet"), py::arg("p1"), py::arg("p2"), py::arg("samples") = 1'000'000, py::arg("seed") = 1,
          "Sampled outage (mean-power decoding order) and its standard errors.");

  py::class_<NetworkMdp>(m, "Model")
      .def(py::init([](const SystemParams& p, const std::string& preset) {
             return std::make_unique<NetworkMdp>(p, restrict_actions(preset_schemes(parse_preset(preset))));
           }),
           py::arg("params"), py::arg("preset") = "adaptive")
      .def_property_readonly("num_states", &NetworkMdp::num_states)
      .def("index", [](const NetworkMdp& mdp, const std::array<int, 4>& s) { return mdp.space().index(make_state(s)); })
      .def("state", [](const NetworkMdp& mdp, StateIndex i) { return state_tuple(mdp.space().state(i)); })
      .def("action_label",
           [](const NetworkMdp& mdp, ActionCode a) { return mdp.action(a).label(mdp.params().power_levels); })
      .def("feasible_actions",
           [](const NetworkMdp& mdp, const std::array<int, 4>& s) { return mdp.feasible_actions(make_state(s)); })
      .def("transitions", [](const NetworkMdp& mdp, const std::array<int, 4>& s, ActionCode a) {
        std::vector<std::pair<StateTuple, double>> out;
        for (const auto& [next, p] : mdp.transitions(make_state(s), a)) out.emplace_back(state_tuple(next), p);
        return out;
      });

  py::class_<Solution>(m, "Solution")
      .def_property_readonly("policy", [](const Solution& s) { return to_array(s.policy); })
      .def_property_readonly("value",
                             [](const Solution& s) {
                               py::array_t<double> v(static_cast<py::ssize_t>(s.value.size()));
                               std::copy(s.value.begin(), s.value.end(), v.mutable_data());
                               return v;
                             })
      .def_readonly("preset", &Solution::preset)
      .def_property_readonly("iterations", [](const Solution& s) { return s.log.policy_iterations; })
      .def_property_readonly("sweeps", [](const Solution& s) { return s.log.total_sweeps; })
      .def_property_readonly("residual", [](const Solution& s) { return s.log.final_residual; })
      .def_property_readonly("log", [](const Solution& s) {
        std::vector<std::tuple<std::string, std::size_t, double, std::size_t>> rows;
        for (const auto& e : s.log.entries) {
          rows.emplace_back(std::string(phase_name(e.phase)), e.iteration, e.residual, e.policy_changes);
        }
        return rows;
      });

  m.def("solve", &solve, py::arg("params"), py::arg("preset") = "adaptive",
        "Optimal policy of the (scheme-restricted) MDP by policy iteration.");

  m.def(
      "simulate",
      [](const SystemParams& params, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& policy,
         const std::optional<std::array<int, 4>>& s0, std::size_t horizon, std::size_t episodes, std::uint64_t seed,
         const std::string& mode, const std::string& harvest, unsigned threads) {
        const Policy pol = from_array(policy);
        const NetworkMdp mdp(params);
        if (pol.size() != mdp.num_states()) throw py::value_error("policy length does not match the state space");
        const State start =
            s0 ? make_state(*s0) : State{{1, 1}, {params.battery_levels, params.battery_levels}};
        const SimConfig config = sim_config(horizon, episodes, seed, mode, harvest, threads);
        MetricReport r;
        {
          py::gil_scoped_release release;
          r = estimate_ewsaoi(mdp, pol, start, config);
        }
        return report_dict(r);
      },
      py::arg("params"), py::arg("policy"), py::arg("s0") = py::none(), py::arg("horizon") = 1000,
      py::arg("episodes") = 1000, py::arg("seed") = 1, py::arg("mode") = "kernel",
      py::arg("harvest") = "deterministic", py::arg("threads") = 1,
      "Monte Carlo EWSAoI of a policy; s0 defaults to ages 1 and full batteries.");

  m.def(
      "policy_grid",
      [](const SystemParams& params, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& policy,
         int e1, int e2) {
        const NetworkMdp mdp(params);
        const PolicyGrid g = policy_grid(mdp, from_array(policy), e1, e2);
        const auto n = static_cast<py::ssize_t>(g.delta_max);
        py::array_t<int> codes({n, n});
        py::array_t<std::uint8_t> actions({n, n});
        std::copy(g.scheme_code.begin(), g.scheme_code.end(), codes.mutable_data());
        std::copy(g.action.begin(), g.action.end(), actions.mutable_data());
        return py::make_tuple(codes, actions);
      },
      py::arg("params"), py::arg("policy"), py::arg("e1"), py::arg("e2"),
      "Scheme codes (1 WET+OMA, 2 OMA, 3 WET, 4 NOMA) and action codes over (delta1-1, delta2-1).");

  m.def("encode_policy", [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& policy) {
    return py::bytes(encode_policy(from_array(policy)));
  });
  m.def("decode_policy", [](const py::bytes& data) { return to_array(decode_policy(std::string(data))); });

  m.attr("__version__") = AOISCHED_VERSION;
}
