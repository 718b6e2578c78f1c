// aoisched: solve, simulate and audit the two-device wireless-powered
// age-of-information scheduling MDP.
//
// Exit codes: 0 success, 1 solver or simulation failure, 2 usage, config or
// file error.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "aoisched/baselines.hpp"
#include "aoisched/config.hpp"
#include "aoisched/io.hpp"
#include "aoisched/mdp.hpp"
#include "aoisched/simulator.hpp"
#include "aoisched/solver.hpp"

namespace fs = std::filesystem;
using namespace aoisched;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
  bool quiet = false;
  std::string command_line;
};

void log(const Globals& g, const std::string& message) {
  if (!g.quiet) std::cerr << message << '\n';
}

SystemParams load_params(const Globals& g, std::optional<double> snr_override) {
  SystemParams params = g.config_path.empty() ? SystemParams{} : load_config_file(g.config_path);
  if (snr_override) {
    params.snr_db = *snr_override;
    params.validate();
  }
  return params;
}

// Empty text means ages 1 and full batteries.
State parse_state(const std::string& text, const SystemParams& params) {
  if (text.empty()) return State{{1, 1}, {params.battery_levels, params.battery_levels}};
  std::array<int, 4> v{};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto comma = text.find(',', pos);
    const bool last = i + 1 == v.size();
    if (last != (comma == std::string::npos)) throw UsageError(fmt::format("--s0 '{}': expected d1,d2,e1,e2", text));
    const std::string token = text.substr(pos, last ? std::string::npos : comma - pos);
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v[i]);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      throw UsageError(fmt::format("--s0 '{}': '{}' is not an integer", text, token));
    }
    pos = comma + 1;
  }
  const State s{{v[0], v[1]}, {v[2], v[3]}};
  if (!StateSpace(params.delta_max, params.battery_levels).contains(s)) {
    throw UsageError(fmt::format("--s0 {} outside the state space (delta in [1,{}], battery in [0,{}])", to_string(s),
                                 params.delta_max, params.battery_levels));
  }
  return s;
}

fs::path ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError(fmt::format("cannot create output directory '{}'", dir));
  return fs::path(dir);
}

RunInfo run_info(const Globals& g, const SystemParams& params) {
  RunInfo info;
  info.command_line = g.command_line;
  info.seed = g.seed;
  info.params = params;
  return info;
}

Policy load_policy(const std::string& path, const NetworkMdp& mdp) {
  Policy policy = read_policy_binary(path);
  if (policy.size() != mdp.num_states()) {
    throw UsageError(fmt::format("policy '{}' has {} states but the configuration defines {}", path, policy.size(),
                                 mdp.num_states()));
  }
  for (const ActionCode a : policy) {
    if (a >= mdp.alphabet().size()) throw UsageError(fmt::format("policy '{}' holds unknown action code {}", path, a));
  }
  return policy;
}

SimMode parse_mode(const std::string& s) { return s == "physical" ? SimMode::Physical : SimMode::Kernel; }
HarvestMode parse_harvest(const std::string& s) {
  return s == "sampled" ? HarvestMode::Sampled : HarvestMode::Deterministic;
}
DecodingOrder parse_order(const std::string& s) {
  return s == "mean-power" ? DecodingOrder::MeanPower : DecodingOrder::Instantaneous;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Freshness-aware scheduling for a two-device wireless-powered IoT network"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  for (int i = 0; i < argc; ++i) g.command_line += (i ? " " : "") + std::string(i ? argv[i] : "aoisched");
  std::uint64_t seed_value = 1;
  app.add_option("--config", g.config_path, "key = value configuration file (defaults when omitted)");
  auto* seed_opt = app.add_option("--seed", seed_value, "Base random seed");
  app.add_option("--out", g.out, "Output file, or output directory for solve");
  app.add_option("--threads", g.threads, "Worker threads for simulation")->check(CLI::Range(1u, 256u));
  app.add_flag("--quiet", g.quiet, "Suppress progress messages");

  const std::vector<std::string> preset_names{"wet-oma", "wet-wetoma", "wet-noma", "wet-oma-noma", "adaptive"};

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the (restricted) MDP by policy iteration");
  std::string solve_preset = "adaptive";
  std::optional<double> solve_snr;
  solve->add_option("--preset", solve_preset, "Scheme preset")->check(CLI::IsMember(preset_names));
  solve->add_option("--snr-db", solve_snr, "Override snr_db from the configuration");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo EWSAoI of a stored policy");
  std::string sim_policy, sim_s0, sim_mode = "kernel", sim_harvest = "deterministic",
                          sim_order = "instantaneous", sim_trace;
  std::size_t sim_horizon = 1000, sim_episodes = 1000;
  std::optional<double> sim_snr;
  simulate->add_option("--policy", sim_policy, "Binary policy file from solve")->required();
  simulate->add_option("--s0", sim_s0, "Initial state d1,d2,e1,e2 (default 1,1,M,M)");
  simulate->add_option("--horizon", sim_horizon, "Slots per episode");
  simulate->add_option("--episodes", sim_episodes, "Number of episodes");
  simulate->add_option("--mode", sim_mode, "kernel or physical")->check(CLI::IsMember({"kernel", "physical"}));
  simulate->add_option("--harvest", sim_harvest, "deterministic or sampled")
      ->check(CLI::IsMember({"deterministic", "sampled"}));
  simulate->add_option("--order", sim_order, "NOMA decoding order in physical mode")
      ->check(CLI::IsMember({"instantaneous", "mean-power"}));
  simulate->add_option("--trace", sim_trace, "Also write the first episode's slot trace here");
  simulate->add_option("--snr-db", sim_snr, "Override snr_db from the configuration");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Solve and simulate presets across SNR values");
  std::vector<std::string> sweep_presets{"adaptive"};
  std::vector<double> sweep_snr{40, 45, 50, 55, 60};
  std::string sweep_s0;
  std::size_t sweep_horizon = 1000, sweep_episodes = 1000;
  sweep->add_option("--presets", sweep_presets, "Comma-separated presets")
      ->delimiter(',')
      ->check(CLI::IsMember(preset_names));
  sweep->add_option("--snr", sweep_snr, "Comma-separated SNR values in dB")->delimiter(',');
  sweep->add_option("--s0", sweep_s0, "Initial state d1,d2,e1,e2 (default 1,1,M,M)");
  sweep->add_option("--horizon", sweep_horizon, "Slots per episode");
  sweep->add_option("--episodes", sweep_episodes, "Episodes per (preset, SNR)");

  // export-policy
  auto* export_policy = app.add_subcommand("export-policy", "Write the policy grid of one battery slice");
  std::string grid_policy;
  int grid_e1 = 0, grid_e2 = 0;
  export_policy->add_option("--policy", grid_policy, "Binary policy file from solve")->required();
  export_policy->add_option("--e1", grid_e1, "Battery level of device 1")->required();
  export_policy->add_option("--e2", grid_e2, "Battery level of device 2")->required();

  // validate-outage
  auto* validate = app.add_subcommand("validate-outage", "Compare analytic outage with fading samples");
  double audit_samples = 1e6;
  std::optional<double> audit_snr;
  validate->add_option("--samples", audit_samples, "Samples per row (at least 1e4)");
  validate->add_option("--snr-db", audit_snr, "Override snr_db from the configuration");

  // export-kernel
  auto* export_kernel = app.add_subcommand("export-kernel", "Dump the transition kernel as CSV");
  std::string kernel_preset = "adaptive";
  std::optional<double> kernel_snr;
  export_kernel->add_option("--preset", kernel_preset, "Scheme preset")->check(CLI::IsMember(preset_names));
  export_kernel->add_option("--snr-db", kernel_snr, "Override snr_db from the configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (*solve) {
      const SystemParams params = load_params(g, solve_snr);
      const Preset preset = parse_preset(solve_preset);
      const fs::path dir = ensure_directory(g.out.empty() ? "out" : g.out);
      const NetworkMdp mdp(params, restrict_actions(preset_schemes(preset)));
      log(g, fmt::format("solving {} states, preset {}, snr {} dB", mdp.num_states(), solve_preset, params.snr_db));
      const auto result = policy_iteration(mdp, params.gamma, params.eps_star);
      log(g, fmt::format("policy stable after {} iterations, {} sweeps, residual {:.3e}",
                         result.log.policy_iterations, result.log.total_sweeps, result.log.final_residual));

      RunInfo info = run_info(g, params);
      info.extra = {{"preset", solve_preset}, {"states", std::to_string(mdp.num_states())}};
      write_policy_binary(dir / "policy.bin", result.policy);
      write_with_metadata(dir / "policy.csv", info, policy_csv(mdp, result.policy));
      write_with_metadata(dir / "value.csv", info, value_csv(mdp, result.value));
      info.extra.emplace_back("policy_iterations", std::to_string(result.log.policy_iterations));
      info.extra.emplace_back("evaluation_sweeps", std::to_string(result.log.total_sweeps));
      info.extra.emplace_back("final_residual", fmt::format("{}", result.log.final_residual));
      write_with_metadata(dir / "solvelog.csv", info, solve_log_csv(result.log));
      log(g, fmt::format("wrote {}/{{policy.bin,policy.csv,value.csv,solvelog.csv}}", dir.string()));
    } else if (*simulate) {
      const SystemParams params = load_params(g, sim_snr);
      const NetworkMdp mdp(params);
      const Policy policy = load_policy(sim_policy, mdp);
      if (sim_horizon < 1 || sim_episodes < 1) throw UsageError("--horizon and --episodes must be at least 1");
      SimConfig config;
      config.horizon = sim_horizon;
      config.n_episodes = sim_episodes;
      config.base_seed = g.seed.value_or(1);
      config.mode = parse_mode(sim_mode);
      config.harvest = parse_harvest(sim_harvest);
      config.order = parse_order(sim_order);
      config.threads = g.threads;
      const State s0 = parse_state(sim_s0, params);
      const auto report = estimate_ewsaoi(mdp, policy, s0, config);

      RunInfo info = run_info(g, params);
      info.seed = config.base_seed;
      info.extra = {{"policy", sim_policy}, {"s0", to_string(s0)}, {"mode", sim_mode}, {"harvest", sim_harvest}};
      const std::string out = g.out.empty() ? "report.csv" : g.out;
      write_with_metadata(out, info, report_csv(report));
      if (!sim_trace.empty()) {
        RngStream rng(config.base_seed);
        const auto trace = run_episode(mdp, policy, s0, config, rng);
        write_with_metadata(sim_trace, info, trace_csv(trace));
      }
      log(g, fmt::format("EWSAoI {:.6f}{} -> {}", report.mean,
                         report.std_error ? fmt::format(" (stderr {:.2e})", *report.std_error) : std::string(), out));
    } else if (*sweep) {
      const SystemParams params = load_params(g, std::nullopt);
      std::vector<double> snrs;
      for (const double s : sweep_snr) {
        if (std::find(snrs.begin(), snrs.end(), s) != snrs.end()) {
          std::cerr << fmt::format("warning: duplicate SNR {} dB ignored\n", s);
          continue;
        }
        snrs.push_back(s);
      }
      std::vector<Preset> presets;
      for (const auto& name : sweep_presets) presets.push_back(parse_preset(name));
      for (const double s : snrs) {
        SystemParams probe = params;
        probe.snr_db = s;
        probe.validate();
      }
      SimConfig config;
      config.horizon = sweep_horizon;
      config.n_episodes = sweep_episodes;
      config.base_seed = g.seed.value_or(1);
      config.threads = g.threads;
      const State s0 = parse_state(sweep_s0, params);
      const auto rows = snr_sweep(params, presets, snrs, s0, config, {}, [&](const SweepRow& row) {
        log(g, fmt::format("snr {} dB  {:<13} EWSAoI {:.6f}", row.snr_db, preset_name(row.preset), row.report.mean));
      });
      RunInfo info = run_info(g, params);
      info.seed = config.base_seed;
      info.extra = {{"s0", to_string(s0)},
                    {"horizon", std::to_string(sweep_horizon)},
                    {"episodes", std::to_string(sweep_episodes)}};
      write_with_metadata(g.out.empty() ? "sweep.csv" : g.out, info, sweep_csv(rows));
    } else if (*export_policy) {
      const SystemParams params = load_params(g, std::nullopt);
      const NetworkMdp mdp(params);
      const Policy policy = load_policy(grid_policy, mdp);
      const int m = params.battery_levels;
      if (grid_e1 < 0 || grid_e1 > m || grid_e2 < 0 || grid_e2 > m) {
        throw UsageError(fmt::format("battery slice ({},{}) outside [0, {}]", grid_e1, grid_e2, m));
      }
      const auto grid = policy_grid(mdp, policy, grid_e1, grid_e2);
      RunInfo info = run_info(g, params);
      info.extra = {{"policy", grid_policy},
                    {"slice", fmt::format("e1={} e2={}", grid_e1, grid_e2)},
                    {"legend", "1 WET+OMA, 2 OMA, 3 WET, 4 NOMA; actions column lists action codes"}};
      write_with_metadata(g.out.empty() ? "policy_grid.csv" : g.out, info, policy_grid_csv(grid));
    } else if (*validate) {
      const SystemParams params = load_params(g, audit_snr);
      if (!(audit_samples >= 1e4)) throw UsageError("--samples must be at least 1e4");
      const std::uint64_t seed = g.seed.value_or(1);
      const LinkModel link(params);
      const auto rows = outage_audit(link, static_cast<std::uint64_t>(audit_samples), seed);
      RunInfo info = run_info(g, params);
      info.seed = seed;
      info.extra = {{"samples", fmt::format("{}", static_cast<std::uint64_t>(audit_samples))}};
      write_with_metadata(g.out.empty() ? "outage.csv" : g.out, info, outage_audit_csv(rows));
      const auto failed = std::count_if(rows.begin(), rows.end(), [](const OutageCheck& r) { return !r.pass; });
      log(g, fmt::format("{} rows, {} outside 4 standard errors", rows.size(), failed));
    } else if (*export_kernel) {
      const SystemParams params = load_params(g, kernel_snr);
      const NetworkMdp mdp(params, restrict_actions(preset_schemes(parse_preset(kernel_preset))));
      RunInfo info = run_info(g, params);
      info.extra = {{"preset", kernel_preset}};
      write_with_metadata(g.out.empty() ? "kernel.csv" : g.out, info, kernel_csv(mdp));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
