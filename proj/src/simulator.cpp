#include "aoisched/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/core.h>

namespace aoisched {

namespace {

void check_inputs(const NetworkMdp& mdp, std::span<const ActionCode> policy, const State& s0,
                  const SimConfig& config) {
  if (config.horizon < 1) throw SimulationError("horizon must be at least 1 slot");
  if (config.n_episodes < 1) throw SimulationError("need at least one episode");
  if (policy.size() != mdp.num_states()) {
    throw SimulationError(
        fmt::format("policy covers {} states, model has {}", policy.size(), mdp.num_states()));
  }
  if (!mdp.space().contains(s0)) throw SimulationError(fmt::format("initial state {} is invalid", to_string(s0)));
}

// Advances one slot, filling `record`; returns the next state.
State step(const NetworkMdp& mdp, std::span<const ActionCode> policy, const State& s, std::size_t t,
           const SimConfig& config, RngStream& rng, SlotRecord& record) {
  const ActionCode a = policy[mdp.space().index(s)];
  if (a >= mdp.alphabet().size() || !mdp.feasible(s, a)) {
    throw SimulationError(fmt::format("slot {}: policy action {} infeasible in state {}", t, a, to_string(s)));
  }
  record.state = s;
  record.action = a;
  const Action& action = mdp.action(a);
  std::array<int, kDevices> harvest{0, 0};

  if (config.mode == SimMode::Kernel) {
    // Independent per-device draws reproduce the product-form kernel.
    const auto& out = mdp.outage(a);
    for (std::size_t n = 0; n < kDevices; ++n) {
      const double u = rng.uniform();
      record.success[n] = action.level[n] > 0 && u < 1.0 - out.p_out[n];
      if (action.wet && action.level[n] == 0) harvest[n] = mdp.derived().harvest_levels[n];
    }
  } else {
    const auto outcome = mdp.link().sample_slot_outcome(mdp.plan(a), rng, config.harvest, config.order);
    record.success = outcome.success;
    for (std::size_t n = 0; n < kDevices; ++n) {
      if (!(action.wet && action.level[n] == 0)) continue;
      if (config.harvest == HarvestMode::Deterministic) {
        harvest[n] = mdp.derived().harvest_levels[n];
      } else {
        const double levels = std::floor(outcome.harvested[n] / mdp.derived().e_step);
        harvest[n] = static_cast<int>(std::min(levels, mdp.params().battery_levels + 1.0));
      }
    }
  }
  record.harvested = harvest;
  return mdp.next_state(s, a, record.success, harvest);
}

struct EpisodeSummary {
  double ewsaoi = 0.0;
  std::array<double, kDevices> mean_age{0.0, 0.0};
  std::array<std::size_t, 4> scheme_slots{};
};

template <class OnSlot>
EpisodeSummary simulate(const NetworkMdp& mdp, std::span<const ActionCode> policy, const State& s0,
                        const SimConfig& config, RngStream& rng, OnSlot&& on_slot, State* final_state) {
  EpisodeSummary summary;
  State s = s0;
  SlotRecord record;
  const auto& w = mdp.params().weight;
  std::array<double, kDevices> age_sum{0.0, 0.0};
  for (std::size_t t = 0; t < config.horizon; ++t) {
    s = step(mdp, policy, s, t, config, rng, record);
    on_slot(record);
    ++summary.scheme_slots[static_cast<std::size_t>(mdp.action(record.action).scheme())];
    age_sum[0] += s.delta[0];
    age_sum[1] += s.delta[1];
  }
  const double T = static_cast<double>(config.horizon);
  summary.mean_age = {age_sum[0] / T, age_sum[1] / T};
  summary.ewsaoi = w[0] * summary.mean_age[0] + w[1] * summary.mean_age[1];
  if (final_state) *final_state = s;
  return summary;
}

}  // namespace

EpisodeTrace run_episode(const NetworkMdp& mdp, std::span<const ActionCode> policy, const State& s0,
                         const SimConfig& config, RngStream& rng) {
  check_inputs(mdp, policy, s0, config);
  EpisodeTrace trace;
  trace.slots.reserve(config.horizon);
  const auto summary = simulate(
      mdp, policy, s0, config, rng, [&](const SlotRecord& r) { trace.slots.push_back(r); }, &trace.final_state);
  trace.ewsaoi = summary.ewsaoi;
  trace.mean_age = summary.mean_age;
  return trace;
}

MetricReport estimate_ewsaoi(const NetworkMdp& mdp, std::span<const ActionCode> policy, const State& s0,
                             const SimConfig& config) {
  check_inputs(mdp, policy, s0, config);
  const std::size_t n = config.n_episodes;
  std::vector<EpisodeSummary> episodes(n);

  auto run_range = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      RngStream rng(config.base_seed + i);
      episodes[i] = simulate(mdp, policy, s0, config, rng, [](const SlotRecord&) {}, nullptr);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    run_range(0, 1);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) {
      pool.emplace_back([&, k] {
        try {
          run_range(k, threads);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  MetricReport report;
  report.horizon = config.horizon;
  report.episodes = n;
  double sum = 0.0;
  std::array<double, 4> usage{};
  for (const auto& e : episodes) {
    sum += e.ewsaoi;
    for (std::size_t d = 0; d < kDevices; ++d) report.mean_age[d] += e.mean_age[d];
    for (std::size_t k = 0; k < 4; ++k) usage[k] += static_cast<double>(e.scheme_slots[k]);
  }
  const double count = static_cast<double>(n);
  report.mean = sum / count;
  for (auto& a : report.mean_age) a /= count;
  const double total_slots = count * static_cast<double>(config.horizon);
  for (std::size_t k = 0; k < 4; ++k) report.scheme_usage[k] = usage[k] / total_slots;

  if (n > 1) {
    double ss = 0.0;
    for (const auto& e : episodes) ss += (e.ewsaoi - report.mean) * (e.ewsaoi - report.mean);
    const double se = std::sqrt(ss / (count - 1.0) / count);
    report.std_error = se;
    report.ci_low = report.mean - 1.96 * se;
    report.ci_high = report.mean + 1.96 * se;
  }
  return report;
}

std::vector<SweepRow> snr_sweep(const SystemParams& params, std::span<const Preset> presets,
                                std::span<const double> snr_db, const State& s0, const SimConfig& config,
                                const SolverOptions& options, const std::function<void(const SweepRow&)>& progress) {
  std::vector<SweepRow> rows;
  for (const double snr : snr_db) {
    SystemParams p = params;
    p.snr_db = snr;
    for (const Preset preset : presets) {
      const NetworkMdp mdp(p, restrict_actions(preset_schemes(preset)));
      const auto solved = policy_iteration(mdp, p.gamma, p.eps_star, options);
      SweepRow row;
      row.snr_db = snr;
      row.preset = preset;
      row.policy_iterations = solved.log.policy_iterations;
      row.report = estimate_ewsaoi(mdp, solved.policy, s0, config);
      if (progress) progress(row);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace aoisched
