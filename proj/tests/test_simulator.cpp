#include <doctest.h>

#include "aoisched/simulator.hpp"

using namespace aoisched;

namespace {
const NetworkMdp& default_mdp() {
  static const NetworkMdp mdp{SystemParams{}};
  return mdp;
}

Policy wet_everywhere(const NetworkMdp& mdp) { return Policy(mdp.num_states(), 0); }

SystemParams small_network(double snr = 50.0) {
  SystemParams p;
  p.delta_max = 8;
  p.battery_levels = 10;
  p.e_max_joules = 0.01;
  p.snr_db = snr;
  return p;
}

// Brute-force ramp: WET forever, both ages climb from 1 and clamp.
double ramp_average(int horizon, int delta_max) {
  int d = 1;
  double total = 0.0;
  for (int t = 0; t < horizon; ++t) {
    d = std::min(d + 1, delta_max);
    total += d;  // W1 d + W2 d with W = (0.5, 0.5)
  }
  return total / horizon;
}
}  // namespace

TEST_CASE("WET-only trajectory") {
  const auto& mdp = default_mdp();
  const Policy policy = wet_everywhere(mdp);
  SimConfig config;
  config.horizon = 3;
  RngStream rng(1);
  const EpisodeTrace trace = run_episode(mdp, policy, State{{1, 1}, {0, 0}}, config, rng);
  REQUIRE(trace.slots.size() == 3);
  CHECK(trace.slots[0].state == State{{1, 1}, {0, 0}});
  CHECK(trace.slots[1].state.delta == std::array<int, 2>{2, 2});
  CHECK(trace.slots[2].state.delta == std::array<int, 2>{3, 3});
  CHECK(trace.final_state == State{{4, 4}, {20, 20}});
  CHECK(trace.slots[0].harvested == std::array<int, 2>{20, 10});
  CHECK(trace.ewsaoi == doctest::Approx(3.0));
}

TEST_CASE("WET-only ramp average") {
  // tests/oracle/oracle.py: (2 + ... + 30 + 30 * 31) / 60 = 1394 / 60
  CHECK(ramp_average(60, 30) == doctest::Approx(1394.0 / 60.0).epsilon(1e-15));
  const auto& mdp = default_mdp();
  SimConfig config;
  config.horizon = 60;
  config.n_episodes = 3;
  const MetricReport r = estimate_ewsaoi(mdp, wet_everywhere(mdp), State{{1, 1}, {20, 20}}, config);
  CHECK(r.mean == doctest::Approx(1394.0 / 60.0).epsilon(1e-12));
  CHECK(*r.std_error == 0.0);
  CHECK(r.scheme_usage[static_cast<int>(Scheme::Wet)] == 1.0);

  config.horizon = 5000;
  config.n_episodes = 1;
  const MetricReport longer = estimate_ewsaoi(mdp, wet_everywhere(mdp), State{{1, 1}, {0, 0}}, config);
  CHECK(longer.mean > 29.9);
  CHECK(longer.mean <= 30.0);
}

TEST_CASE("configuration errors") {
  const auto& mdp = default_mdp();
  const Policy policy = wet_everywhere(mdp);
  SimConfig config;
  config.horizon = 0;
  RngStream rng(1);
  CHECK_THROWS_AS(run_episode(mdp, policy, State{{1, 1}, {0, 0}}, config, rng), SimulationError);
  config.horizon = 10;
  CHECK_THROWS_AS(run_episode(mdp, policy, State{{0, 1}, {0, 0}}, config, rng), SimulationError);
  config.n_episodes = 0;
  CHECK_THROWS_AS(estimate_ewsaoi(mdp, policy, State{{1, 1}, {0, 0}}, config), SimulationError);

  Policy greedy(mdp.num_states(), 1);  // device 1 always transmits at full power
  config.n_episodes = 1;
  try {
    run_episode(mdp, greedy, State{{1, 1}, {20, 20}}, config, rng);
    FAIL("expected SimulationError");
  } catch (const SimulationError& e) {
    CHECK(std::string(e.what()).find("slot 2") != std::string::npos);
  }
}

TEST_CASE("single episode has no spread") {
  const auto& mdp = default_mdp();
  SimConfig config;
  config.horizon = 50;
  config.n_episodes = 1;
  const MetricReport r = estimate_ewsaoi(mdp, wet_everywhere(mdp), State{{1, 1}, {0, 0}}, config);
  CHECK_FALSE(r.std_error.has_value());
  CHECK_FALSE(r.ci_low.has_value());
  CHECK_FALSE(r.ci_high.has_value());
}

TEST_CASE("optimal policy: trace laws, determinism and thread invariance") {
  const SystemParams p = small_network(60.0);
  const NetworkMdp mdp(p);
  const auto solved = policy_iteration(mdp, p.gamma, p.eps_star);
  const State s0{{1, 1}, {10, 10}};

  for (SimMode mode : {SimMode::Kernel, SimMode::Physical}) {
    for (HarvestMode harvest : {HarvestMode::Deterministic, HarvestMode::Sampled}) {
      SimConfig config;
      config.horizon = 2000;
      config.mode = mode;
      config.harvest = harvest;
      RngStream a(9), b(9);
      const EpisodeTrace t1 = run_episode(mdp, solved.policy, s0, config, a);
      const EpisodeTrace t2 = run_episode(mdp, solved.policy, s0, config, b);
      REQUIRE(t1.slots.size() == t2.slots.size());
      for (std::size_t t = 0; t < t1.slots.size(); ++t) {
        const auto& r = t1.slots[t];
        CHECK(r.state == t2.slots[t].state);
        CHECK(mdp.feasible(r.state, r.action));
        const State& next = t + 1 < t1.slots.size() ? t1.slots[t + 1].state : t1.final_state;
        const Action& act = mdp.action(r.action);
        for (int n = 0; n < 2; ++n) {
          if (!act.transmits(n)) CHECK_FALSE(r.success[n]);
          CHECK(next.delta[n] == (r.success[n] ? 1 : std::min(r.state.delta[n] + 1, p.delta_max)));
          CHECK(next.energy[n] >= 0);
          CHECK(next.energy[n] <= p.battery_levels);
        }
        CHECK(next == mdp.next_state(r.state, r.action, r.success, r.harvested));
      }
    }
  }

  SimConfig config;
  config.horizon = 300;
  config.n_episodes = 40;
  const MetricReport one = estimate_ewsaoi(mdp, solved.policy, s0, config);
  config.threads = 4;
  const MetricReport four = estimate_ewsaoi(mdp, solved.policy, s0, config);
  CHECK(one.mean == four.mean);
  CHECK(*one.std_error == *four.std_error);
  CHECK(one.mean >= 1.0);
  CHECK(one.mean <= p.delta_max);
  CHECK(*one.ci_low == doctest::Approx(one.mean - 1.96 * *one.std_error));

  const MetricReport wet = estimate_ewsaoi(mdp, wet_everywhere(mdp), s0, config);
  CHECK(one.mean < wet.mean);
}

TEST_CASE("episode seeds are independent of the episode count") {
  const SystemParams p = small_network(50.0);
  const NetworkMdp mdp(p);
  const auto solved = policy_iteration(mdp, p.gamma, p.eps_star);
  SimConfig config;
  config.horizon = 100;
  config.base_seed = 40;
  config.n_episodes = 1;
  const double first = estimate_ewsaoi(mdp, solved.policy, State{{1, 1}, {10, 10}}, config).mean;
  RngStream rng(40);
  CHECK(run_episode(mdp, solved.policy, State{{1, 1}, {10, 10}}, config, rng).ewsaoi == first);
}

TEST_CASE("sweep ordering") {
  const SystemParams p = small_network();
  SimConfig config;
  config.horizon = 200;
  config.n_episodes = 20;
  const std::vector<Preset> presets{Preset::WetOma, Preset::Adaptive};
  const std::vector<double> snrs{50.0, 60.0};
  std::size_t calls = 0;
  const auto rows = snr_sweep(p, presets, snrs, State{{1, 1}, {10, 10}}, config, {},
                              [&](const SweepRow&) { ++calls; });
  REQUIRE(rows.size() == 4);
  CHECK(calls == 4);
  CHECK(rows[0].snr_db == 50.0);
  CHECK(rows[0].preset == Preset::WetOma);
  CHECK(rows[1].preset == Preset::Adaptive);
  CHECK(rows[2].snr_db == 60.0);
  CHECK(rows[3].report.mean <= rows[1].report.mean);
  CHECK(snr_sweep(p, std::vector<Preset>{}, snrs, State{{1, 1}, {10, 10}}, config).empty());
}
