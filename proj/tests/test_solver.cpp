#include <doctest.h>

#include <algorithm>
#include <limits>

#include "aoisched/mdp.hpp"
#include "aoisched/solver.hpp"

using namespace aoisched;

namespace {
// State 0 (cost 1): code 0 stays, code 1 moves to the absorbing state 1 (cost 0).
ExplicitMdp leave_or_stay() {
  ExplicitMdp m({1.0, 0.0});
  m.add_action(0, 0, {{0, 1.0}});
  m.add_action(0, 1, {{1, 1.0}});
  m.add_action(1, 0, {{1, 1.0}});
  return m;
}

// Three states with stochastic moves; exhaustive enumeration in
// tests/oracle/oracle.py gives policy (2, 0, 2) and the values below.
ExplicitMdp three_state() {
  ExplicitMdp m({2.0, 1.0, 3.0});
  m.add_action(0, 0, {{0, 0.5}, {1, 0.5}});
  m.add_action(0, 1, {{2, 1.0}});
  m.add_action(0, 2, {{1, 0.9}, {2, 0.1}});
  m.add_action(1, 0, {{1, 1.0}});
  m.add_action(1, 1, {{0, 0.3}, {2, 0.7}});
  m.add_action(2, 0, {{2, 1.0}});
  m.add_action(2, 1, {{0, 1.0}});
  m.add_action(2, 2, {{1, 0.6}, {0, 0.4}});
  return m;
}
constexpr double kThreeStateValue[] = {6.1904761904761925, 5.0, 7.380952380952383};

SystemParams small_network(double snr = 50.0) {
  SystemParams p;
  p.delta_max = 6;
  p.battery_levels = 10;
  p.e_max_joules = 0.01;
  p.snr_db = snr;
  return p;
}
}  // namespace

TEST_CASE("toy MDP: leave beats staying") {
  const auto m = leave_or_stay();
  const auto r = policy_iteration(m, 0.8, 1e-10);
  CHECK(r.policy == Policy{1, 0});
  CHECK(r.value[1] == 0.0);
  CHECK(r.value[0] == doctest::Approx(1.0).epsilon(1e-9));
  const auto vi = value_iteration(m, 0.8, 1e-8);
  CHECK(vi.policy == r.policy);
}

TEST_CASE("toy MDP: matches exhaustive enumeration") {
  const auto m = three_state();
  const auto r = policy_iteration(m, 0.8, 1e-12);
  CHECK(r.policy == Policy{2, 0, 2});
  for (int s = 0; s < 3; ++s) CHECK(r.value[s] == doctest::Approx(kThreeStateValue[s]).epsilon(1e-10));
  CHECK(bellman_residual(m, 0.8, r.value) < 1e-10);
  const auto vi = value_iteration(m, 0.8, 1e-9);
  CHECK(vi.policy == r.policy);
}

TEST_CASE("residual definition") {
  const auto m = three_state();
  const ValueFunction exact(std::begin(kThreeStateValue), std::end(kThreeStateValue));
  CHECK(bellman_residual(m, 0.8, exact) < 1e-12);
  const ValueFunction zero(3, 0.0);
  CHECK(bellman_residual(m, 0.8, zero) >= 1.0);
}

TEST_CASE("single age value: every action ties, lowest code wins") {
  SystemParams p = small_network();
  p.delta_max = 1;
  const NetworkMdp mdp(p);
  const auto r = policy_iteration(mdp, p.gamma, p.eps_star);
  for (StateIndex s = 0; s < mdp.num_states(); ++s) CHECK(r.policy[s] == mdp.actions(s).front());
  CHECK(r.log.policy_iterations == 1);
}

TEST_CASE("myopic discount picks the best one-step expected cost") {
  const SystemParams p = small_network(55.0);
  const NetworkMdp mdp(p);
  const double gamma = 0.01;
  const auto r = policy_iteration(mdp, gamma, 1e-12);
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    double best = std::numeric_limits<double>::infinity();
    for (ActionCode a : mdp.actions(s)) {
      double c = 0.0;
      for (const auto& t : mdp.successors(s, a)) c += t.probability * mdp.cost(t.next);
      best = std::min(best, c);
    }
    double chosen = 0.0;
    for (const auto& t : mdp.successors(s, r.policy[s])) chosen += t.probability * mdp.cost(t.next);
    // later stages can only shift the choice by gamma * (cost range) / (1 - gamma)
    CHECK(chosen <= best + gamma * (p.delta_max - 1) / (1.0 - gamma));
  }
}

TEST_CASE("zero cost gives a zero value") {
  ExplicitMdp m({0.0, 0.0, 0.0});
  m.add_action(0, 0, {{1, 0.5}, {2, 0.5}});
  m.add_action(1, 0, {{0, 1.0}});
  m.add_action(1, 3, {{2, 1.0}});
  m.add_action(2, 0, {{2, 1.0}});
  const auto r = policy_iteration(m, 0.8, 1e-10);
  CHECK(r.value == ValueFunction{0.0, 0.0, 0.0});
  CHECK(value_iteration(m, 0.8, 1e-6).value == ValueFunction{0.0, 0.0, 0.0});
}

TEST_CASE("policy iteration on a small network") {
  const SystemParams p = small_network();
  const NetworkMdp mdp(p);
  std::vector<ValueFunction> values;
  SolverOptions options;
  options.observer = [&](std::size_t, const Policy&, const ValueFunction& v) { values.push_back(v); };
  const auto r = policy_iteration(mdp, p.gamma, p.eps_star, options);

  CHECK(r.log.final_residual < 1e-3);
  CHECK(r.log.final_residual == doctest::Approx(bellman_residual(mdp, p.gamma, r.value)));
  REQUIRE(values.size() == r.log.policy_iterations);
  // improvement never makes a state worse (up to evaluation accuracy)
  for (std::size_t k = 1; k < values.size(); ++k) {
    for (std::size_t s = 0; s < values[k].size(); ++s) CHECK(values[k][s] <= values[k - 1][s] + 2 * p.eps_star);
  }
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    const auto acts = mdp.actions(s);
    CHECK(std::find(acts.begin(), acts.end(), r.policy[s]) != acts.end());
  }

  // log layout: evaluate rows, one improve row per iteration, one final row
  std::size_t improves = 0, evaluates = 0;
  for (const auto& e : r.log.entries) {
    improves += e.phase == SolveLogEntry::Phase::Improve;
    evaluates += e.phase == SolveLogEntry::Phase::Evaluate;
  }
  CHECK(improves == r.log.policy_iterations);
  CHECK(evaluates == r.log.total_sweeps);
  CHECK(r.log.entries.back().phase == SolveLogEntry::Phase::Final);
  CHECK(r.log.entries[r.log.entries.size() - 2].policy_changes == 0);

  const auto again = policy_iteration(mdp, p.gamma, p.eps_star);
  CHECK(again.policy == r.policy);
  CHECK(again.value == r.value);

  const auto vi = value_iteration(mdp, p.gamma, 1e-6);
  double gap = 0.0;
  for (std::size_t s = 0; s < vi.value.size(); ++s) gap = std::max(gap, std::abs(vi.value[s] - r.value[s]));
  CHECK(gap <= 1e-3 / (1.0 - p.gamma));
}

TEST_CASE("sweep cap raises SolverError with the partial log") {
  const NetworkMdp mdp(small_network());
  SolverOptions options;
  options.max_evaluation_sweeps = 3;
  try {
    policy_iteration(mdp, 0.8, 1e-4, options);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.log().total_sweeps == 3);
    CHECK(e.log().entries.size() == 3);
  }
}

TEST_CASE("bad arguments and broken kernels") {
  const auto m = three_state();
  CHECK_THROWS_AS(policy_iteration(m, 1.0, 1e-4), Error);
  CHECK_THROWS_AS(policy_iteration(m, 0.8, 0.0), Error);
  ExplicitMdp leaky({1.0, 1.0});
  leaky.add_action(0, 0, {{1, 0.5}});
  leaky.add_action(1, 0, {{1, 1.0}});
  CHECK_THROWS_AS(check_total(leaky), ModelError);
  ExplicitMdp stuck({1.0, 1.0});
  stuck.add_action(0, 0, {{0, 1.0}});
  CHECK_THROWS_AS(check_total(stuck), ModelError);
}
