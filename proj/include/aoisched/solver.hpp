#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/core.h>

#include "aoisched/types.hpp"

namespace aoisched {

/// A finite, discounted, cost-minimising MDP with state-only costs.
/// `actions(s)` lists the admissible codes of state s in ascending order.
template <class M>
concept DiscreteMdp = requires(const M& m, StateIndex s, ActionCode a) {
  { m.num_states() } -> std::convertible_to<std::size_t>;
  { m.cost(s) } -> std::convertible_to<double>;
  { m.actions(s) } -> std::convertible_to<std::span<const ActionCode>>;
  { m.successors(s, a) } -> std::same_as<SuccessorList>;
};

/// Small MDP given by explicit tables; used for hand-built instances.
class ExplicitMdp {
 public:
  struct Choice {
    ActionCode code;
    SuccessorList successors;
  };

  explicit ExplicitMdp(std::vector<double> costs) : costs_(std::move(costs)), choices_(costs_.size()) {}

  void add_action(StateIndex s, ActionCode code, std::initializer_list<Transition> transitions) {
    Choice c{code, {}};
    for (const auto& t : transitions) c.successors.add(t.next, t.probability);
    auto& list = choices_.at(s);
    const auto pos = std::find_if(list.begin(), list.end(), [&](const Choice& x) { return x.code > code; });
    list.insert(pos, c);
    rebuild_codes();
  }

  std::size_t num_states() const { return costs_.size(); }
  double cost(StateIndex s) const { return costs_.at(s); }
  std::span<const ActionCode> actions(StateIndex s) const { return codes_.at(s); }
  SuccessorList successors(StateIndex s, ActionCode a) const {
    for (const auto& c : choices_.at(s)) {
      if (c.code == a) return c.successors;
    }
    throw ModelError(fmt::format("action {} not available in state {}", a, s));
  }

 private:
  void rebuild_codes() {
    codes_.assign(choices_.size(), {});
    for (std::size_t s = 0; s < choices_.size(); ++s) {
      for (const auto& c : choices_[s]) codes_[s].push_back(c.code);
    }
  }

  std::vector<double> costs_;
  std::vector<std::vector<Choice>> choices_;
  std::vector<std::vector<ActionCode>> codes_;
};

struct SolverOptions {
  std::size_t max_evaluation_sweeps = 10000;  // over the whole run
  std::size_t max_policy_iterations = 1000;
  /// Q-values closer than this are ties; ties go to the lowest code, and
  /// an incumbent action is only replaced by a strictly better one.
  double tie_tolerance = 1e-9;
  /// Called after each policy evaluation with (iteration, policy, value).
  std::function<void(std::size_t, const Policy&, const ValueFunction&)> observer;
};

struct SolveLogEntry {
  enum class Phase { Evaluate, Improve, Final };
  Phase phase = Phase::Evaluate;
  std::size_t iteration = 0;
  double residual = 0.0;
  std::size_t policy_changes = 0;
};

inline std::string_view phase_name(SolveLogEntry::Phase phase) {
  switch (phase) {
    case SolveLogEntry::Phase::Evaluate: return "evaluate";
    case SolveLogEntry::Phase::Improve: return "improve";
    case SolveLogEntry::Phase::Final: return "final";
  }
  return "?";
}

struct SolveLog {
  std::vector<SolveLogEntry> entries;
  std::vector<std::size_t> sweeps_per_iteration;
  std::size_t total_sweeps = 0;
  std::size_t policy_iterations = 0;
  double final_residual = 0.0;  // Bellman residual of the returned value
  double wall_seconds = 0.0;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& message, SolveLog log) : Error(message), log_(std::move(log)) {}
  const SolveLog& log() const noexcept { return log_; }

 private:
  SolveLog log_;
};

struct SolveResult {
  Policy policy;
  ValueFunction value;
  SolveLog log;
};

struct ValueIterationResult {
  Policy policy;
  ValueFunction value;
  std::size_t iterations = 0;
  double last_change = 0.0;
};

template <DiscreteMdp M>
double q_value(const M& mdp, StateIndex s, ActionCode a, double gamma, std::span<const double> value) {
  double expected = 0.0;
  for (const auto& t : mdp.successors(s, a)) expected += t.probability * value[t.next];
  return mdp.cost(s) + gamma * expected;
}

/// Throws ModelError if some state has no action or a successor list that is
/// not a probability distribution over valid states.
template <DiscreteMdp M>
void check_total(const M& mdp, double tolerance = 1e-9) {
  const std::size_t n = mdp.num_states();
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = static_cast<StateIndex>(i);
    const auto acts = mdp.actions(s);
    if (acts.empty()) throw ModelError(fmt::format("state {} has no admissible action", s));
    for (const ActionCode a : acts) {
      const auto succ = mdp.successors(s, a);
      for (const auto& t : succ) {
        if (t.next >= n || t.probability < 0.0 || t.probability > 1.0 + tolerance) {
          throw ModelError(fmt::format("state {} action {}: invalid transition", s, a));
        }
      }
      if (std::abs(succ.total() - 1.0) > tolerance) {
        throw ModelError(fmt::format("state {} action {}: probabilities sum to {}", s, a, succ.total()));
      }
    }
  }
}

/// Greedy action of one state: lowest-code argmin within `tie_tolerance`.
template <DiscreteMdp M>
ActionCode greedy_action(const M& mdp, StateIndex s, double gamma, std::span<const double> value,
                         double tie_tolerance, double* best_q = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  ActionCode best_code = 0;
  for (const ActionCode a : mdp.actions(s)) {
    const double q = q_value(mdp, s, a, gamma, value);
    if (q < best - tie_tolerance) {
      best = q;
      best_code = a;
    }
  }
  if (best_q) *best_q = best;
  return best_code;
}

template <DiscreteMdp M>
Policy greedy_policy(const M& mdp, double gamma, std::span<const double> value, double tie_tolerance = 1e-9) {
  Policy policy(mdp.num_states());
  for (std::size_t i = 0; i < policy.size(); ++i) {
    policy[i] = greedy_action(mdp, static_cast<StateIndex>(i), gamma, value, tie_tolerance);
  }
  return policy;
}

/// max_s |V(s) - min_a [c(s) + gamma E V(s')]|.
template <DiscreteMdp M>
double bellman_residual(const M& mdp, double gamma, std::span<const double> value) {
  double worst = 0.0;
  for (std::size_t i = 0; i < mdp.num_states(); ++i) {
    const auto s = static_cast<StateIndex>(i);
    double best = std::numeric_limits<double>::infinity();
    for (const ActionCode a : mdp.actions(s)) best = std::min(best, q_value(mdp, s, a, gamma, value));
    worst = std::max(worst, std::abs(value[i] - best));
  }
  return worst;
}

/// In-place (Gauss-Seidel) evaluation sweeps in state-index order until the
/// largest change of a sweep drops below `eps`. Returns the number of sweeps;
/// each sweep's change is appended to `changes` when given.
template <DiscreteMdp M>
std::size_t evaluate_policy(const M& mdp, std::span<const ActionCode> policy, double gamma, double eps,
                            ValueFunction& value, std::size_t max_sweeps, std::vector<double>* changes = nullptr) {
  const std::size_t n = mdp.num_states();
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = static_cast<StateIndex>(i);
      const double old = value[i];
      value[i] = q_value(mdp, s, policy[i], gamma, value);
      change = std::max(change, std::abs(old - value[i]));
    }
    if (changes) changes->push_back(change);
    if (change < eps) return sweep;
  }
  return max_sweeps + 1;
}

/// Policy iteration: V = 0, pi = lowest admissible code, then alternate
/// evaluation and greedy improvement until no state changes action.
template <DiscreteMdp M>
SolveResult policy_iteration(const M& mdp, double gamma, double eps_star, const SolverOptions& options = {}) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("policy_iteration: gamma must lie in (0, 1)");
  if (!(eps_star > 0.0)) throw Error("policy_iteration: eps_star must be positive");
  check_total(mdp);

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = mdp.num_states();
  SolveResult result;
  result.value.assign(n, 0.0);
  result.policy.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.policy[i] = mdp.actions(static_cast<StateIndex>(i)).front();

  SolveLog& log = result.log;
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  for (std::size_t iteration = 1;; ++iteration) {
    if (iteration > options.max_policy_iterations) {
      log.wall_seconds = elapsed();
      throw SolverError(fmt::format("policy iteration did not stabilise within {} iterations",
                                    options.max_policy_iterations),
                        log);
    }
    log.policy_iterations = iteration;

    std::vector<double> changes;
    const std::size_t budget = options.max_evaluation_sweeps - log.total_sweeps;
    const std::size_t sweeps = evaluate_policy(mdp, result.policy, gamma, eps_star, result.value, budget, &changes);
    for (const double c : changes) log.entries.push_back({SolveLogEntry::Phase::Evaluate, iteration, c, 0});
    if (sweeps > budget) {
      log.total_sweeps += budget;
      log.wall_seconds = elapsed();
      throw SolverError(fmt::format("policy evaluation exceeded {} sweeps", options.max_evaluation_sweeps), log);
    }
    log.total_sweeps += sweeps;
    log.sweeps_per_iteration.push_back(sweeps);
    if (options.observer) options.observer(iteration, result.policy, result.value);

    std::size_t changed = 0;
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = static_cast<StateIndex>(i);
      double best_q = 0.0;
      const ActionCode best = greedy_action(mdp, s, gamma, result.value, options.tie_tolerance, &best_q);
      residual = std::max(residual, std::abs(result.value[i] - best_q));
      const ActionCode old = result.policy[i];
      if (best == old) continue;
      const double old_q = q_value(mdp, s, old, gamma, result.value);
      if (best_q < old_q - options.tie_tolerance) {
        result.policy[i] = best;
        ++changed;
      }
    }
    log.entries.push_back({SolveLogEntry::Phase::Improve, iteration, residual, changed});
    if (changed == 0) break;
  }

  log.final_residual = bellman_residual(mdp, gamma, result.value);
  log.entries.push_back({SolveLogEntry::Phase::Final, log.policy_iterations, log.final_residual, 0});
  log.wall_seconds = elapsed();
  return result;
}

/// Synchronous value iteration from V = 0, stopping once the sup-norm change
/// of one sweep is below tol (1 - gamma) / (2 gamma); the greedy policy of
/// the result is then tol-optimal.
template <DiscreteMdp M>
ValueIterationResult value_iteration(const M& mdp, double gamma, double tol, std::size_t max_iterations = 100000,
                                     double tie_tolerance = 1e-9) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("value_iteration: gamma must lie in (0, 1)");
  if (!(tol > 0.0)) throw Error("value_iteration: tol must be positive");
  const std::size_t n = mdp.num_states();
  const double threshold = tol * (1.0 - gamma) / (2.0 * gamma);
  ValueIterationResult result;
  ValueFunction current(n, 0.0);
  ValueFunction next(n, 0.0);
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = static_cast<StateIndex>(i);
      double best = std::numeric_limits<double>::infinity();
      for (const ActionCode a : mdp.actions(s)) best = std::min(best, q_value(mdp, s, a, gamma, current));
      next[i] = best;
      change = std::max(change, std::abs(best - current[i]));
    }
    current.swap(next);
    result.iterations = it;
    result.last_change = change;
    if (change < threshold) {
      result.value = std::move(current);
      result.policy = greedy_policy(mdp, gamma, result.value, tie_tolerance);
      return result;
    }
  }
  throw Error(fmt::format("value iteration did not converge within {} iterations", max_iterations));
}

}  // namespace aoisched
