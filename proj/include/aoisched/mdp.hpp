#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aoisched/config.hpp"
#include "aoisched/link.hpp"
#include "aoisched/types.hpp"

namespace aoisched {

/// Quantized network state: ages in [1, delta_max], battery levels in [0, M].
struct State {
  std::array<int, kDevices> delta{1, 1};
  std::array<int, kDevices> energy{0, 0};

  bool operator==(const State&) const = default;
};

std::string to_string(const State& s);

/// Dense indexing of the truncated state space. Iteration order is fixed:
/// delta1 outermost, then delta2, then e1, with e2 innermost.
class StateSpace {
 public:
  StateSpace(int delta_max, int battery_levels);

  std::size_t size() const { return size_; }
  int delta_max() const { return delta_max_; }
  int battery_levels() const { return battery_levels_; }

  bool contains(const State& s) const;
  StateIndex index(const State& s) const;  // throws ModelError when out of range
  State state(StateIndex index) const;

  /// Index arithmetic without bounds checks, for hot loops.
  StateIndex index_unchecked(int d1, int d2, int e1, int e2) const {
    return static_cast<StateIndex>(((d1 - 1) * delta_max_ + (d2 - 1)) * energy_span_ * energy_span_ +
                                   e1 * energy_span_ + e2);
  }

 private:
  int delta_max_;
  int battery_levels_;
  int energy_span_;
  std::size_t size_;
};

/// One entry of the action alphabet [V0, alpha1, alpha2], with the power
/// fractions held as integer levels out of L.
struct Action {
  bool wet = false;
  std::array<int, kDevices> level{0, 0};

  bool transmits(int device) const { return level[static_cast<std::size_t>(device)] > 0; }
  Scheme scheme() const;
  /// "[1,0,0]", "[0,3/10,7/10]", ...
  std::string label(int power_levels) const;

  bool operator==(const Action&) const = default;
};

/// The L + 4 coded actions in code order: WET [1,0,0]; OMA [0,1,0], [0,0,1];
/// NOMA [0, l/L, (L-l)/L] for l = 1..L-1; WET+OMA [1,1,0], [1,0,1].
std::vector<Action> action_alphabet(int power_levels);

/// Scheme number used in policy grids: 1 WET+OMA, 2 OMA, 3 WET, 4 NOMA.
int scheme_grid_code(Scheme scheme);

using ActionPredicate = std::function<bool(const Action&)>;

/// Weighted age W1*delta1 + W2*delta2; the one-stage cost of every action.
double cost(const State& s, const SystemParams& params);

/// The discretised scheduling MDP. The transition kernel is never stored:
/// outage probabilities depend only on the action, so successors are
/// rebuilt on demand from the state's components. Immutable after
/// construction.
class NetworkMdp {
 public:
  /// `allowed` restricts the action alphabet (all actions when empty).
  /// Throws ModelError if some state is left with no feasible action.
  explicit NetworkMdp(const SystemParams& params, ActionPredicate allowed = {});

  const SystemParams& params() const { return params_; }
  const DerivedParams& derived() const { return link_.derived(); }
  const LinkModel& link() const { return link_; }
  const StateSpace& space() const { return space_; }
  const std::vector<Action>& alphabet() const { return alphabet_; }
  const Action& action(ActionCode code) const { return alphabet_.at(code); }

  SlotPlan plan(ActionCode code) const;
  const OutagePair& outage(ActionCode code) const { return outage_.at(code); }

  /// Battery feasibility only, ignoring any restriction.
  bool feasible(const State& s, ActionCode code) const;
  std::vector<ActionCode> feasible_actions(const State& s) const;
  /// Whether the restriction keeps this code.
  bool allowed(ActionCode code) const { return allowed_.at(code) != 0; }

  /// Next state for given per-device success flags; harvest is the
  /// deterministic per-slot level gain.
  State next_state(const State& s, ActionCode code, std::array<bool, kDevices> success) const;
  /// Same, with the harvested battery levels supplied by the caller.
  State next_state(const State& s, ActionCode code, std::array<bool, kDevices> success,
                   std::array<int, kDevices> harvest_levels) const;

  /// Checked successor distribution; throws ModelError naming the device
  /// whose battery cannot pay for the action.
  std::vector<std::pair<State, double>> transitions(const State& s, ActionCode code) const;

  // Solver interface.
  std::size_t num_states() const { return space_.size(); }
  double cost(StateIndex s) const;
  std::span<const ActionCode> actions(StateIndex s) const;
  SuccessorList successors(StateIndex s, ActionCode code) const;

 private:
  std::size_t energy_slot(int e1, int e2) const {
    return static_cast<std::size_t>(e1) * static_cast<std::size_t>(space_.battery_levels() + 1) +
           static_cast<std::size_t>(e2);
  }
  SuccessorList successors(const State& s, ActionCode code) const;

  SystemParams params_;
  LinkModel link_;
  StateSpace space_;
  std::vector<Action> alphabet_;
  std::vector<char> allowed_;
  std::vector<OutagePair> outage_;
  std::vector<std::array<int, kDevices>> spend_;  // battery levels per code
  std::vector<std::vector<ActionCode>> actions_by_energy_;
};

}  // namespace aoisched
