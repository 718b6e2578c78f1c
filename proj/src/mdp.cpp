#include "aoisched/mdp.hpp"

#include <algorithm>

#include <fmt/core.h>

namespace aoisched {

std::string to_string(const State& s) {
  return fmt::format("({},{},{},{})", s.delta[0], s.delta[1], s.energy[0], s.energy[1]);
}

StateSpace::StateSpace(int delta_max, int battery_levels)
    : delta_max_(delta_max), battery_levels_(battery_levels), energy_span_(battery_levels + 1) {
  if (delta_max < 1 || battery_levels < 0) throw ModelError("state space needs delta_max >= 1 and M >= 0");
  size_ = static_cast<std::size_t>(delta_max) * static_cast<std::size_t>(delta_max) *
          static_cast<std::size_t>(energy_span_) * static_cast<std::size_t>(energy_span_);
}

bool StateSpace::contains(const State& s) const {
  for (int n = 0; n < kDevices; ++n) {
    const auto i = static_cast<std::size_t>(n);
    if (s.delta[i] < 1 || s.delta[i] > delta_max_) return false;
    if (s.energy[i] < 0 || s.energy[i] > battery_levels_) return false;
  }
  return true;
}

StateIndex StateSpace::index(const State& s) const {
  if (!contains(s)) throw ModelError(fmt::format("state {} outside the state space", to_string(s)));
  return index_unchecked(s.delta[0], s.delta[1], s.energy[0], s.energy[1]);
}

State StateSpace::state(StateIndex index) const {
  if (index >= size_) throw ModelError(fmt::format("state index {} out of range", index));
  State s;
  auto rest = static_cast<int>(index);
  s.energy[1] = rest % energy_span_;
  rest /= energy_span_;
  s.energy[0] = rest % energy_span_;
  rest /= energy_span_;
  s.delta[1] = rest % delta_max_ + 1;
  s.delta[0] = rest / delta_max_ + 1;
  return s;
}

Scheme Action::scheme() const {
  const bool t1 = transmits(0);
  const bool t2 = transmits(1);
  if (t1 && t2) return Scheme::Noma;
  if (t1 || t2) return wet ? Scheme::WetOma : Scheme::Oma;
  return Scheme::Wet;
}

std::string Action::label(int power_levels) const {
  auto fraction = [power_levels](int l) -> std::string {
    if (l == 0) return "0";
    if (l == power_levels) return "1";
    return fmt::format("{}/{}", l, power_levels);
  };
  return fmt::format("[{},{},{}]", wet ? 1 : 0, fraction(level[0]), fraction(level[1]));
}

std::vector<Action> action_alphabet(int power_levels) {
  std::vector<Action> out;
  out.push_back({true, {0, 0}});
  out.push_back({false, {power_levels, 0}});
  out.push_back({false, {0, power_levels}});
  for (int l = 1; l < power_levels; ++l) out.push_back({false, {l, power_levels - l}});
  out.push_back({true, {power_levels, 0}});
  out.push_back({true, {0, power_levels}});
  return out;
}

int scheme_grid_code(Scheme scheme) {
  switch (scheme) {
    case Scheme::WetOma: return 1;
    case Scheme::Oma: return 2;
    case Scheme::Wet: return 3;
    case Scheme::Noma: return 4;
  }
  return 0;
}

double cost(const State& s, const SystemParams& params) {
  return params.weight[0] * s.delta[0] + params.weight[1] * s.delta[1];
}

NetworkMdp::NetworkMdp(const SystemParams& params, ActionPredicate allowed)
    : params_((params.validate(), params)),
      link_(params_),
      space_(params_.delta_max, params_.battery_levels),
      alphabet_(action_alphabet(params_.power_levels)) {
  const auto& d = link_.derived();
  for (std::size_t code = 0; code < alphabet_.size(); ++code) {
    const Action& a = alphabet_[code];
    allowed_.push_back(!allowed || allowed(a) ? 1 : 0);
    outage_.push_back(link_.outage(plan(static_cast<ActionCode>(code))));
    spend_.push_back({d.cost(a.level[0]), d.cost(a.level[1])});
  }

  const int m = params_.battery_levels;
  actions_by_energy_.resize(static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(m + 1));
  for (int e1 = 0; e1 <= m; ++e1) {
    for (int e2 = 0; e2 <= m; ++e2) {
      State probe{{1, 1}, {e1, e2}};
      auto& list = actions_by_energy_[energy_slot(e1, e2)];
      for (std::size_t code = 0; code < alphabet_.size(); ++code) {
        const auto c = static_cast<ActionCode>(code);
        if (allowed_[code] && feasible(probe, c)) list.push_back(c);
      }
      if (list.empty()) {
        throw ModelError(fmt::format("action restriction leaves no feasible action in states (*,*,{},{})", e1, e2));
      }
    }
  }
}

SlotPlan NetworkMdp::plan(ActionCode code) const {
  const Action& a = alphabet_.at(code);
  const double step = link_.derived().p_step;
  return SlotPlan{a.wet, {a.level[0] * step, a.level[1] * step}};
}

bool NetworkMdp::feasible(const State& s, ActionCode code) const {
  const Action& a = alphabet_.at(code);
  const auto& spend = spend_[code];
  for (std::size_t n = 0; n < kDevices; ++n) {
    if (a.level[n] > 0 && spend[n] > s.energy[n]) return false;
  }
  return true;
}

std::vector<ActionCode> NetworkMdp::feasible_actions(const State& s) const {
  std::vector<ActionCode> out;
  for (std::size_t code = 0; code < alphabet_.size(); ++code) {
    if (feasible(s, static_cast<ActionCode>(code))) out.push_back(static_cast<ActionCode>(code));
  }
  return out;
}

State NetworkMdp::next_state(const State& s, ActionCode code, std::array<bool, kDevices> success) const {
  return next_state(s, code, success, link_.derived().harvest_levels);
}

State NetworkMdp::next_state(const State& s, ActionCode code, std::array<bool, kDevices> success,
                             std::array<int, kDevices> harvest_levels) const {
  const Action& a = alphabet_[code];
  State next;
  for (std::size_t n = 0; n < kDevices; ++n) {
    const bool tx = a.level[n] > 0;
    next.delta[n] = success[n] ? 1 : std::min(s.delta[n] + 1, params_.delta_max);
    long long level = s.energy[n];
    if (tx) level -= spend_[code][n];
    if (a.wet && !tx) level += harvest_levels[n];
    next.energy[n] = static_cast<int>(std::clamp<long long>(level, 0, params_.battery_levels));
  }
  return next;
}

SuccessorList NetworkMdp::successors(const State& s, ActionCode code) const {
  const Action& a = alphabet_[code];
  const auto& out = outage_[code];
  SuccessorList list;
  for (int r1 = 0; r1 < 2; ++r1) {
    if (r1 == 1 && !a.transmits(0)) continue;
    const double p1 = r1 ? 1.0 - out.p_out[0] : (a.transmits(0) ? out.p_out[0] : 1.0);
    for (int r2 = 0; r2 < 2; ++r2) {
      if (r2 == 1 && !a.transmits(1)) continue;
      const double p2 = r2 ? 1.0 - out.p_out[1] : (a.transmits(1) ? out.p_out[1] : 1.0);
      const double p = p1 * p2;
      if (p <= 0.0) continue;
      const State next = next_state(s, code, {r1 == 1, r2 == 1});
      list.add(space_.index_unchecked(next.delta[0], next.delta[1], next.energy[0], next.energy[1]), p);
    }
  }
  return list;
}

std::vector<std::pair<State, double>> NetworkMdp::transitions(const State& s, ActionCode code) const {
  if (code >= alphabet_.size()) throw ModelError(fmt::format("unknown action code {}", code));
  if (!space_.contains(s)) throw ModelError(fmt::format("state {} outside the state space", to_string(s)));
  const Action& a = alphabet_[code];
  for (int n = 0; n < kDevices; ++n) {
    const auto i = static_cast<std::size_t>(n);
    if (a.level[i] > 0 && spend_[code][i] > s.energy[i]) {
      throw ModelError(fmt::format("action {} infeasible in state {}: device {} needs {} battery levels, has {}",
                                   a.label(params_.power_levels), to_string(s), n + 1, spend_[code][i],
                                   s.energy[i]));
    }
  }
  std::vector<std::pair<State, double>> out;
  for (const auto& t : successors(s, code)) out.emplace_back(space_.state(t.next), t.probability);
  return out;
}

double NetworkMdp::cost(StateIndex s) const { return aoisched::cost(space_.state(s), params_); }

std::span<const ActionCode> NetworkMdp::actions(StateIndex s) const {
  const State st = space_.state(s);
  return actions_by_energy_[energy_slot(st.energy[0], st.energy[1])];
}

SuccessorList NetworkMdp::successors(StateIndex s, ActionCode code) const {
  return successors(space_.state(s), code);
}

}  // namespace aoisched
