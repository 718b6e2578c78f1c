#pragma once

#include <bitset>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "aoisched/mdp.hpp"
#include "aoisched/solver.hpp"

namespace aoisched {

/// A subset of {WET, OMA, NOMA, WET+OMA}.
class SchemeSet {
 public:
  SchemeSet() = default;
  SchemeSet(std::initializer_list<Scheme> schemes) {
    for (const Scheme s : schemes) insert(s);
  }

  void insert(Scheme s) { bits_.set(static_cast<std::size_t>(s)); }
  bool contains(Scheme s) const { return bits_.test(static_cast<std::size_t>(s)); }
  bool empty() const { return bits_.none(); }
  std::string to_string() const;  // "WET|OMA|..."

  bool operator==(const SchemeSet&) const = default;

 private:
  std::bitset<4> bits_;
};

/// Named comparison policies. `wet-noma` and `wet-oma` pair a single access
/// scheme with charging, since a device with an empty battery needs WET.
enum class Preset { WetOma, WetWetOma, WetNoma, WetOmaNoma, Adaptive };

const std::vector<Preset>& all_presets();
std::string_view preset_name(Preset preset);
/// Accepts the CLI names `wet-oma`, `wet-wetoma`, `wet-noma`, `wet-oma-noma`,
/// `adaptive`; throws ConfigError otherwise.
Preset parse_preset(std::string_view name);
SchemeSet preset_schemes(Preset preset);

/// Predicate keeping exactly the actions whose scheme is in `schemes`.
/// Throws ConfigError for an empty set. Whether the restriction leaves every
/// state with an action is checked when a NetworkMdp is built from it.
ActionPredicate restrict_actions(const SchemeSet& schemes);

/// Optimal policy of the scheme-restricted MDP, by policy iteration with the
/// discount and accuracy from `params`.
SolveResult solve_restricted(const SystemParams& params, const SchemeSet& schemes, const SolverOptions& options = {});

}  // namespace aoisched
