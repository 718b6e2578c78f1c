#include "aoisched/baselines.hpp"

#include <array>

#include <fmt/core.h>

namespace aoisched {

std::string SchemeSet::to_string() const {
  std::string out;
  for (const Scheme s : {Scheme::Wet, Scheme::Oma, Scheme::Noma, Scheme::WetOma}) {
    if (!contains(s)) continue;
    if (!out.empty()) out += '|';
    out += scheme_name(s);
  }
  return out;
}

const std::vector<Preset>& all_presets() {
  static const std::vector<Preset> presets{Preset::WetOma, Preset::WetWetOma, Preset::WetNoma, Preset::WetOmaNoma,
                                           Preset::Adaptive};
  return presets;
}

std::string_view preset_name(Preset preset) {
  switch (preset) {
    case Preset::WetOma: return "wet-oma";
    case Preset::WetWetOma: return "wet-wetoma";
    case Preset::WetNoma: return "wet-noma";
    case Preset::WetOmaNoma: return "wet-oma-noma";
    case Preset::Adaptive: return "adaptive";
  }
  return "?";
}

Preset parse_preset(std::string_view name) {
  for (const Preset p : all_presets()) {
    if (preset_name(p) == name) return p;
  }
  throw ConfigError("preset", fmt::format("unknown preset '{}'", name));
}

SchemeSet preset_schemes(Preset preset) {
  switch (preset) {
    case Preset::WetOma: return {Scheme::Wet, Scheme::Oma};
    case Preset::WetWetOma: return {Scheme::Wet, Scheme::WetOma};
    case Preset::WetNoma: return {Scheme::Wet, Scheme::Noma};
    case Preset::WetOmaNoma: return {Scheme::Wet, Scheme::Oma, Scheme::Noma};
    case Preset::Adaptive: return {Scheme::Wet, Scheme::Oma, Scheme::Noma, Scheme::WetOma};
  }
  return {};
}

ActionPredicate restrict_actions(const SchemeSet& schemes) {
  if (schemes.empty()) throw ConfigError("preset", "scheme set must not be empty");
  return [schemes](const Action& a) { return schemes.contains(a.scheme()); };
}

SolveResult solve_restricted(const SystemParams& params, const SchemeSet& schemes, const SolverOptions& options) {
  const NetworkMdp mdp(params, restrict_actions(schemes));
  return policy_iteration(mdp, params.gamma, params.eps_star, options);
}

}  // namespace aoisched
