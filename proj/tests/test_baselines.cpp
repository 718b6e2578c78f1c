#include <doctest.h>

#include "aoisched/baselines.hpp"

using namespace aoisched;

namespace {
std::vector<ActionCode> kept(const SchemeSet& set, int levels = 10) {
  const auto pred = restrict_actions(set);
  std::vector<ActionCode> out;
  const auto alphabet = action_alphabet(levels);
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (pred(alphabet[i])) out.push_back(static_cast<ActionCode>(i));
  }
  return out;
}

SystemParams small_network() {
  SystemParams p;
  p.delta_max = 6;
  p.battery_levels = 10;
  p.e_max_joules = 0.01;
  return p;
}
}  // namespace

TEST_CASE("preset names") {
  for (const Preset p : all_presets()) CHECK(parse_preset(preset_name(p)) == p);
  CHECK(all_presets().size() == 5);
  CHECK(parse_preset("wet-wetoma") == Preset::WetWetOma);
  CHECK_THROWS_AS(parse_preset("oma"), ConfigError);
  CHECK(preset_schemes(Preset::WetOma) == SchemeSet{Scheme::Wet, Scheme::Oma});
  CHECK(preset_schemes(Preset::WetNoma) == SchemeSet{Scheme::Wet, Scheme::Noma});
  CHECK(preset_schemes(Preset::Adaptive) == SchemeSet{Scheme::Wet, Scheme::Oma, Scheme::Noma, Scheme::WetOma});
  CHECK(SchemeSet{Scheme::Wet, Scheme::Oma}.to_string() == "WET|OMA");
}

TEST_CASE("restriction keeps exactly the listed schemes") {
  CHECK(kept(preset_schemes(Preset::WetOma)) == std::vector<ActionCode>{0, 1, 2});
  CHECK(kept(preset_schemes(Preset::Adaptive)).size() == 14);
  CHECK(kept(preset_schemes(Preset::WetWetOma)) == std::vector<ActionCode>{0, 12, 13});
  CHECK(kept(preset_schemes(Preset::WetNoma)) == std::vector<ActionCode>{0, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  CHECK_THROWS_AS(restrict_actions(SchemeSet{}), ConfigError);
  CHECK_THROWS_AS(NetworkMdp(SystemParams{}, restrict_actions(SchemeSet{Scheme::Oma})), ModelError);
}

TEST_CASE("adaptive restriction equals the unrestricted solve") {
  const SystemParams p = small_network();
  const auto a = solve_restricted(p, preset_schemes(Preset::Adaptive));
  const NetworkMdp mdp(p);
  const auto b = policy_iteration(mdp, p.gamma, p.eps_star);
  CHECK(a.policy == b.policy);
  CHECK(a.value == b.value);
}

TEST_CASE("nested presets give nested optimal values") {
  const SystemParams p = small_network();
  const auto oma = solve_restricted(p, preset_schemes(Preset::WetOma));
  const auto oma_noma = solve_restricted(p, preset_schemes(Preset::WetOmaNoma));
  const auto all = solve_restricted(p, preset_schemes(Preset::Adaptive));
  for (std::size_t s = 0; s < all.value.size(); ++s) {
    CHECK(oma.value[s] >= oma_noma.value[s] - 2 * p.eps_star);
    CHECK(oma_noma.value[s] >= all.value[s] - 2 * p.eps_star);
  }
  for (const ActionCode a : oma.policy) CHECK(a <= 2);
}
