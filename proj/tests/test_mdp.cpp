#include <doctest.h>

#include <algorithm>
#include <map>

#include "aoisched/mdp.hpp"

using namespace aoisched;

namespace {
constexpr double kOma50Dev1 = 7.471945180862e-03;  // tests/oracle/oracle.py

const NetworkMdp& default_mdp() {
  static const NetworkMdp mdp{SystemParams{}};
  return mdp;
}
}  // namespace

TEST_CASE("state space size and indexing") {
  CHECK(StateSpace(30, 20).size() == 396'900);
  CHECK(StateSpace(1, 0).size() == 1);
  const StateSpace space(4, 3);
  for (StateIndex i = 0; i < space.size(); ++i) {
    const State s = space.state(i);
    CHECK(space.index(s) == i);
    CHECK(space.index_unchecked(s.delta[0], s.delta[1], s.energy[0], s.energy[1]) == i);
  }
  CHECK(space.state(0) == State{{1, 1}, {0, 0}});
  CHECK(space.state(1) == State{{1, 1}, {0, 1}});
  CHECK(space.state(static_cast<StateIndex>(space.size() - 1)) == State{{4, 4}, {3, 3}});
  CHECK_THROWS_AS(space.index(State{{0, 1}, {0, 0}}), ModelError);
  CHECK_THROWS_AS(space.index(State{{1, 1}, {4, 0}}), ModelError);
  CHECK_THROWS_AS(space.state(static_cast<StateIndex>(space.size())), ModelError);
  CHECK(to_string(State{{5, 7}, {10, 10}}) == "(5,7,10,10)");
}

TEST_CASE("action alphabet") {
  const auto actions = action_alphabet(10);
  REQUIRE(actions.size() == 14);
  CHECK(actions[0].label(10) == "[1,0,0]");
  CHECK(actions[1].label(10) == "[0,1,0]");
  CHECK(actions[2].label(10) == "[0,0,1]");
  CHECK(actions[3].label(10) == "[0,1/10,9/10]");
  CHECK(actions[11].label(10) == "[0,9/10,1/10]");
  CHECK(actions[12].label(10) == "[1,1,0]");
  CHECK(actions[13].label(10) == "[1,0,1]");
  CHECK(actions[0].scheme() == Scheme::Wet);
  CHECK(actions[2].scheme() == Scheme::Oma);
  CHECK(actions[7].scheme() == Scheme::Noma);
  CHECK(actions[13].scheme() == Scheme::WetOma);
  CHECK(scheme_grid_code(Scheme::WetOma) == 1);
  CHECK(scheme_grid_code(Scheme::Oma) == 2);
  CHECK(scheme_grid_code(Scheme::Wet) == 3);
  CHECK(scheme_grid_code(Scheme::Noma) == 4);
  CHECK(action_alphabet(1).size() == 5);
}

TEST_CASE("feasible actions by battery") {
  const auto& mdp = default_mdp();
  const auto at = [&](int e1, int e2) { return mdp.feasible_actions(State{{3, 4}, {e1, e2}}); };

  const auto mid = at(5, 5);
  CHECK(std::find(mid.begin(), mid.end(), ActionCode{7}) != mid.end());  // [0,5/10,5/10]
  for (ActionCode oma_like : {1, 2, 12, 13}) CHECK(std::find(mid.begin(), mid.end(), oma_like) == mid.end());
  CHECK(mid == std::vector<ActionCode>{0, 7});

  CHECK(at(0, 0) == std::vector<ActionCode>{0});
  CHECK(at(20, 20).size() == 14);
  CHECK(at(10, 0) == std::vector<ActionCode>{0, 1, 12});

  const StateIndex idx = mdp.space().index(State{{3, 4}, {5, 5}});
  CHECK(std::vector<ActionCode>(mdp.actions(idx).begin(), mdp.actions(idx).end()) == mid);
}

TEST_CASE("transition examples") {
  const auto& mdp = default_mdp();
  const auto t1 = mdp.transitions(State{{5, 7}, {10, 10}}, 0);
  REQUIRE(t1.size() == 1);
  CHECK(t1[0].first == State{{6, 8}, {20, 20}});
  CHECK(t1[0].second == 1.0);

  auto t2 = mdp.transitions(State{{5, 7}, {10, 10}}, 1);
  std::sort(t2.begin(), t2.end(), [](const auto& a, const auto& b) { return a.first.delta[0] < b.first.delta[0]; });
  REQUIRE(t2.size() == 2);
  CHECK(t2[0].first == State{{1, 8}, {0, 10}});
  CHECK(t2[0].second == doctest::Approx(1.0 - kOma50Dev1).epsilon(1e-12));
  CHECK(t2[1].first == State{{6, 8}, {0, 10}});
  CHECK(t2[1].second == doctest::Approx(kOma50Dev1).epsilon(1e-10));

  const auto t3 = mdp.transitions(State{{30, 30}, {20, 20}}, 0);
  REQUIRE(t3.size() == 1);
  CHECK(t3[0].first == State{{30, 30}, {20, 20}});

  // WET+OMA: device 2 sends at full power while device 1 is charged
  const auto t4 = mdp.transitions(State{{4, 9}, {3, 12}}, 13);
  for (const auto& [s, p] : t4) {
    CHECK(s.energy == std::array<int, 2>{20, 2});
    CHECK(s.delta[0] == 5);
  }

  // NOMA both reset
  const auto t5 = mdp.transitions(State{{4, 9}, {3, 12}}, 4);  // [0,2/10,8/10]
  REQUIRE(t5.size() == 4);
  double total = 0.0;
  for (const auto& [s, p] : t5) {
    CHECK(s.energy == std::array<int, 2>{1, 4});
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("infeasible action names the device") {
  const auto& mdp = default_mdp();
  try {
    mdp.transitions(State{{5, 7}, {3, 20}}, 1);
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("device 1") != std::string::npos);
  }
  CHECK_THROWS_AS(mdp.transitions(State{{5, 7}, {20, 0}}, 2), ModelError);
  CHECK_THROWS_AS(mdp.transitions(State{{5, 7}, {20, 20}}, 14), ModelError);
}

TEST_CASE("cost") {
  const SystemParams p;
  CHECK(cost(State{{5, 7}, {0, 0}}, p) == 6.0);
  CHECK(cost(State{{1, 1}, {3, 3}}, p) == 1.0);
  CHECK(cost(State{{30, 30}, {20, 20}}, p) == 30.0);
  SystemParams q;
  q.weight = {0.25, 0.75};
  CHECK(cost(State{{4, 8}, {0, 0}}, q) == 7.0);
}

TEST_CASE("successor lists are distributions on a small model") {
  SystemParams p;
  p.delta_max = 4;
  p.battery_levels = 5;
  p.e_max_joules = 0.005;
  const NetworkMdp mdp(p);
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    const State st = mdp.space().state(s);
    for (ActionCode a : mdp.actions(s)) {
      const auto succ = mdp.successors(s, a);
      CHECK(std::abs(succ.total() - 1.0) <= 1e-12);
      // successors agree with the checked transition listing
      std::map<StateIndex, double> expected;
      for (const auto& [next, pr] : mdp.transitions(st, a)) expected[mdp.space().index(next)] += pr;
      for (const auto& t : succ) CHECK(t.probability == doctest::Approx(expected[t.next]).epsilon(1e-14));
    }
  }
}

TEST_CASE("restriction leaving no action is an error") {
  const auto only_oma = [](const Action& a) { return a.scheme() == Scheme::Oma; };
  try {
    NetworkMdp mdp(SystemParams{}, only_oma);
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("(*,*,0,0)") != std::string::npos);
  }
}
