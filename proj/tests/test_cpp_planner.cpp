#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cpp_oracle.hpp"
#include "dpp/cpp_planner.hpp"
#include "dpp/errors.hpp"
#include "test_support.hpp"

using namespace dpp;
using namespace dpp::testing;

namespace {

// Every observer schedule over a time window: each flag gets nothing, one
// reveal, or one perform (at most one perform overall).
std::vector<Schedule> all_schedules(std::size_t k, int horizon) {
  std::vector<Schedule> out{{}};
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<Schedule> grown;
    for (const Schedule& base : out) {
      grown.push_back(base);  // flag untouched
      bool base_has_perform = false;
      for (const auto& [t, mv] : base)
        if (mv.type == ObserverMove::Type::Perform) base_has_perform = true;
      for (int t = 0; t <= horizon; ++t) {
        Schedule with_reveal = base;
        with_reveal.push_back({t, {ObserverMove::Type::Reveal, static_cast<int>(i)}});
        grown.push_back(with_reveal);
        if (!base_has_perform) {
          Schedule with_perform = base;
          with_perform.push_back({t, {ObserverMove::Type::Perform, static_cast<int>(i)}});
          grown.push_back(with_perform);
        }
      }
    }
    out = std::move(grown);
  }
  return out;
}

// short corridor 0-1-2-3(G*), detour 0-4-5-6-3, threat removes 2
struct CorridorRig {
  std::shared_ptr<const WeightedGraph> graph =
      make_graph(7, {{0, 1}, {1, 2}, {2, 3}, {0, 4}, {4, 5}, {5, 6}, {6, 3}});
  Mdp mdp = Mdp::from_graph(graph, 0, 0.9, {3}, 3);
  std::vector<Intervention> ivs{remove_states_intervention(*graph, {2}, "cut_short")};
};

}  // namespace

TEST_CASE("successor info sets follow the perform/reveal rules") {
  InfoSet one = InfoSet::all_unknown(1);
  auto succ = successors(one, 0);
  REQUIRE(succ.size() == 2);
  CHECK(succ[0].flags == std::vector<Flag>{Flag::Present});
  CHECK(succ[1].flags == std::vector<Flag>{Flag::Absent});

  InfoSet two = InfoSet::all_unknown(2);
  succ = successors(two, 0);
  CHECK(succ[0].flags == std::vector<Flag>{Flag::Present, Flag::Absent});
  CHECK(succ[1].flags == std::vector<Flag>{Flag::Absent, Flag::Unknown});

  CHECK_THROWS_AS(successors(succ[1], 0), InputError);  // flag already resolved
  InfoSet spent{std::vector<Flag>{Flag::Present, Flag::Unknown}};
  CHECK_THROWS_AS(successors(spent, 1), InputError);  // intervention already performed
}

TEST_CASE("no interventions reduces to plain min-cost value iteration") {
  Mdp m = make_mdp(open_grid(3, 3), 0, {8}, 8, 0.99);
  GameValue gv = minimax_value_iteration(m, {}, 0.0, 1e-12);
  int idx = gv.info_index(InfoSet::all_unknown(0));
  REQUIRE(idx >= 0);
  double exact = 0.0;  // discounted 4-step shortest path
  for (int t = 0; t < 4; ++t) exact += std::pow(0.99, t);
  CHECK(gv.value(0, idx) == doctest::Approx(exact).epsilon(1e-10));
  // undiscounted hop oracle within 2%
  CHECK(gv.value(0, idx) == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("single cuttable corridor: value matches the hand fixed point and the oracle") {
  CorridorRig rig;
  GameValue gv = minimax_value_iteration(rig.mdp, rig.ivs, 0.0, 1e-13);
  int all_unknown = gv.info_index(InfoSet::all_unknown(1));
  double detour = 0.0;
  for (int t = 0; t < 4; ++t) detour += std::pow(0.9, t);
  CHECK(gv.value(0, all_unknown) == doctest::Approx(detour).epsilon(1e-9));

  int depth = GameTreeOracle::depth_for(0.9, 1.0 / (1 - 0.9), 1e-11);
  GameTreeOracle oracle(rig.mdp, rig.ivs, default_decoy_penalty(rig.mdp), depth);
  for (StateId s = 0; s < rig.mdp.num_states(); ++s) {
    double got = gv.value(s, all_unknown);
    double want = oracle.value(s, InfoSet::all_unknown(1), depth);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("pmvi fixed point holds at every state and information set") {
  CorridorRig rig;
  GameValue gv = minimax_value_iteration(rig.mdp, rig.ivs, 0.0, 1e-13);
  int unknown = gv.info_index(InfoSet::all_unknown(1));
  int performed = gv.info_index(InfoSet{{Flag::Present}});
  int absent = gv.info_index(InfoSet{{Flag::Absent}});
  for (StateId s = 0; s < rig.mdp.num_states(); ++s) {
    if (s == rig.mdp.true_goal()) continue;
    double term = std::max(gv.value(s, performed), gv.value(s, absent));
    double backup = std::numeric_limits<double>::infinity();
    for (ActionId a = rig.mdp.action_begin(s); a < rig.mdp.action_end(s); ++a)
      backup = std::min(backup, rig.mdp.action(a).cost +
                                    0.9 * gv.value(rig.mdp.action(a).to, unknown));
    CHECK(gv.value(s, unknown) == doctest::Approx(std::max(term, backup)).epsilon(1e-9));
  }
}

TEST_CASE("irrelevant interventions leave the all-unknown value at the resolved value") {
  // goal route 0-1-2; the intervention removes 4, which only trims the
  // longer 0-3-4-2 alternative nobody optimal uses
  auto g = make_graph(5, {{0, 1}, {1, 2}, {0, 3}, {3, 4}, {4, 2}});
  Mdp m = Mdp::from_graph(g, 0, 0.9, {2}, 2);
  std::vector<Intervention> ivs{remove_states_intervention(*g, {4}, "trim")};
  GameValue gv = minimax_value_iteration(m, ivs, 0.0, 1e-12);
  int unknown = gv.info_index(InfoSet::all_unknown(1));
  int absent = gv.info_index(InfoSet{{Flag::Absent}});
  CHECK(gv.value(0, unknown) == doctest::Approx(gv.value(0, absent)).epsilon(1e-9));
}

TEST_CASE("states cut off from the goal record infinite values without failing") {
  // spur 3-4 reachable only through 3; removing 3 strands 4
  auto g = make_graph(5, {{0, 1}, {1, 2}, {0, 3}, {3, 4}});
  Mdp m = Mdp::from_graph(g, 0, 0.9, {2}, 2);
  std::vector<Intervention> ivs{remove_states_intervention(*g, {3}, "strand")};
  GameValue gv = minimax_value_iteration(m, ivs, 0.0, 1e-12);
  int performed = gv.info_index(InfoSet{{Flag::Present}});
  int unknown = gv.info_index(InfoSet::all_unknown(1));
  CHECK(std::isinf(gv.value(4, performed)));
  CHECK(std::isinf(gv.value(4, unknown)));  // the threat alone already traps 4
  CHECK(std::isfinite(gv.value(0, unknown)));
}

TEST_CASE("two interventions match the game-tree oracle everywhere") {
  // ring with two chokepoints and a safe middle spine
  auto g = make_graph(8, {{0, 1}, {1, 2}, {2, 3}, {0, 4}, {4, 5}, {5, 3}, {0, 6}, {6, 7},
                          {7, 3}});
  Mdp m = Mdp::from_graph(g, 0, 0.9, {3}, 3);
  std::vector<Intervention> ivs{remove_states_intervention(*g, {1}, "cut_a"),
                                remove_states_intervention(*g, {4}, "cut_b")};
  GameValue gv = minimax_value_iteration(m, ivs, 0.0, 1e-13);
  int depth = GameTreeOracle::depth_for(0.9, 1.0 / (1 - 0.9), 1e-11);
  GameTreeOracle oracle(m, ivs, default_decoy_penalty(m), depth);
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (const InfoSet& info : gv.info_sets()) {
      double got = gv.value(s, gv.info_index(info));
      double want = oracle.value(s, info, depth);
      if (std::isinf(got))
        CHECK(want > 1.0 / (1 - 0.9) - 2.0);  // horizon-capped dither cost
      else
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("adding interventions never lowers the conservative value") {
  CorridorRig rig;
  GameValue k1 = minimax_value_iteration(rig.mdp, rig.ivs, 0.0, 1e-12);
  auto ivs2 = rig.ivs;
  ivs2.push_back(remove_states_intervention(*rig.graph, {5}, "cut_detour"));
  GameValue k2 = minimax_value_iteration(rig.mdp, ivs2, 0.0, 1e-12);
  double v1 = k1.value(0, k1.info_index(InfoSet::all_unknown(1)));
  double v2 = k2.value(0, k2.info_index(InfoSet::all_unknown(2)));
  CHECK(v2 >= v1 - 1e-9);
}

TEST_CASE("rollouts: quiet observer, immediate perform, and full security sweep") {
  CorridorRig rig;
  GameValue gv = minimax_value_iteration(rig.mdp, rig.ivs, 0.0, 1e-13);
  double v_star = gv.value(0, gv.info_index(InfoSet::all_unknown(1)));

  CppRollout quiet = cpp_policy_rollout(rig.mdp, rig.ivs, gv, {}, 200);
  CHECK(quiet.reached_goal);
  CHECK(quiet.discounted_cost <= v_star + 1e-9);
  CHECK(quiet.trajectory.front() == 0);
  CHECK(quiet.trajectory.back() == 3);

  Schedule at_zero{{0, {ObserverMove::Type::Perform, 0}}};
  CppRollout cut = cpp_policy_rollout(rig.mdp, rig.ivs, gv, at_zero, 200);
  CHECK(cut.reached_goal);
  InducedMdp induced = build_induced_mdp(rig.mdp, rig.ivs[0]);
  CHECK(cut.edge_cost == doctest::Approx(min_cost_path(induced, 0, 3).cost));

  double worst = 0.0;
  for (const Schedule& schedule : all_schedules(1, 8)) {
    CppRollout r = cpp_policy_rollout(rig.mdp, rig.ivs, gv, schedule, 200);
    CHECK(r.reached_goal);
    CHECK(r.discounted_cost <= v_star + 1e-6);
    worst = std::max(worst, r.discounted_cost);
  }
  CHECK(worst == doctest::Approx(v_star).epsilon(1e-6));  // the bound is tight here
}

TEST_CASE("two-intervention security against every enumerated schedule") {
  auto g = make_graph(8, {{0, 1}, {1, 2}, {2, 3}, {0, 4}, {4, 5}, {5, 3}, {0, 6}, {6, 7},
                          {7, 3}});
  Mdp m = Mdp::from_graph(g, 0, 0.9, {3}, 3);
  std::vector<Intervention> ivs{remove_states_intervention(*g, {1}, "cut_a"),
                                remove_states_intervention(*g, {4}, "cut_b")};
  GameValue gv = minimax_value_iteration(m, ivs, 0.0, 1e-13);
  double v_star = gv.value(0, gv.info_index(InfoSet::all_unknown(2)));
  for (const Schedule& schedule : all_schedules(2, 6)) {
    CppRollout r = cpp_policy_rollout(m, ivs, gv, schedule, 200);
    CHECK(r.reached_goal);
    CHECK(r.discounted_cost <= v_star + 1e-6);
  }
}

TEST_CASE("schedules violating the one-intervention rule are rejected") {
  CorridorRig rig;
  GameValue gv = minimax_value_iteration(rig.mdp, rig.ivs, 0.0, 1e-10);
  Schedule twice{{0, {ObserverMove::Type::Reveal, 0}}, {1, {ObserverMove::Type::Perform, 0}}};
  CHECK_THROWS_AS(cpp_policy_rollout(rig.mdp, rig.ivs, gv, twice, 50), InputError);

  auto g2 = make_graph(8, {{0, 1}, {1, 2}, {2, 3}, {0, 4}, {4, 5}, {5, 3}, {0, 6}, {6, 7},
                           {7, 3}});
  Mdp m2 = Mdp::from_graph(g2, 0, 0.9, {3}, 3);
  std::vector<Intervention> ivs2{remove_states_intervention(*g2, {1}, "a"),
                                 remove_states_intervention(*g2, {4}, "b")};
  GameValue gv2 = minimax_value_iteration(m2, ivs2, 0.0, 1e-10);
  Schedule two_performs{{0, {ObserverMove::Type::Perform, 0}},
                        {2, {ObserverMove::Type::Perform, 1}}};
  CHECK_THROWS_AS(cpp_policy_rollout(m2, ivs2, gv2, two_performs, 50), InputError);
}

TEST_CASE("decoy penalties keep conservative paths away from decoy goals") {
  // straight line to G* with a decoy on the way would force the penalty;
  // the planner must route around via the longer arc
  auto g = make_graph(6, {{0, 1}, {1, 2}, {0, 3}, {3, 4}, {4, 5}, {5, 2}});
  Mdp m = Mdp::from_graph(g, 0, 0.9, {2, 1}, 2);  // decoy at 1 blocks the short route
  GameValue gv = minimax_value_iteration(m, {}, 0.0, 1e-12);
  CppRollout r = cpp_policy_rollout(m, {}, gv, {}, 100);
  CHECK(r.reached_goal);
  for (StateId s : r.trajectory) CHECK(s != 1);
  CHECK(r.edge_cost == doctest::Approx(4.0));
}
