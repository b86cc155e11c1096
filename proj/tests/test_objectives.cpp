#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dpp/errors.hpp"
#include "dpp/objectives.hpp"
#include "test_support.hpp"

using namespace dpp;
using namespace dpp::testing;

namespace {

// Line 0-1-2-3 with start 0 and goals {2 (decoy), 3 (true)}. Value tables are
// fabricated so the posterior at state 1 is exactly `at_state1` for the decoy
// (huge gaps drive the complement to exact 0 via underflow).
struct Rig {
  Mdp mdp;
  BeliefTable beliefs;

  explicit Rig(double decoy_gap, double star_gap)
      : mdp(make_mdp(line_graph(4), 0, {2, 3}, 3, 0.9)) {
    std::vector<ValueTable> tables(2);
    tables[0].values = {0.0, decoy_gap, 0.0, 0.0};
    tables[1].values = {0.0, star_gap, 0.0, 0.0};
    beliefs = build_belief_table(mdp, tables, {0.5, 0.5});
  }
};

CostMatrix damage_matrix(std::vector<StateId> goals, std::vector<std::vector<double>> damage) {
  CostMatrix m(std::move(goals), damage.size());
  for (std::size_t i = 0; i < damage.size(); ++i)
    for (std::size_t g = 0; g < damage[i].size(); ++g)
      m.set_entry(i, g, -damage[i][g]);  // entries hold J = -damage
  return m;
}

}  // namespace

TEST_CASE("exaggeration endpoints and midpoint") {
  // decoy certain -> cost 0
  CHECK(exaggeration_cost(Rig(1000.0, 0.0).beliefs, 3)[1] == 0.0);
  // true goal certain -> cost 2
  CHECK(exaggeration_cost(Rig(0.0, 1000.0).beliefs, 3)[1] == 2.0);
  // split beliefs -> cost 1
  CHECK(exaggeration_cost(Rig(0.0, 0.0).beliefs, 3)[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exaggeration needs a decoy") {
  Mdp m = make_mdp(line_graph(3), 0, {2}, 2);
  std::vector<ValueTable> tables(1);
  tables[0].values = {0.0, 0.0, 0.0};
  BeliefTable bt = build_belief_table(m, tables, {1.0});
  CHECK_THROWS_AS(exaggeration_cost(bt, 2), InputError);
}

TEST_CASE("ambiguity: uniform is zero, certainty doubles the gap, goals are zero") {
  Rig uniform(0.0, 0.0);
  auto amb = ambiguity_cost(uniform.beliefs, uniform.mdp.goals());
  CHECK(amb[1] == 0.0);

  Rig certain(1000.0, 0.0);  // posterior (1, 0) at state 1
  amb = ambiguity_cost(certain.beliefs, certain.mdp.goals());
  CHECK(amb[1] == 2.0);  // ordered pairs count the unit gap twice
  CHECK(amb[2] == 0.0);  // goal state
  CHECK(amb[3] == 0.0);

  // range bound: |G|*(|G|-1)
  CHECK(amb[1] <= 2.0 * 1.0 + 1e-12);
}

TEST_CASE("vob_observer: single intervention, degenerate beliefs, hand 2x2 matrix") {
  CostMatrix cm = damage_matrix({2, 3}, {{4.0, 0.0}, {1.0, 1.0}});

  Rig split(0.0, 0.0);  // (0.5, 0.5) at state 1
  auto raw = vob_observer_cost(split.beliefs, cm);
  CHECK(raw[1] == doctest::Approx(2.0).epsilon(1e-12));  // max(2, 1) picks i1
  CHECK(argmax_damage(cm, split.beliefs.row(1)) == 0);

  CostMatrix single = damage_matrix({2, 3}, {{1.0, 1.0}});
  raw = vob_observer_cost(split.beliefs, single);
  CHECK(raw[1] == doctest::Approx(1.0).epsilon(1e-12));

  Rig decoy_sure(1000.0, 0.0);  // belief concentrated on goal col 0
  raw = vob_observer_cost(decoy_sure.beliefs, cm);
  CHECK(raw[1] == doctest::Approx(4.0).epsilon(1e-12));  // max_i damage(i, G0)
}

TEST_CASE("vob_observer dominates every fixed intervention and is convex in the row") {
  std::mt19937_64 rng(3);
  auto unif = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  CostMatrix cm = damage_matrix(
      {0, 1, 2}, {{unif() * 9, unif() * 9, unif() * 9},
                  {unif() * 9, unif() * 9, unif() * 9},
                  {unif() * 9, unif() * 9, unif() * 9}});
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> b1{unif(), unif(), unif()}, b2{unif(), unif(), unif()};
    auto normalize = [](std::vector<double>& b) {
      double t = b[0] + b[1] + b[2];
      for (double& x : b) x /= t;
    };
    normalize(b1);
    normalize(b2);
    double theta = unif();
    std::vector<double> mix(3);
    for (int g = 0; g < 3; ++g) mix[g] = theta * b1[g] + (1 - theta) * b2[g];
    double v_mix = vob_observer_value(cm, mix);
    CHECK(v_mix <=
          theta * vob_observer_value(cm, b1) + (1 - theta) * vob_observer_value(cm, b2) + 1e-12);
    // max dominates each fixed intervention
    for (std::size_t i = 0; i < cm.num_interventions(); ++i) {
      double expected = 0.0;
      for (std::size_t g = 0; g < 3; ++g) expected += b1[g] * cm.damage(i, g);
      CHECK(vob_observer_value(cm, b1) >= expected - 1e-12);
    }
  }
}

TEST_CASE("vob_agent: induced intervention hits the true goal column") {
  // i0 damages the decoy route only; i1 damages the true goal
  CostMatrix cm = damage_matrix({2, 3}, {{5.0, 0.0}, {1.0, 3.0}});

  Rig decoy_sure(1000.0, 0.0);
  auto [raw, induced] = vob_agent_cost(decoy_sure.beliefs, cm, 3);
  CHECK(induced[1] == 0);  // observer lured to the decoy-damaging intervention
  CHECK(raw[1] == 0.0);    // which leaves the true goal untouched

  Rig star_sure(0.0, 1000.0);
  std::tie(raw, induced) = vob_agent_cost(star_sure.beliefs, cm, 3);
  CHECK(induced[1] == 1);
  CHECK(raw[1] == doctest::Approx(3.0).epsilon(1e-12));  // max_i damage(i, G*)

  CostMatrix single = damage_matrix({2, 3}, {{5.0, 2.5}});
  std::tie(raw, induced) = vob_agent_cost(star_sure.beliefs, single, 3);
  for (StateId s = 0; s < 4; ++s)
    if (decoy_sure.beliefs.defined(s)) CHECK(raw[s] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("vob_agent ties break toward the lowest intervention index") {
  CostMatrix cm = damage_matrix({2, 3}, {{2.0, 2.0}, {2.0, 2.0}});
  Rig split(0.0, 0.0);
  auto [raw, induced] = vob_agent_cost(split.beliefs, cm, 3);
  CHECK(induced[1] == 0);
}

TEST_CASE("vob_agent argmax is invariant to column-uniform damage shifts") {
  std::mt19937_64 rng(11);
  auto unif = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  Rig rig(1.3, 0.4);
  for (int rep = 0; rep < 50; ++rep) {
    CostMatrix cm = damage_matrix({2, 3}, {{unif() * 5, unif() * 5}, {unif() * 5, unif() * 5}});
    double c0 = unif() * 7, c1 = unif() * 7;
    CostMatrix shifted = damage_matrix({2, 3}, {{-(cm.j(0, 0)) + c0, -(cm.j(0, 1)) + c1},
                                                {-(cm.j(1, 0)) + c0, -(cm.j(1, 1)) + c1}});
    auto a = vob_agent_cost(rig.beliefs, cm, 3).second;
    auto b = vob_agent_cost(rig.beliefs, shifted, 3).second;
    CHECK(a == b);
  }
}

TEST_CASE("empty intervention sets are rejected") {
  Rig rig(0.0, 0.0);
  CostMatrix empty({2, 3}, 0);
  CHECK_THROWS_AS(vob_observer_cost(rig.beliefs, empty), InputError);
  CHECK_THROWS_AS(vob_agent_cost(rig.beliefs, empty, 3), InputError);
}

TEST_CASE("discount field arithmetic and sentinels") {
  Mdp m = make_mdp(line_graph(4), 0, {3}, 3);
  std::vector<double> raw{2.0, 2.0, 2.0, 0.0};
  std::vector<int> hops{0, 1, 3, 3};

  auto g1 = discount_field(m, raw, hops, 1.0);
  for (ActionId a = 0; a < m.num_actions(); ++a)
    CHECK(g1[a] == raw[m.action(a).from]);

  auto gh = discount_field(m, raw, hops, 0.5);
  ActionId at2 = m.action_begin(2);
  CHECK(gh[at2] == doctest::Approx(0.25));  // 0.5^3 * 2

  std::vector<double> zeros(4, 0.0);
  auto gz = discount_field(m, zeros, hops, 0.5);
  for (double v : gz) CHECK(v == 0.0);

  std::vector<int> far{0, kUnreachableHops, 1, 1};
  auto gu = discount_field(m, raw, far, 0.5);
  CHECK(gu[m.action_begin(1)] == 0.0);

  CHECK_THROWS_AS(discount_field(m, raw, hops, 0.0), InputError);
  CHECK_THROWS_AS(discount_field(m, raw, hops, 1.5), InputError);
}

TEST_CASE("cost fields broadcast the state cost over all its actions") {
  Mdp m = make_mdp(open_grid(3, 3), 0, {8, 6}, 8, 0.95);
  std::vector<ValueTable> tables;
  for (StateId g : m.goals()) tables.push_back(softmax_value_iteration(m, g, {1.0, 1e-10, 0}));
  BeliefTable bt = build_belief_table(m, tables, uniform_prior(2));
  CostMatrix cm = damage_matrix({8, 6}, {{1.0, 2.0}, {2.0, 1.0}});
  auto hops = hop_distance(m.graph(), 0);
  for (DeceptionKind kind : {DeceptionKind::Exaggeration, DeceptionKind::Ambiguity,
                             DeceptionKind::VobObserver, DeceptionKind::VobAgent}) {
    DeceptionCostField field = make_cost_field(kind, m, bt, cm, hops, 0.8);
    CHECK(field.kind == kind);
    for (StateId s = 0; s < m.num_states(); ++s)
      for (ActionId a = m.action_begin(s); a < m.action_end(s); ++a)
        CHECK(field.g(a) ==
              doctest::Approx(std::pow(0.8, hops[s]) * field.raw[s]).epsilon(1e-12));
  }
}
