#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "dpp/errors.hpp"
#include "dpp/lp_planner.hpp"
#include "dpp/observer.hpp"
#include "test_support.hpp"

using namespace dpp;
using namespace dpp::testing;

namespace {

std::vector<double> constant_field(const Mdp& m, double value) {
  return std::vector<double>(m.num_actions(), value);
}

double lambda_of(const Mdp& m, const OccupancyMeasure& occ, StateId from, StateId to) {
  ActionId a = m.action_towards(from, to);
  REQUIRE(a != kNoAction);
  for (std::size_t v = 0; v < occ.var_actions.size(); ++v)
    if (occ.var_actions[v] == a) return occ.lambda[v];
  return 0.0;
}

// Flow-equation oracle: the occupancy a policy induces, via the power series
// mu = sum_k (P_pi^T)^k e_{s0} truncated at convergence.
std::vector<double> induced_occupancy(const Mdp& m, const Policy& pi) {
  std::vector<double> mu(m.num_states(), 0.0), layer(m.num_states(), 0.0);
  layer[m.start()] = 1.0;
  for (int k = 0; k < 100000; ++k) {
    double total = 0.0;
    std::vector<double> next(m.num_states(), 0.0);
    for (StateId s = 0; s < m.num_states(); ++s) {
      if (layer[s] <= 0.0) continue;
      mu[s] += layer[s];
      if (m.is_goal(s)) continue;  // absorbed
      for (const auto& [a, prob] : pi.action_probabilities[s])
        for (const TransitionEntry* t = m.transition_begin(a); t != m.transition_end(a); ++t)
          next[t->to] += layer[s] * prob * t->prob;
      total += layer[s];
    }
    layer.swap(next);
    if (total < 1e-13) break;
  }
  return mu;
}

// Enumerates all simple paths start->goal and returns the cheapest under the
// per-state field g (goal state itself never accrues cost).
double best_simple_path_cost(const Mdp& m, std::span<const double> g_state) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<StateId> path{m.start()};
  std::vector<std::uint8_t> used(m.num_states(), 0);
  used[m.start()] = 1;
  std::function<void(StateId, double)> dfs = [&](StateId s, double cost) {
    if (cost >= best) return;
    if (s == m.true_goal()) {
      best = cost;
      return;
    }
    if (m.is_goal(s)) return;  // absorbing decoy
    for (ActionId a = m.action_begin(s); a < m.action_end(s); ++a) {
      StateId t = m.action(a).to;
      if (used[t]) continue;
      used[t] = 1;
      path.push_back(t);
      dfs(t, cost + g_state[s]);
      path.pop_back();
      used[t] = 0;
    }
  };
  dfs(m.start(), 0.0);
  return best;
}

}  // namespace

TEST_CASE("two-state chain carries unit flow") {
  Mdp m = make_mdp(line_graph(2), 0, {1}, 1);
  auto g = constant_field(m, 0.7);
  OccupancyMeasure occ = solve_stage1(m, g);
  CHECK(lambda_of(m, occ, 0, 1) == doctest::Approx(1.0));
  CHECK(occ.objective_value == doctest::Approx(0.7));
  CHECK(occ.reach_value == doctest::Approx(1.0));
}

TEST_CASE("three-state line with unit costs routes straight through") {
  Mdp m = make_mdp(line_graph(3), 0, {2}, 2);
  auto g = constant_field(m, 1.0);
  OccupancyMeasure occ = solve_stage1(m, g);
  CHECK(occ.objective_value == doctest::Approx(2.0));
  CHECK(lambda_of(m, occ, 0, 1) == doctest::Approx(1.0));
  CHECK(lambda_of(m, occ, 1, 2) == doctest::Approx(1.0));
  CHECK(lambda_of(m, occ, 1, 0) == doctest::Approx(0.0));
}

TEST_CASE("zero cost fields leave stage one at zero and stage two tightens mass") {
  Mdp m = make_mdp(line_graph(3), 0, {2}, 2);
  auto g = constant_field(m, 0.0);
  OccupancyMeasure s1 = solve_stage1(m, g);
  CHECK(s1.objective_value == doctest::Approx(0.0));
  OccupancyMeasure s2 = solve_stage2(m, g, s1.objective_value);
  CHECK(s2.total_mass == doctest::Approx(2.0));
  CHECK(s2.total_mass <= s1.total_mass + 1e-9);
  CHECK(lambda_of(m, s2, 1, 0) == doctest::Approx(0.0));
}

TEST_CASE("stage two is idempotent on already-minimal flows") {
  Mdp m = make_mdp(line_graph(4), 0, {3}, 3);
  auto g = constant_field(m, 1.0);
  OccupancyMeasure s1 = solve_stage1(m, g);
  OccupancyMeasure s2 = solve_stage2(m, g, s1.objective_value);
  CHECK(s2.total_mass == doctest::Approx(s1.total_mass).epsilon(1e-9));
  CHECK(s2.objective_value <= s1.objective_value + 1e-6);
}

TEST_CASE("zero-cost cul-de-sac carries no stage-two occupancy") {
  // 0 - 1 - 2(G*), with dead-end 3 hanging off 1
  auto gr = make_graph(4, {{0, 1}, {1, 2}, {1, 3}});
  Mdp m = Mdp::from_graph(gr, 0, 0.95, {2}, 2);
  auto g = constant_field(m, 0.0);
  OccupancyMeasure s2 = solve_stage2(m, g, solve_stage1(m, g).objective_value);
  CHECK(lambda_of(m, s2, 1, 3) == doctest::Approx(0.0));
  CHECK(lambda_of(m, s2, 3, 1) == doctest::Approx(0.0));
}

TEST_CASE("recovered policies normalize rows and keep deterministic flows deterministic") {
  Mdp m = make_mdp(line_graph(3), 0, {2}, 2);
  auto g = constant_field(m, 1.0);
  Policy pi = recover_policy(m, solve_stage2(m, g, solve_stage1(m, g).objective_value));
  REQUIRE(pi.has_row(0));
  REQUIRE(pi.action_probabilities[0].size() == 1);
  CHECK(pi.action_probabilities[0][0].second == 1.0);
  CHECK(m.action(pi.action_probabilities[0][0].first).to == 1);

  // fabricated split row
  OccupancyMeasure occ;
  occ.var_actions = {m.action_towards(1, 0), m.action_towards(1, 2)};
  occ.lambda = {0.5, 0.5};
  Policy split = recover_policy(m, occ);
  REQUIRE(split.action_probabilities[1].size() == 2);
  CHECK(split.action_probabilities[1][0].second == doctest::Approx(0.5));
  CHECK(split.action_probabilities[1][1].second == doctest::Approx(0.5));
}

TEST_CASE("policy -> occupancy round trip recovers lambda") {
  // asymmetric costs force a nontrivial flow on a 3x3 grid with slip
  Mdp m = make_mdp(open_grid(3, 3), 0, {8}, 8, 0.95, 0.1);
  std::vector<double> g(m.num_actions());
  std::mt19937_64 rng(5);
  for (double& x : g) x = 0.25 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
  OccupancyMeasure occ = solve_stage2(m, g, solve_stage1(m, g).objective_value);
  Policy pi = recover_policy(m, occ);
  auto mu = induced_occupancy(m, pi);
  for (std::size_t v = 0; v < occ.var_actions.size(); ++v) {
    ActionId a = occ.var_actions[v];
    StateId s = m.action(a).from;
    double row_total = occ.lambda_at_state(m, s);
    double pi_a = 0.0;
    for (const auto& [pa, pp] : pi.action_probabilities[s])
      if (pa == a) pi_a = pp;
    double expect = row_total < 1e-9 ? 0.0 : mu[s] * pi_a;
    CHECK(occ.lambda[v] == doctest::Approx(expect).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("plan with zero raw field is a shortest path policy") {
  Mdp m = make_mdp(open_grid(4, 4), 0, {15}, 15, 0.95);
  DeceptionCostField field;
  field.kind = DeceptionKind::VobObserver;
  field.gamma_a = 1.0;
  field.raw.assign(m.num_states(), 0.0);
  field.discounted.assign(m.num_actions(), 0.0);
  Policy pi = plan(m, field);
  // walk the argmax actions; must reach the goal in exactly 6 steps
  StateId s = 0;
  for (int steps = 0; s != 15; ++steps) {
    REQUIRE(steps < 6);
    REQUIRE(pi.has_row(s));
    ActionId best = pi.action_probabilities[s][0].first;
    double best_p = pi.action_probabilities[s][0].second;
    for (const auto& [a, p] : pi.action_probabilities[s])
      if (p > best_p) best = a, best_p = p;
    s = m.action(best).to;
  }
}

TEST_CASE("identical damage columns reduce the vob plan to mass minimization") {
  Mdp m = make_mdp(open_grid(3, 3), 0, {8, 6}, 8, 0.95);
  auto hops = hop_distance(m.graph(), 0);
  DeceptionCostField field;
  field.kind = DeceptionKind::VobObserver;
  field.gamma_a = 0.7;
  field.raw.assign(m.num_states(), 3.25);  // constant VoB over states
  field.discounted.resize(m.num_actions());
  for (ActionId a = 0; a < m.num_actions(); ++a)
    field.discounted[a] = std::pow(0.7, hops[m.action(a).from]) * 3.25;
  Policy pi = plan(m, field);
  StateId s = 0;
  int steps = 0;
  while (s != 8) {
    REQUIRE(pi.has_row(s));
    s = m.action(pi.action_probabilities[s][0].first).to;
    REQUIRE(++steps <= 4);
  }
  CHECK(steps == 4);  // hop-shortest route
}

TEST_CASE("lp optimum matches exhaustive simple-path enumeration with a rejoin detour") {
  // decoy branch rejoins the goal route: 0(D) - 1 - 2(start) - 3 - 4 - 5(G*)
  // plus shortcut 1-4. Belief-shaped costs make the decoy-side route cheap.
  auto gr = make_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 4}});
  Mdp m = Mdp::from_graph(gr, 2, 0.95, {0, 5}, 5);
  std::vector<ValueTable> tables;
  for (StateId g : m.goals()) tables.push_back(softmax_value_iteration(m, g, {1.0, 1e-11, 0}));
  BeliefTable beliefs = build_belief_table(m, tables, uniform_prior(2));
  auto raw = exaggeration_cost(beliefs, 5);
  auto hops = hop_distance(*gr, 2);
  for (double gamma_a : {1.0, 0.5, 0.2}) {
    auto g = discount_field(m, raw, hops, gamma_a);
    OccupancyMeasure s1 = solve_stage1(m, g);
    std::vector<double> g_state(m.num_states(), 0.0);
    for (StateId s = 0; s < m.num_states(); ++s)
      if (s != 5 && s != 0) g_state[s] = g[m.action_begin(s)];
    CHECK(s1.objective_value ==
          doctest::Approx(best_simple_path_cost(m, g_state)).epsilon(1e-8));
  }
  // at strong discounting the optimal route detours via the decoy side
  auto g = discount_field(m, raw, hops, 0.2);
  OccupancyMeasure s2 = solve_stage2(m, g, solve_stage1(m, g).objective_value);
  CHECK(lambda_of(m, s2, 2, 1) == doctest::Approx(1.0));  // leaves toward the decoy
  CHECK(lambda_of(m, s2, 1, 4) == doctest::Approx(1.0));  // rejoins via the shortcut
}

TEST_CASE("positive rescaling of g preserves the optimal support") {
  Mdp m = make_mdp(open_grid(3, 3), 0, {8, 2}, 8, 0.95);
  std::vector<double> g(m.num_actions());
  std::mt19937_64 rng(9);
  for (double& x : g) x = 0.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
  auto scaled = g;
  for (double& x : scaled) x *= 37.5;
  OccupancyMeasure a = solve_stage2(m, g, solve_stage1(m, g).objective_value);
  OccupancyMeasure b = solve_stage2(m, scaled, solve_stage1(m, scaled).objective_value);
  for (std::size_t v = 0; v < a.lambda.size(); ++v)
    CHECK((a.lambda[v] > 1e-9) == (b.lambda[v] > 1e-9));
}

TEST_CASE("validators catch corrupted occupancies") {
  Mdp m = make_mdp(line_graph(3), 0, {2}, 2);
  auto g = constant_field(m, 1.0);
  OccupancyMeasure occ = solve_stage1(m, g);
  occ.lambda[0] += 0.5;  // break conservation
  CHECK_THROWS_AS(validate_occupancy(m, g, occ), NumericalError);
}

TEST_CASE("unreached states get a shortest-path fallback row") {
  Mdp m = make_mdp(open_grid(3, 3), 0, {8}, 8, 0.95);
  auto g = constant_field(m, 1.0);
  Policy pi = recover_policy(m, solve_stage2(m, g, solve_stage1(m, g).objective_value));
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (m.is_goal(s)) continue;
    REQUIRE(pi.has_row(s));  // every non-goal state can act
    double total = 0.0;
    for (const auto& [a, p] : pi.action_probabilities[s]) total += p;
    CHECK(std::fabs(total - 1.0) <= 1e-12);
  }
}
