#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "dpp/graph_mdp.hpp"
#include "dpp/objectives.hpp"
#include "dpp/simplex.hpp"

namespace dpp {

// State-action occupancy over the non-goal states of the base MDP. Variables
// are the actions available at non-goal present states, in ActionId order.
struct OccupancyMeasure {
  std::vector<ActionId> var_actions;  // variable -> base ActionId
  std::vector<double> lambda;         // aligned with var_actions
  double objective_value = 0.0;       // sum g(s,a) * lambda(s,a)
  double total_mass = 0.0;            // sum lambda(s,a)
  double reach_value = 0.0;           // sum lambda(s,a) * p(G*|s,a)

  double lambda_at_state(const Mdp& mdp, StateId s) const;  // row total
};

struct Policy {
  // Per state: (action, probability) rows; empty for goal/absent states and
  // for states with no route to the true goal.
  std::vector<std::vector<std::pair<ActionId, double>>> action_probabilities;
  std::vector<std::uint8_t> support;  // positive-occupancy states

  bool has_row(StateId s) const { return !action_probabilities[s].empty(); }
};

// Occupancy LP of the deceptive planning problem:
//   min sum g(s,a) lambda(s,a)
//   s.t. out-flow(s) - in-flow(s) = 1{s0}(s)   for every non-goal state
//        sum lambda(s,a) p(G*|s,a) = R_max(G*)
//        lambda >= 0
OccupancyMeasure solve_stage1(const Mdp& mdp, std::span<const double> g);

// Secondary LP over the stage-1 optimal set: minimize total occupancy mass
// subject to the deception objective staying within 1e-7 of v_star.
OccupancyMeasure solve_stage2(const Mdp& mdp, std::span<const double> g, double v_star);

// pi(a|s) = lambda(s,a) / row total; rows with mass below 1e-9 fall back to
// the first step of the minimum-cost path to the true goal.
Policy recover_policy(const Mdp& mdp, const OccupancyMeasure& occupancy);

Policy plan(const Mdp& mdp, const DeceptionCostField& field);

// Independent feasibility check (flow residuals, reach constraint,
// nonnegativity); throws NumericalError when out of tolerance.
void validate_occupancy(const Mdp& mdp, std::span<const double> g,
                        const OccupancyMeasure& occupancy, double flow_tol = 1e-6);

// Stage-1 LP in CPLEX LP text format for external cross-checks.
void dump_stage1_lp(std::ostream& os, const Mdp& mdp, std::span<const double> g);

}  // namespace dpp
