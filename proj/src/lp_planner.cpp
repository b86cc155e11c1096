#include "dpp/lp_planner.hpp"

#include <cmath>
#include <ostream>

#include "dpp/errors.hpp"

namespace dpp {

namespace {

constexpr double kStage2Relax = 1e-7;

struct LpLayout {
  std::vector<ActionId> var_actions;
  std::vector<int> action_var;   // base ActionId -> variable index or -1
  std::vector<int> state_row;    // state -> flow row index or -1
  std::size_t num_flow_rows = 0;
};

LpLayout make_layout(const Mdp& mdp) {
  LpLayout layout;
  layout.action_var.assign(mdp.num_actions(), -1);
  layout.state_row.assign(mdp.num_states(), -1);
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.contains(s) || mdp.is_goal(s)) continue;
    layout.state_row[s] = static_cast<int>(layout.num_flow_rows++);
    for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a) {
      layout.action_var[a] = static_cast<int>(layout.var_actions.size());
      layout.var_actions.push_back(a);
    }
  }
  return layout;
}

// Shared constraint system of opts. (8)/(9): flow conservation on non-goal
// states plus the reach-probability row.
lp::Problem base_problem(const Mdp& mdp, const LpLayout& layout) {
  const std::size_t nv = layout.var_actions.size();
  lp::Problem p;
  p.c.assign(nv, 0.0);
  p.rows.assign(layout.num_flow_rows + 1, std::vector<double>(nv, 0.0));
  p.rhs.assign(layout.num_flow_rows + 1, 0.0);

  for (std::size_t v = 0; v < nv; ++v) {
    const DirectedAction& da = mdp.action(layout.var_actions[v]);
    p.rows[layout.state_row[da.from]][v] += 1.0;  // out-flow
    for (const TransitionEntry* t = mdp.transition_begin(layout.var_actions[v]);
         t != mdp.transition_end(layout.var_actions[v]); ++t) {
      if (layout.state_row[t->to] >= 0)
        p.rows[layout.state_row[t->to]][v] -= t->prob;  // in-flow
      if (t->to == mdp.true_goal())
        p.rows[layout.num_flow_rows][v] += t->prob;  // r(s,a)
    }
  }
  p.rhs[layout.state_row[mdp.start()]] = 1.0;
  p.rhs[layout.num_flow_rows] = max_reach_probability(mdp, mdp.true_goal());
  return p;
}

void name_problem(lp::Problem& p, const Mdp& mdp, const LpLayout& layout) {
  const auto& names = mdp.graph().state_names;
  for (ActionId a : layout.var_actions) {
    const DirectedAction& da = mdp.action(a);
    p.var_names.push_back("lam_" + names[da.from] + "_" + names[da.to]);
  }
  p.row_names.assign(p.num_rows(), "");
  for (StateId s = 0; s < mdp.num_states(); ++s)
    if (layout.state_row[s] >= 0) p.row_names[layout.state_row[s]] = "flow_" + names[s];
  p.row_names[layout.num_flow_rows] = "reach";
}

OccupancyMeasure finish(const Mdp& mdp, const LpLayout& layout, std::span<const double> g,
                        const lp::Solution& sol) {
  OccupancyMeasure occ;
  occ.var_actions = layout.var_actions;
  occ.lambda.assign(layout.var_actions.size(), 0.0);
  for (std::size_t v = 0; v < layout.var_actions.size(); ++v)
    occ.lambda[v] = sol.x[v];
  for (std::size_t v = 0; v < occ.lambda.size(); ++v) {
    occ.objective_value += g[layout.var_actions[v]] * occ.lambda[v];
    occ.total_mass += occ.lambda[v];
    for (const TransitionEntry* t = mdp.transition_begin(layout.var_actions[v]);
         t != mdp.transition_end(layout.var_actions[v]); ++t)
      if (t->to == mdp.true_goal()) occ.reach_value += t->prob * occ.lambda[v];
  }
  return occ;
}

void check_solved(const lp::Solution& sol, const char* stage) {
  switch (sol.status) {
    case lp::Status::Optimal:
      return;
    case lp::Status::Infeasible:
      throw NumericalError("lp_infeasible",
                           std::string(stage) + " LP infeasible (" + sol.message + ")");
    case lp::Status::Unbounded:
      throw NumericalError("lp_unbounded", std::string(stage) + " LP unbounded: " +
                                               "a zero-cost recurrent flow exists (" +
                                               sol.message + ")");
    case lp::Status::IterationLimit:
      throw NumericalError("lp_iterations",
                           std::string(stage) + " LP hit the iteration limit");
  }
}

}  // namespace

double OccupancyMeasure::lambda_at_state(const Mdp& mdp, StateId s) const {
  double total = 0.0;
  for (std::size_t v = 0; v < var_actions.size(); ++v)
    if (mdp.action(var_actions[v]).from == s) total += lambda[v];
  return total;
}

OccupancyMeasure solve_stage1(const Mdp& mdp, std::span<const double> g) {
  if (g.size() != mdp.num_actions())
    throw InputError("lp_cost_shape", "cost vector does not match the action count");
  LpLayout layout = make_layout(mdp);
  lp::Problem p = base_problem(mdp, layout);
  for (std::size_t v = 0; v < layout.var_actions.size(); ++v)
    p.c[v] = g[layout.var_actions[v]];
  lp::Solution sol = lp::solve(p);
  check_solved(sol, "stage-1");
  OccupancyMeasure occ = finish(mdp, layout, g, sol);
  validate_occupancy(mdp, g, occ);
  return occ;
}

OccupancyMeasure solve_stage2(const Mdp& mdp, std::span<const double> g, double v_star) {
  if (g.size() != mdp.num_actions())
    throw InputError("lp_cost_shape", "cost vector does not match the action count");
  LpLayout layout = make_layout(mdp);
  lp::Problem p = base_problem(mdp, layout);
  const std::size_t nv = layout.var_actions.size();
  // objective: total occupancy mass
  for (std::size_t v = 0; v < nv; ++v) p.c[v] = 1.0;
  // deception objective pinned to v*: sum g lambda + slack = v* + relax
  p.c.push_back(0.0);
  for (auto& row : p.rows) row.push_back(0.0);
  std::vector<double> vrow(nv + 1, 0.0);
  for (std::size_t v = 0; v < nv; ++v) vrow[v] = g[layout.var_actions[v]];
  vrow[nv] = 1.0;
  p.rows.push_back(std::move(vrow));
  p.rhs.push_back(v_star + kStage2Relax);
  lp::Solution sol = lp::solve(p);
  if (sol.status == lp::Status::Infeasible)
    throw NumericalError("lp_stage2_infeasible",
                         "stage-2 LP infeasible at v*=" + std::to_string(v_star) +
                             "; the stage-1 optimum or the relaxation tolerance needs review");
  check_solved(sol, "stage-2");
  OccupancyMeasure occ = finish(mdp, layout, g, sol);
  validate_occupancy(mdp, g, occ);
  if (occ.objective_value > v_star + 1e-6 * std::max(1.0, std::fabs(v_star)))
    throw NumericalError("lp_stage2_drift", "stage-2 flow lost the stage-1 optimum");
  return occ;
}

Policy recover_policy(const Mdp& mdp, const OccupancyMeasure& occ) {
  Policy policy;
  policy.action_probabilities.assign(mdp.num_states(), {});
  policy.support.assign(mdp.num_states(), 0);
  std::vector<double> per_action(mdp.num_actions(), 0.0);
  for (std::size_t v = 0; v < occ.var_actions.size(); ++v)
    per_action[occ.var_actions[v]] = occ.lambda[v];
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.contains(s) || mdp.is_goal(s)) continue;
    double total = 0.0;
    for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a)
      total += per_action[a];
    if (total < 1e-9) continue;
    double kept = 0.0;
    auto& row = policy.action_probabilities[s];
    for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a) {
      if (per_action[a] <= 1e-12 * total) continue;  // degenerate-pivot dust
      row.push_back({a, per_action[a]});
      kept += per_action[a];
    }
    for (auto& [a, prob] : row) prob /= kept;
    policy.support[s] = 1;
  }
  // Off-support states fall back to the first hop of the min-cost route to
  // G*; rollouts that drift there stay well-defined.
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.contains(s) || mdp.is_goal(s) || policy.support[s]) continue;
    PathResult path = min_cost_path(mdp, s, mdp.true_goal());
    if (path.states.size() < 2) continue;  // no route; row stays empty
    ActionId a = mdp.action_towards(s, path.states[1]);
    if (a != kNoAction) policy.action_probabilities[s].push_back({a, 1.0});
  }
  return policy;
}

Policy plan(const Mdp& mdp, const DeceptionCostField& field) {
  OccupancyMeasure stage1 = solve_stage1(mdp, field.discounted);
  OccupancyMeasure stage2 = solve_stage2(mdp, field.discounted, stage1.objective_value);
  return recover_policy(mdp, stage2);
}

void validate_occupancy(const Mdp& mdp, std::span<const double> g,
                        const OccupancyMeasure& occ, double flow_tol) {
  std::vector<double> net(mdp.num_states(), 0.0);
  double reach = 0.0;
  for (std::size_t v = 0; v < occ.var_actions.size(); ++v) {
    double lam = occ.lambda[v];
    if (lam < -1e-9)
      throw NumericalError("lp_negative_mass", "occupancy fell below zero");
    const ActionId a = occ.var_actions[v];
    net[mdp.action(a).from] += lam;
    for (const TransitionEntry* t = mdp.transition_begin(a); t != mdp.transition_end(a); ++t) {
      if (!mdp.is_goal(t->to)) net[t->to] -= t->prob * lam;
      if (t->to == mdp.true_goal()) reach += t->prob * lam;
    }
  }
  const double r_max = max_reach_probability(mdp, mdp.true_goal());
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.contains(s) || mdp.is_goal(s)) continue;
    double expect = s == mdp.start() ? 1.0 : 0.0;
    if (std::fabs(net[s] - expect) > flow_tol)
      throw NumericalError("lp_flow_residual",
                           "flow residual " + std::to_string(net[s] - expect) + " at state " +
                               mdp.graph().state_names[s]);
  }
  if (std::fabs(reach - r_max) > flow_tol)
    throw NumericalError("lp_reach_residual",
                         "reach constraint off by " + std::to_string(reach - r_max));
  (void)g;
}

void dump_stage1_lp(std::ostream& os, const Mdp& mdp, std::span<const double> g) {
  LpLayout layout = make_layout(mdp);
  lp::Problem p = base_problem(mdp, layout);
  for (std::size_t v = 0; v < layout.var_actions.size(); ++v)
    p.c[v] = g[layout.var_actions[v]];
  name_problem(p, mdp, layout);
  lp::write_lp_format(os, p, "deceptive-planning stage 1");
}

}  // namespace dpp
