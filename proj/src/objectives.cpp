#include "dpp/objectives.hpp"

#include <cmath>
#include <limits>

#include "dpp/errors.hpp"

namespace dpp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* kind_name(DeceptionKind kind) {
  switch (kind) {
    case DeceptionKind::Exaggeration: return "exaggeration";
    case DeceptionKind::Ambiguity: return "ambiguity";
    case DeceptionKind::VobObserver: return "vob_o";
    case DeceptionKind::VobAgent: return "vob_a";
  }
  return "?";
}

DeceptionKind kind_from_name(const std::string& name) {
  if (name == "exaggeration") return DeceptionKind::Exaggeration;
  if (name == "ambiguity") return DeceptionKind::Ambiguity;
  if (name == "vob_o") return DeceptionKind::VobObserver;
  if (name == "vob_a") return DeceptionKind::VobAgent;
  throw InputError("unknown_planner", "unknown planner name: " + name);
}

std::vector<double> exaggeration_cost(const BeliefTable& beliefs, StateId true_goal) {
  const int star = beliefs.goal_col(true_goal);
  if (star < 0) throw InputError("exaggeration_goal", "true goal missing from belief table");
  if (beliefs.goals().size() < 2)
    throw InputError("exaggeration_no_decoy", "exaggeration needs at least one decoy goal");
  std::vector<double> raw(beliefs.num_states(), kNaN);
  for (StateId s = 0; s < beliefs.num_states(); ++s) {
    if (!beliefs.defined(s)) continue;
    auto row = beliefs.row(s);
    double best_decoy = 0.0;
    for (std::size_t g = 0; g < row.size(); ++g)
      if (static_cast<int>(g) != star && row[g] > best_decoy) best_decoy = row[g];
    raw[s] = 1.0 + row[star] - best_decoy;
  }
  return raw;
}

std::vector<double> ambiguity_cost(const BeliefTable& beliefs, std::span<const StateId> goals) {
  std::vector<std::uint8_t> is_goal(beliefs.num_states(), 0);
  for (StateId g : goals) is_goal[g] = 1;
  std::vector<double> raw(beliefs.num_states(), kNaN);
  for (StateId s = 0; s < beliefs.num_states(); ++s) {
    if (!beliefs.defined(s)) continue;
    if (is_goal[s]) {
      raw[s] = 0.0;
      continue;
    }
    auto row = beliefs.row(s);
    double total = 0.0;  // ordered pairs, so each gap counts twice
    for (std::size_t g = 0; g < row.size(); ++g)
      for (std::size_t h = 0; h < row.size(); ++h) total += std::fabs(row[g] - row[h]);
    raw[s] = total;
  }
  return raw;
}

int argmax_damage(const CostMatrix& costs, std::span<const double> belief_row) {
  if (costs.num_interventions() == 0)
    throw InputError("empty_intervention_set", "no candidate interventions");
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < costs.num_interventions(); ++i) {
    double expected = 0.0;
    for (std::size_t g = 0; g < costs.num_goals(); ++g)
      expected += belief_row[g] * costs.damage(i, g);
    if (expected > best_value) {
      best_value = expected;
      best = static_cast<int>(i);
    }
  }
  return best;
}

double vob_observer_value(const CostMatrix& costs, std::span<const double> belief_row) {
  if (costs.num_interventions() == 0)
    throw InputError("empty_intervention_set", "no candidate interventions");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < costs.num_interventions(); ++i) {
    double expected = 0.0;
    for (std::size_t g = 0; g < costs.num_goals(); ++g)
      expected += belief_row[g] * costs.damage(i, g);
    if (expected > best) best = expected;
  }
  return best;
}

std::vector<double> vob_observer_cost(const BeliefTable& beliefs, const CostMatrix& costs) {
  if (costs.num_interventions() == 0)
    throw InputError("empty_intervention_set", "no candidate interventions");
  std::vector<double> raw(beliefs.num_states(), kNaN);
  for (StateId s = 0; s < beliefs.num_states(); ++s) {
    if (!beliefs.defined(s)) continue;
    raw[s] = vob_observer_value(costs, beliefs.row(s));
  }
  return raw;
}

std::pair<std::vector<double>, std::vector<int>> vob_agent_cost(const BeliefTable& beliefs,
                                                                const CostMatrix& costs,
                                                                StateId true_goal) {
  if (costs.num_interventions() == 0)
    throw InputError("empty_intervention_set", "no candidate interventions");
  const int star = costs.goal_col(true_goal);
  if (star < 0) throw InputError("vob_goal", "true goal missing from cost matrix");
  std::vector<double> raw(beliefs.num_states(), kNaN);
  std::vector<int> induced(beliefs.num_states(), -1);
  for (StateId s = 0; s < beliefs.num_states(); ++s) {
    if (!beliefs.defined(s)) continue;
    int pick = argmax_damage(costs, beliefs.row(s));
    induced[s] = pick;
    raw[s] = costs.damage(pick, star);
  }
  return {std::move(raw), std::move(induced)};
}

std::vector<double> discount_field(const Mdp& mdp, std::span<const double> raw,
                                   std::span<const int> hops, double gamma_a) {
  if (gamma_a <= 0.0 || gamma_a > 1.0)
    throw InputError("gamma_a_range", "ancillary discount must lie in (0,1]");
  if (raw.size() != mdp.num_states() || hops.size() != mdp.num_states())
    throw InputError("discount_shape", "raw/hop sizes do not match the MDP");
  std::vector<double> g(mdp.num_actions(), 0.0);
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.contains(s)) continue;
    double weight = hops[s] == kUnreachableHops ? 0.0 : std::pow(gamma_a, hops[s]);
    double value = hops[s] == kUnreachableHops ? 0.0 : weight * raw[s];
    for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a) g[a] = value;
  }
  return g;
}

DeceptionCostField make_cost_field(DeceptionKind kind, const Mdp& mdp,
                                   const BeliefTable& beliefs, const CostMatrix& costs,
                                   std::span<const int> hops, double gamma_a) {
  DeceptionCostField field;
  field.kind = kind;
  field.gamma_a = gamma_a;
  switch (kind) {
    case DeceptionKind::Exaggeration:
      field.raw = exaggeration_cost(beliefs, mdp.true_goal());
      break;
    case DeceptionKind::Ambiguity:
      field.raw = ambiguity_cost(beliefs, mdp.goals());
      break;
    case DeceptionKind::VobObserver:
      field.raw = vob_observer_cost(beliefs, costs);
      break;
    case DeceptionKind::VobAgent:
      field.raw = vob_agent_cost(beliefs, costs, mdp.true_goal()).first;
      break;
  }
  field.discounted = discount_field(mdp, field.raw, hops, gamma_a);
  return field;
}

}  // namespace dpp
