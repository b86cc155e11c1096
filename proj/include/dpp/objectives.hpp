#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpp/graph_mdp.hpp"
#include "dpp/observer.hpp"
#include "dpp/softmax_solver.hpp"

namespace dpp {

enum class DeceptionKind { Exaggeration, Ambiguity, VobObserver, VobAgent };

const char* kind_name(DeceptionKind kind);
DeceptionKind kind_from_name(const std::string& name);  // InputError on unknown

// Per-state deception cost f(s) plus its ancillary-discounted planning cost
// g(s,a) = gamma_a^{hop(s)} * f(s) broadcast over the actions at s.
struct DeceptionCostField {
  DeceptionKind kind;
  double gamma_a = 1.0;
  std::vector<double> raw;         // per state
  std::vector<double> discounted;  // per base ActionId

  double g(ActionId a) const { return discounted[a]; }
};

// Classical exaggeration, 1 + P(G*|s) - max over decoys of P(G|s). Needs at
// least one decoy.
std::vector<double> exaggeration_cost(const BeliefTable& beliefs, StateId true_goal);

// Classical ambiguity: sum over ordered goal pairs of |P(G|s)-P(G'|s)|, zero
// at goal states.
std::vector<double> ambiguity_cost(const BeliefTable& beliefs, std::span<const StateId> goals);

// Observer value of belief: the observer's best expected damage under the
// belief row at s.
std::vector<double> vob_observer_cost(const BeliefTable& beliefs, const CostMatrix& costs);

// Agent value of belief: damage to the true goal from the intervention the
// belief row at s induces. Also returns the induced intervention per state.
std::pair<std::vector<double>, std::vector<int>> vob_agent_cost(const BeliefTable& beliefs,
                                                                const CostMatrix& costs,
                                                                StateId true_goal);

// Observer decision rule shared with the simulation protocol: argmax over
// interventions of sum_G b(G)*damage(i,G), ties to the lowest index.
int argmax_damage(const CostMatrix& costs, std::span<const double> belief_row);

// max_i sum_G b(G)*damage(i,G) for one belief row.
double vob_observer_value(const CostMatrix& costs, std::span<const double> belief_row);

// g(s,a) = gamma_a^{hop(s)} * raw(s) for every action at s; zero where hop is
// the unreachable sentinel.
std::vector<double> discount_field(const Mdp& mdp, std::span<const double> raw,
                                   std::span<const int> hops, double gamma_a);

// Composes the cost-field pipeline for one planner kind.
DeceptionCostField make_cost_field(DeceptionKind kind, const Mdp& mdp,
                                   const BeliefTable& beliefs, const CostMatrix& costs,
                                   std::span<const int> hops, double gamma_a);

}  // namespace dpp
