#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace dpp {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();
inline constexpr ActionId kNoAction = std::numeric_limits<ActionId>::max();
inline constexpr int kUnreachableHops = std::numeric_limits<int>::max();

// Undirected weighted graph. States are indices into `state_names`; edges are
// unordered pairs with one cost each.
struct WeightedGraph {
  std::vector<std::string> state_names;
  std::vector<std::pair<StateId, StateId>> edges;
  std::vector<double> edge_cost;
  std::vector<std::vector<EdgeId>> incident;  // edge ids touching each state

  static WeightedGraph build(std::vector<std::string> names,
                             std::vector<std::pair<StateId, StateId>> edges,
                             std::vector<double> costs);

  std::size_t num_states() const { return state_names.size(); }
  std::size_t num_edges() const { return edges.size(); }
  StateId other_end(EdgeId e, StateId s) const {
    return edges[e].first == s ? edges[e].second : edges[e].first;
  }
  StateId find_state(const std::string& name) const;  // kNoState if missing
};

// Directed traversal of one incident edge; each undirected edge (u,v) exposes
// the two actions u->v and v->u with the shared edge cost.
struct DirectedAction {
  StateId from;
  StateId to;    // intended target (deterministic successor)
  EdgeId edge;   // undirected edge id in the base graph; stable across induced MDPs
  double cost;
};

struct TransitionEntry {
  StateId to;
  double prob;
};

// Observer intervention: a subgraph (kept states/edges) plus a reweighting of
// the kept edges. Masks are sized against the base graph.
struct Intervention {
  std::string name;
  std::vector<std::uint8_t> kept_state;
  std::vector<std::uint8_t> kept_edge;
  std::vector<double> new_edge_cost;  // per base edge id; read only where kept
};

Intervention identity_intervention(const WeightedGraph& graph, std::string name = "identity");
Intervention remove_states_intervention(const WeightedGraph& graph,
                                        const std::vector<StateId>& removed,
                                        std::string name);

enum class MassRedistribution {
  SelfLoop,      // stranded mass folds into p(s|s,a)
  Proportional,  // stranded mass spread over the action's surviving targets
};

// Discounted MDP over a weighted graph. Also represents post-intervention
// induced MDPs: `present` marks the kept states and absent states carry no
// actions, while state/edge ids stay those of the base graph.
class Mdp {
 public:
  static Mdp from_graph(std::shared_ptr<const WeightedGraph> graph, StateId start,
                        double gamma, std::vector<StateId> goals, StateId true_goal,
                        double slip = 0.0);

  const WeightedGraph& graph() const { return *graph_; }
  std::shared_ptr<const WeightedGraph> graph_ptr() const { return graph_; }

  std::size_t num_states() const { return graph_->num_states(); }
  std::size_t num_actions() const { return actions_.size(); }
  bool contains(StateId s) const { return present_[s] != 0; }
  const std::vector<std::uint8_t>& present_mask() const { return present_; }

  StateId start() const { return start_; }
  double gamma() const { return gamma_; }
  const std::vector<StateId>& goals() const { return goals_; }
  StateId true_goal() const { return true_goal_; }
  bool is_goal(StateId s) const { return is_goal_[s] != 0; }
  double slip() const { return slip_; }

  // Actions at s occupy the contiguous range [action_begin(s), action_end(s)).
  ActionId action_begin(StateId s) const { return action_begin_[s]; }
  ActionId action_end(StateId s) const { return action_begin_[s + 1]; }
  const DirectedAction& action(ActionId a) const { return actions_[a]; }
  const std::vector<DirectedAction>& actions() const { return actions_; }

  // Transition distribution of action a (positive-mass entries only).
  const TransitionEntry* transition_begin(ActionId a) const {
    return transitions_.data() + trans_begin_[a];
  }
  const TransitionEntry* transition_end(ActionId a) const {
    return transitions_.data() + trans_begin_[a + 1];
  }

  // Action at s whose intended target is t; kNoAction if absent.
  ActionId action_towards(StateId s, StateId t) const;

  double transition_prob(ActionId a, StateId to) const;

 private:
  friend Mdp build_induced_mdp(const Mdp&, const Intervention&, MassRedistribution);

  std::shared_ptr<const WeightedGraph> graph_;
  std::vector<std::uint8_t> present_;
  std::vector<DirectedAction> actions_;
  std::vector<ActionId> action_begin_;  // size |S|+1
  std::vector<TransitionEntry> transitions_;
  std::vector<std::size_t> trans_begin_;  // size |A|+1
  StateId start_ = 0;
  double gamma_ = 0.99;
  double slip_ = 0.0;
  std::vector<StateId> goals_;
  StateId true_goal_ = 0;
  std::vector<std::uint8_t> is_goal_;

  void build_tables(const std::vector<std::uint8_t>& kept_edge,
                    const std::vector<double>& edge_cost, double slip,
                    MassRedistribution rule);
  void validate() const;
};

using InducedMdp = Mdp;

// Applies one intervention to a base MDP. Distributions at removed
// states/actions are dropped; mass pointing at a removed state is
// redistributed per `rule` (self-loop by default). Rejects interventions that
// drop the start or a candidate goal, or that disconnect start from the true
// goal in the deterministic-support graph.
InducedMdp build_induced_mdp(const Mdp& base, const Intervention& iv,
                             MassRedistribution rule = MassRedistribution::SelfLoop);

// BFS hop counts from `from`; unreachable states get kUnreachableHops.
std::vector<int> hop_distance(const WeightedGraph& graph, StateId from);

// Fixed point of V(s) = max_a sum_s' p(s'|s,a) V(s'), V(goal)=1, goal
// absorbing; returns V(start).
double max_reach_probability(const Mdp& mdp, StateId goal);

// Minimum-cost path in the MDP's kept support graph, never passing through an
// absorbing goal state other than the destination. Ties broken toward lower
// state ids. Returns empty path with +inf cost when unreachable.
struct PathResult {
  std::vector<StateId> states;  // from .. to inclusive
  double cost;
};
PathResult min_cost_path(const Mdp& mdp, StateId from, StateId to);

}  // namespace dpp
