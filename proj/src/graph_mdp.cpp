#include "dpp/graph_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <set>

#include "dpp/errors.hpp"

namespace dpp {

WeightedGraph WeightedGraph::build(std::vector<std::string> names,
                                   std::vector<std::pair<StateId, StateId>> edges,
                                   std::vector<double> costs) {
  if (edges.size() != costs.size())
    throw InputError("graph_shape", "edge and cost lists differ in length");
  WeightedGraph g;
  g.state_names = std::move(names);
  g.edges = std::move(edges);
  g.edge_cost = std::move(costs);
  const std::size_t n = g.state_names.size();
  std::set<std::pair<StateId, StateId>> seen;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    auto [u, v] = g.edges[e];
    if (u >= n || v >= n)
      throw InputError("graph_edge_endpoint", "edge endpoint out of range");
    if (!std::isfinite(g.edge_cost[e]))
      throw InputError("graph_edge_cost", "edge cost must be finite");
    auto key = std::minmax(u, v);
    if (!seen.insert(key).second)
      throw InputError("graph_duplicate_edge", "duplicate edge " + g.state_names[u] + "-" +
                                                   g.state_names[v]);
  }
  g.incident.assign(n, {});
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    g.incident[g.edges[e].first].push_back(static_cast<EdgeId>(e));
    if (g.edges[e].second != g.edges[e].first)
      g.incident[g.edges[e].second].push_back(static_cast<EdgeId>(e));
  }
  return g;
}

StateId WeightedGraph::find_state(const std::string& name) const {
  for (std::size_t i = 0; i < state_names.size(); ++i)
    if (state_names[i] == name) return static_cast<StateId>(i);
  return kNoState;
}

Intervention identity_intervention(const WeightedGraph& graph, std::string name) {
  Intervention iv;
  iv.name = std::move(name);
  iv.kept_state.assign(graph.num_states(), 1);
  iv.kept_edge.assign(graph.num_edges(), 1);
  iv.new_edge_cost = graph.edge_cost;
  return iv;
}

Intervention remove_states_intervention(const WeightedGraph& graph,
                                        const std::vector<StateId>& removed,
                                        std::string name) {
  Intervention iv = identity_intervention(graph, std::move(name));
  for (StateId s : removed) {
    if (s >= graph.num_states())
      throw InputError("intervention_state", "removed state out of range");
    iv.kept_state[s] = 0;
  }
  for (std::size_t e = 0; e < graph.num_edges(); ++e)
    if (!iv.kept_state[graph.edges[e].first] || !iv.kept_state[graph.edges[e].second])
      iv.kept_edge[e] = 0;
  return iv;
}

void Mdp::build_tables(const std::vector<std::uint8_t>& kept_edge,
                       const std::vector<double>& edge_cost, double slip,
                       MassRedistribution /*rule*/) {
  const std::size_t n = num_states();
  actions_.clear();
  action_begin_.assign(n + 1, 0);
  transitions_.clear();
  trans_begin_.clear();
  trans_begin_.push_back(0);

  for (StateId s = 0; s < n; ++s) {
    action_begin_[s] = static_cast<ActionId>(actions_.size());
    if (!present_[s]) continue;
    std::vector<DirectedAction> local;
    for (EdgeId e : graph_->incident[s]) {
      if (!kept_edge[e]) continue;
      StateId t = graph_->other_end(e, s);
      if (!present_[t]) continue;
      local.push_back({s, t, e, edge_cost[e]});
    }
    std::sort(local.begin(), local.end(), [](const DirectedAction& a, const DirectedAction& b) {
      return a.to != b.to ? a.to < b.to : a.edge < b.edge;
    });
    for (const DirectedAction& da : local) {
      actions_.push_back(da);
      // Slip mass goes uniformly to the other neighbors of s; with a single
      // neighbor the action stays deterministic.
      std::size_t others = local.size() - 1;
      if (slip <= 0.0 || others == 0 || da.to == s) {
        transitions_.push_back({da.to, 1.0});
      } else {
        transitions_.push_back({da.to, 1.0 - slip});
        double share = slip / static_cast<double>(others);
        for (const DirectedAction& ob : local)
          if (ob.to != da.to || ob.edge != da.edge) transitions_.push_back({ob.to, share});
      }
      trans_begin_.push_back(transitions_.size());
    }
  }
  action_begin_[n] = static_cast<ActionId>(actions_.size());
}

void Mdp::validate() const {
  for (ActionId a = 0; a < actions_.size(); ++a) {
    double total = 0.0;
    for (const TransitionEntry* t = transition_begin(a); t != transition_end(a); ++t) {
      if (t->prob < 0.0)
        throw InputError("transition_mass", "negative transition probability");
      if (!present_[t->to])
        throw InputError("transition_target", "transition mass on absent state");
      total += t->prob;
    }
    if (std::fabs(total - 1.0) > 1e-12)
      throw InputError("transition_row_sum",
                       "transition row for action " + std::to_string(a) + " sums to " +
                           std::to_string(total));
  }
}

Mdp Mdp::from_graph(std::shared_ptr<const WeightedGraph> graph, StateId start, double gamma,
                    std::vector<StateId> goals, StateId true_goal, double slip) {
  if (!graph) throw InputError("mdp_graph", "null graph");
  if (goals.empty()) throw InputError("mdp_goals", "goal set must be nonempty");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw InputError("mdp_gamma", "discount factor must lie in (0,1)");
  if (slip < 0.0 || slip >= 1.0) throw InputError("mdp_slip", "slip must lie in [0,1)");
  Mdp m;
  m.graph_ = std::move(graph);
  const std::size_t n = m.graph_->num_states();
  if (start >= n) throw InputError("mdp_start", "start state out of range");
  m.present_.assign(n, 1);
  m.start_ = start;
  m.gamma_ = gamma;
  m.slip_ = slip;
  m.goals_ = std::move(goals);
  m.true_goal_ = true_goal;
  m.is_goal_.assign(n, 0);
  for (StateId g : m.goals_) {
    if (g >= n) throw InputError("mdp_goal", "goal state out of range");
    m.is_goal_[g] = 1;
  }
  if (!m.is_goal_[true_goal])
    throw InputError("mdp_true_goal", "true goal must be a candidate goal");
  if (m.is_goal_[start]) throw InputError("mdp_start_goal", "start must not be a goal");
  m.build_tables(std::vector<std::uint8_t>(m.graph_->num_edges(), 1), m.graph_->edge_cost,
                 slip, MassRedistribution::SelfLoop);
  m.validate();
  return m;
}

ActionId Mdp::action_towards(StateId s, StateId t) const {
  for (ActionId a = action_begin(s); a < action_end(s); ++a)
    if (actions_[a].to == t) return a;
  return kNoAction;
}

double Mdp::transition_prob(ActionId a, StateId to) const {
  double p = 0.0;
  for (const TransitionEntry* t = transition_begin(a); t != transition_end(a); ++t)
    if (t->to == to) p += t->prob;
  return p;
}

namespace {

// Connectivity of the kept support graph, for the disconnection check.
bool support_reaches(const WeightedGraph& graph, const Intervention& iv, StateId from,
                     StateId to) {
  std::vector<std::uint8_t> seen(graph.num_states(), 0);
  std::deque<StateId> frontier{from};
  if (!iv.kept_state[from]) return false;
  seen[from] = 1;
  while (!frontier.empty()) {
    StateId s = frontier.front();
    frontier.pop_front();
    if (s == to) return true;
    for (EdgeId e : graph.incident[s]) {
      if (!iv.kept_edge[e]) continue;
      StateId t = graph.other_end(e, s);
      if (!iv.kept_state[t] || seen[t]) continue;
      seen[t] = 1;
      frontier.push_back(t);
    }
  }
  return false;
}

}  // namespace

InducedMdp build_induced_mdp(const Mdp& base, const Intervention& iv, MassRedistribution rule) {
  const WeightedGraph& graph = base.graph();
  if (iv.kept_state.size() != graph.num_states() || iv.kept_edge.size() != graph.num_edges())
    throw InputError("intervention_shape", "intervention masks do not match the base graph");
  if (!iv.kept_state[base.start()])
    throw InputError("intervention_drops_start", "intervention removes the start state");
  for (StateId g : base.goals())
    if (!iv.kept_state[g])
      throw InputError("intervention_drops_goal",
                       "intervention removes candidate goal " + graph.state_names[g]);
  for (std::size_t e = 0; e < graph.num_edges(); ++e)
    if (iv.kept_edge[e] && (!iv.kept_state[graph.edges[e].first] ||
                            !iv.kept_state[graph.edges[e].second]))
      throw InputError("intervention_dangling_edge",
                       "kept edge touches a removed state in intervention " + iv.name);
  if (!support_reaches(graph, iv, base.start(), base.true_goal()))
    throw InputError("intervention_disconnects_goal",
                     "intervention " + iv.name + " disconnects start from the true goal");

  Mdp out;
  out.graph_ = base.graph_ptr();
  out.present_ = iv.kept_state;
  out.start_ = base.start();
  out.gamma_ = base.gamma();
  out.slip_ = base.slip();
  out.goals_ = base.goals();
  out.true_goal_ = base.true_goal();
  out.is_goal_ = base.is_goal_;

  const std::size_t n = graph.num_states();
  out.action_begin_.assign(n + 1, 0);
  out.trans_begin_.push_back(0);
  for (StateId s = 0; s < n; ++s) {
    out.action_begin_[s] = static_cast<ActionId>(out.actions_.size());
    if (!out.present_[s]) continue;
    for (ActionId a = base.action_begin(s); a < base.action_end(s); ++a) {
      const DirectedAction& da = base.action(a);
      if (!iv.kept_edge[da.edge]) continue;
      out.actions_.push_back({da.from, da.to, da.edge, iv.new_edge_cost[da.edge]});
      double stranded = 0.0;
      std::vector<TransitionEntry> row;
      for (const TransitionEntry* t = base.transition_begin(a); t != base.transition_end(a);
           ++t) {
        if (out.present_[t->to])
          row.push_back(*t);
        else
          stranded += t->prob;
      }
      if (stranded > 0.0) {
        if (rule == MassRedistribution::SelfLoop) {
          auto self = std::find_if(row.begin(), row.end(),
                                   [s](const TransitionEntry& t) { return t.to == s; });
          if (self != row.end())
            self->prob += stranded;
          else
            row.push_back({s, stranded});
        } else {
          double kept_mass = 1.0 - stranded;
          // kept_mass > 0: the intended target survives with any kept edge.
          for (TransitionEntry& t : row) t.prob /= kept_mass;
        }
      }
      out.transitions_.insert(out.transitions_.end(), row.begin(), row.end());
      out.trans_begin_.push_back(out.transitions_.size());
    }
  }
  out.action_begin_[n] = static_cast<ActionId>(out.actions_.size());
  out.validate();
  return out;
}

std::vector<int> hop_distance(const WeightedGraph& graph, StateId from) {
  std::vector<int> dist(graph.num_states(), kUnreachableHops);
  if (from >= graph.num_states()) return dist;
  std::deque<StateId> frontier{from};
  dist[from] = 0;
  while (!frontier.empty()) {
    StateId s = frontier.front();
    frontier.pop_front();
    for (EdgeId e : graph.incident[s]) {
      StateId t = graph.other_end(e, s);
      if (dist[t] != kUnreachableHops) continue;
      dist[t] = dist[s] + 1;
      frontier.push_back(t);
    }
  }
  return dist;
}

double max_reach_probability(const Mdp& mdp, StateId goal) {
  if (goal >= mdp.num_states() || !mdp.contains(goal))
    throw InputError("reach_goal", "goal state absent from the MDP");
  const std::size_t n = mdp.num_states();
  std::vector<double> v(n, 0.0), next(n, 0.0);
  v[goal] = 1.0;
  const int max_sweeps = 100000;
  for (int it = 0; it < max_sweeps; ++it) {
    double residual = 0.0;
    for (StateId s = 0; s < n; ++s) {
      if (!mdp.contains(s)) continue;
      if (s == goal) {
        next[s] = 1.0;
        continue;
      }
      double best = 0.0;
      for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a) {
        double q = 0.0;
        for (const TransitionEntry* t = mdp.transition_begin(a); t != mdp.transition_end(a);
             ++t)
          q += t->prob * v[t->to];
        best = std::max(best, q);
      }
      next[s] = best;
      residual = std::max(residual, std::fabs(next[s] - v[s]));
    }
    v.swap(next);
    if (residual < 1e-10) break;
  }
  return v[mdp.start()];
}

PathResult min_cost_path(const Mdp& mdp, StateId from, StateId to) {
  const std::size_t n = mdp.num_states();
  PathResult out{{}, std::numeric_limits<double>::infinity()};
  if (from >= n || to >= n || !mdp.contains(from) || !mdp.contains(to)) return out;
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<StateId> parent(n, kNoState);
  using Item = std::pair<double, StateId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[from] = 0.0;
  pq.push({0.0, from});
  while (!pq.empty()) {
    auto [d, s] = pq.top();
    pq.pop();
    if (d > dist[s]) continue;
    if (s == to) break;
    // Absorbing goals other than the destination cannot be traversed.
    if (s != from && mdp.is_goal(s)) continue;
    for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a) {
      const DirectedAction& da = mdp.action(a);
      if (da.to == s) continue;
      double nd = d + da.cost;
      if (nd < dist[da.to] - 1e-15) {
        dist[da.to] = nd;
        parent[da.to] = s;
        pq.push({nd, da.to});
      } else if (std::fabs(nd - dist[da.to]) <= 1e-15 && parent[da.to] != kNoState &&
                 s < parent[da.to]) {
        parent[da.to] = s;  // lexicographic tie-break
      }
    }
  }
  if (!std::isfinite(dist[to])) return out;
  out.cost = dist[to];
  for (StateId s = to;; s = parent[s]) {
    out.states.push_back(s);
    if (s == from) break;
  }
  std::reverse(out.states.begin(), out.states.end());
  return out;
}

}  // namespace dpp
