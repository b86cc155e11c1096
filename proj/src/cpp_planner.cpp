#include "dpp/cpp_planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "dpp/errors.hpp"

namespace dpp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int InfoSet::performed() const {
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i] == Flag::Present) return static_cast<int>(i);
  return -1;
}

int InfoSet::unknown_count() const {
  int n = 0;
  for (Flag f : flags)
    if (f == Flag::Unknown) ++n;
  return n;
}

std::vector<InfoSet> successors(const InfoSet& info, int i) {
  if (i < 0 || i >= static_cast<int>(info.flags.size()))
    throw InputError("infoset_index", "intervention index out of range");
  if (info.performed() >= 0)
    throw InputError("infoset_spent", "an intervention was already performed");
  if (info.flags[i] != Flag::Unknown)
    throw InputError("infoset_resolved", "flag is not unknown");
  InfoSet perform = info;
  for (Flag& f : perform.flags) f = Flag::Absent;
  perform.flags[i] = Flag::Present;
  InfoSet reveal = info;
  reveal.flags[i] = Flag::Absent;
  return {perform, reveal};
}

double default_decoy_penalty(const Mdp& mdp) {
  double max_cost = 0.0;
  for (const DirectedAction& da : mdp.actions()) max_cost = std::max(max_cost, da.cost);
  if (max_cost <= 0.0) max_cost = 1.0;
  return 1e6 * max_cost * static_cast<double>(mdp.num_states());
}

int GameValue::info_index(const InfoSet& info) const {
  for (std::size_t i = 0; i < sets_.size(); ++i)
    if (sets_[i] == info) return static_cast<int>(i);
  return -1;
}

namespace {

// Connectivity to the true goal over an MDP's kept support.
std::vector<std::uint8_t> connected_to_goal(const Mdp& mdp) {
  std::vector<std::uint8_t> seen(mdp.num_states(), 0);
  std::deque<StateId> frontier{mdp.true_goal()};
  seen[mdp.true_goal()] = 1;
  while (!frontier.empty()) {
    StateId s = frontier.front();
    frontier.pop_front();
    for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a) {
      StateId t = mdp.action(a).to;
      if (!seen[t]) {
        seen[t] = 1;
        frontier.push_back(t);
      }
    }
  }
  return seen;
}

// Min-cost value iteration with per-(s)-constant terminal option:
//   V(s) = max(term(s), min_a c(s,a) + gamma * sum p V(s'))
// Decoy exits cost `penalty` on top of the edge cost.
struct LayerSolve {
  std::vector<double> values;
  std::vector<StateId> moves;
};

LayerSolve solve_layer(const Mdp& mdp, const std::vector<double>& term, double penalty,
                       double tol, int max_iters) {
  const std::size_t n = mdp.num_states();
  std::vector<std::uint8_t> connected = connected_to_goal(mdp);
  LayerSolve out;
  out.values.assign(n, kInf);
  out.moves.assign(n, kNoState);

  std::vector<double> v(n, 0.0), next(n, 0.0);
  for (StateId s = 0; s < n; ++s) {
    if (!mdp.contains(s)) {
      v[s] = kInf;  // unreachable in this layer's dynamics
      continue;
    }
    v[s] = s == mdp.true_goal() ? 0.0 : std::max(term[s], 0.0);
    if (!connected[s] && s != mdp.true_goal()) v[s] = kInf;
  }
  next = v;

  double residual = kInf;
  int it = 0;
  for (; it < max_iters && residual >= tol; ++it) {
    residual = 0.0;
    for (StateId s = 0; s < n; ++s) {
      if (!mdp.contains(s) || s == mdp.true_goal() || !connected[s]) continue;
      double best = kInf;
      for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a) {
        double ev = 0.0;
        for (const TransitionEntry* t = mdp.transition_begin(a); t != mdp.transition_end(a);
             ++t)
          ev += t->prob * v[t->to];
        double cost = mdp.action(a).cost + (mdp.is_goal(s) ? penalty : 0.0);
        double q = cost + mdp.gamma() * ev;
        if (q < best) best = q;
      }
      double value = std::max(term[s], best);
      next[s] = value;
      if (std::isfinite(value) && std::isfinite(v[s]))
        residual = std::max(residual, std::fabs(value - v[s]));
      else if (std::isfinite(value) != std::isfinite(v[s]))
        residual = kInf;
    }
    v.swap(next);
  }
  if (!(residual < tol))
    throw NumericalError("minimax_nonconvergence",
                         "minimax value iteration did not converge in a layer");

  for (StateId s = 0; s < n; ++s) {
    if (!mdp.contains(s)) continue;
    out.values[s] = v[s];
    if (s == mdp.true_goal() || !connected[s]) continue;
    double best = kInf;
    StateId move = kNoState;
    for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a) {
      double ev = 0.0;
      for (const TransitionEntry* t = mdp.transition_begin(a); t != mdp.transition_end(a); ++t)
        ev += t->prob * v[t->to];
      double q = mdp.action(a).cost + (mdp.is_goal(s) ? penalty : 0.0) + mdp.gamma() * ev;
      if (q < best) {
        best = q;
        move = mdp.action(a).to;
      }
    }
    out.moves[s] = move;
  }
  return out;
}

}  // namespace

GameValue minimax_value_iteration(const Mdp& base, const std::vector<Intervention>& interventions,
                                  double decoy_penalty, double tol, int max_iters) {
  if (tol <= 0.0) throw InputError("minimax_tol", "tolerance must be positive");
  if (decoy_penalty <= 0.0) decoy_penalty = default_decoy_penalty(base);
  if (max_iters <= 0)
    max_iters = 20 * static_cast<int>(std::ceil(std::log(tol) / std::log(base.gamma()))) +
                static_cast<int>(base.num_states()) + 100;
  const std::size_t k = interventions.size();
  const std::size_t n = base.num_states();

  // Canonical info sets: every {Absent, Unknown}^k pattern plus the k
  // performed sets, ordered by unknown count so layers resolve bottom-up.
  GameValue gv;
  gv.decoy_penalty_ = decoy_penalty;
  for (std::size_t i = 0; i < k; ++i) {
    InfoSet performed{std::vector<Flag>(k, Flag::Absent)};
    performed.flags[i] = Flag::Present;
    gv.sets_.push_back(std::move(performed));
  }
  for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) {
    InfoSet info{std::vector<Flag>(k, Flag::Absent)};
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (1ull << i)) info.flags[i] = Flag::Unknown;
    gv.sets_.push_back(std::move(info));
  }
  std::stable_sort(gv.sets_.begin(), gv.sets_.end(),
                   [](const InfoSet& a, const InfoSet& b) {
                     return a.unknown_count() < b.unknown_count();
                   });

  std::vector<InducedMdp> induced;
  induced.reserve(k);
  for (const Intervention& iv : interventions) induced.push_back(build_induced_mdp(base, iv));

  gv.values_.resize(gv.sets_.size());
  gv.policy_.resize(gv.sets_.size());

  // States removed by a performed intervention can still hold the agent (the
  // obstacle cannot land on it); from there it escapes along a surviving
  // edge. Applied to each performed layer after its solve.
  auto patch_removed = [&](int perf, std::vector<double>& values,
                           std::vector<StateId>& moves) {
    const Intervention& iv = interventions[perf];
    for (StateId s = 0; s < n; ++s) {
      if (iv.kept_state[s] || !base.contains(s)) continue;
      double best = kInf;
      StateId move = kNoState;
      for (ActionId a = base.action_begin(s); a < base.action_end(s); ++a) {
        StateId t = base.action(a).to;
        if (!iv.kept_state[t] || !std::isfinite(values[t])) continue;
        double q = base.action(a).cost + base.gamma() * values[t];
        if (q < best) {
          best = q;
          move = t;
        }
      }
      values[s] = best;
      moves[s] = move;
    }
  };

  for (std::size_t idx = 0; idx < gv.sets_.size(); ++idx) {
    const InfoSet& info = gv.sets_[idx];
    const Mdp& dyn = info.performed() >= 0 ? induced[info.performed()] : base;
    // Terminal option: the observer resolves information now.
    std::vector<double> term(n, -kInf);
    if (info.performed() < 0) {
      for (std::size_t i = 0; i < k; ++i) {
        if (info.flags[i] != Flag::Unknown) continue;
        for (const InfoSet& succ : successors(info, static_cast<int>(i))) {
          int sidx = gv.info_index(succ);
          for (StateId s = 0; s < n; ++s)
            term[s] = std::max(term[s], gv.values_[sidx][s]);
        }
      }
    }
    // term stays -inf where the observer has no move; max() then just
    // passes the agent backup through.
    LayerSolve layer = solve_layer(dyn, term, decoy_penalty, tol, max_iters);
    gv.values_[idx] = std::move(layer.values);
    gv.policy_[idx] = std::move(layer.moves);
    if (info.performed() >= 0)
      patch_removed(info.performed(), gv.values_[idx], gv.policy_[idx]);
  }
  return gv;
}

CppRollout cpp_policy_rollout(const Mdp& base, const std::vector<Intervention>& interventions,
                              const GameValue& gv, const Schedule& schedule, int step_cap) {
  // one Perform total, each flag resolved at most once
  {
    std::vector<int> touched(interventions.size(), 0);
    int performs = 0;
    for (const auto& [time, move] : schedule) {
      if (move.intervention < 0 || move.intervention >= static_cast<int>(interventions.size()))
        throw InputError("schedule_index", "schedule references an unknown intervention");
      if (++touched[move.intervention] > 1)
        throw InputError("schedule_repeat", "schedule resolves one flag twice");
      if (move.type == ObserverMove::Type::Perform && ++performs > 1)
        throw InputError("schedule_performs", "schedule performs more than one intervention");
    }
  }

  std::vector<InducedMdp> induced;
  induced.reserve(interventions.size());
  for (const Intervention& iv : interventions) induced.push_back(build_induced_mdp(base, iv));

  InfoSet info = InfoSet::all_unknown(interventions.size());
  CppRollout out;
  StateId s = base.start();
  out.trajectory.push_back(s);
  double discount = 1.0;
  for (int t = 0; t < step_cap; ++t) {
    for (const auto& [time, move] : schedule) {
      if (time != t) continue;
      if (info.flags[move.intervention] != Flag::Unknown || info.performed() >= 0)
        continue;  // moot after an earlier perform
      if (move.type == ObserverMove::Type::Perform)
        info = successors(info, move.intervention)[0];
      else
        info = successors(info, move.intervention)[1];
    }
    if (s == base.true_goal()) {
      out.reached_goal = true;
      return out;
    }
    const Mdp& dyn = info.performed() >= 0 ? induced[info.performed()] : base;
    int idx = gv.info_index(info);
    StateId target = gv.move(s, idx);
    if (target == kNoState)
      throw NumericalError("cpp_stuck", "conservative policy has no move at state " +
                                            base.graph().state_names[s]);
    double edge_c, penalty_c = 0.0;
    if (dyn.contains(s)) {
      ActionId a = dyn.action_towards(s, target);
      if (a == kNoAction)
        throw NumericalError("cpp_bad_move", "conservative policy move is not available");
      edge_c = dyn.action(a).cost;
      if (dyn.is_goal(s)) penalty_c = gv.decoy_penalty();
    } else {
      // the obstacle landed on the agent's cell: escape along a surviving
      // base edge
      ActionId esc = base.action_towards(s, target);
      if (esc == kNoAction)
        throw NumericalError("cpp_bad_move", "conservative policy move is not available");
      edge_c = base.action(esc).cost;
    }
    out.discounted_cost += discount * (edge_c + penalty_c);
    out.edge_cost += edge_c;
    discount *= base.gamma();
    s = target;  // deterministic support; slip variants sample upstream
    out.trajectory.push_back(s);
  }
  out.reached_goal = s == base.true_goal();
  return out;
}

}  // namespace dpp
