#pragma once

#include <cstdint>
#include <vector>

#include "dpp/graph_mdp.hpp"

namespace dpp {

// Agent knowledge about one candidate intervention.
enum class Flag : std::int8_t { Absent = 0, Present = 1, Unknown = 2 };

// k flags with at most one Present (only one intervention can ever be
// performed).
struct InfoSet {
  std::vector<Flag> flags;

  static InfoSet all_unknown(std::size_t k) { return {std::vector<Flag>(k, Flag::Unknown)}; }
  int performed() const;       // index of the Present flag or -1
  int unknown_count() const;
  bool operator==(const InfoSet& other) const { return flags == other.flags; }
};

// Observer moves available at `info` for intervention i (requires flag i
// Unknown and nothing Present):
//   perform: flag i -> Present, every other Unknown -> Absent
//   reveal:  flag i -> Absent, others unchanged
std::vector<InfoSet> successors(const InfoSet& info, int i);

// Worst-case values and the agent policy over (state, information set).
class GameValue {
 public:
  const std::vector<InfoSet>& info_sets() const { return sets_; }
  int info_index(const InfoSet& info) const;
  double value(StateId s, int info_idx) const { return values_[info_idx][s]; }
  // Intended move target at (s, info); kNoState when no action helps.
  StateId move(StateId s, int info_idx) const { return policy_[info_idx][s]; }
  double decoy_penalty() const { return decoy_penalty_; }

  friend GameValue minimax_value_iteration(const Mdp&, const std::vector<Intervention>&,
                                           double, double, int);

 private:
  std::vector<InfoSet> sets_;
  std::vector<std::vector<double>> values_;   // [info][state]
  std::vector<std::vector<StateId>> policy_;  // [info][state]
  double decoy_penalty_ = 0.0;
};

// Default "arbitrarily large" decoy exit cost.
double default_decoy_penalty(const Mdp& mdp);

// Solves the intervention game by induction over the number of unknown
// flags. Within a layer the fixed point is
//   V(s,I) = max( max over observer moves of V(s, I'),
//                 min_a c_I(s,a) + gamma * sum p_I(s'|s,a) V(s',I) )
// with the true goal absorbing at 0, decoy exits penalized, and states cut
// off from the true goal at +inf. An obstacle never lands on the agent: at a
// state the performed intervention removed, the agent escapes along a
// surviving base edge. decoy_penalty <= 0 selects the default.
GameValue minimax_value_iteration(const Mdp& base, const std::vector<Intervention>& interventions,
                                  double decoy_penalty = 0.0, double tol = 1e-10,
                                  int max_iters = 0);

struct ObserverMove {
  enum class Type { Perform, Reveal } type;
  int intervention;
};

// time -> move; each flag may be resolved at most once, one Perform total.
using Schedule = std::vector<std::pair<int, ObserverMove>>;

struct CppRollout {
  std::vector<StateId> trajectory;
  double discounted_cost = 0.0;  // game cost, decoy penalties included
  double edge_cost = 0.0;        // plain path cost
  bool reached_goal = false;
};

CppRollout cpp_policy_rollout(const Mdp& base, const std::vector<Intervention>& interventions,
                              const GameValue& gv, const Schedule& schedule, int step_cap);

}  // namespace dpp
