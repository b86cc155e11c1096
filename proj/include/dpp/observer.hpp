#pragma once

#include <span>
#include <vector>

#include "dpp/graph_mdp.hpp"
#include "dpp/softmax_solver.hpp"

namespace dpp {

// Maximum-entropy observer posterior over candidate goals, conditioned on the
// agent's current state:
//   P(G|s) ∝ exp((V_G(s) - V_G(s0)) / temperature) * P(G)
// Rows exist for every present state of the base MDP and sum to 1.
class BeliefTable {
 public:
  BeliefTable() = default;

  const std::vector<StateId>& goals() const { return goals_; }
  std::span<const double> prior() const { return prior_; }
  std::span<const double> row(StateId s) const {
    return {posterior_.data() + static_cast<std::size_t>(s) * goals_.size(), goals_.size()};
  }
  bool defined(StateId s) const { return defined_[s] != 0; }
  int goal_col(StateId goal) const;
  std::size_t num_states() const { return defined_.size(); }

  friend BeliefTable build_belief_table(const Mdp&, const std::vector<ValueTable>&,
                                        const std::vector<double>&, double);

 private:
  std::vector<StateId> goals_;
  std::vector<double> prior_;
  std::vector<double> posterior_;  // row-major (state, goal)
  std::vector<std::uint8_t> defined_;
};

// base_values[g] must be the unintervened-MDP table for base.goals()[g].
// Goals with zero prior are dropped from the normalization. The prior need
// not be normalized; it must be nonnegative with positive total.
BeliefTable build_belief_table(const Mdp& base, const std::vector<ValueTable>& base_values,
                               const std::vector<double>& prior, double temperature = 1.0);

std::vector<double> uniform_prior(std::size_t num_goals);

// Row view per trajectory element (the posterior depends on the trajectory
// only through its current state).
std::vector<std::span<const double>> belief_along_trajectory(
    const BeliefTable& table, std::span<const StateId> trajectory);

}  // namespace dpp
