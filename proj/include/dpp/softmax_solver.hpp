#pragma once

#include <cstdint>
#include <vector>

#include "dpp/graph_mdp.hpp"

namespace dpp {

// Softmax state values for one goal:
//   Q(s,a) = -c(s,a) + gamma * sum_s' p(s'|s,a) V(s')
//   V(s)   = alpha * log sum_a exp(Q(s,a)/alpha)
// with the goal absorbing at value 0. Values are negated soft costs-to-go,
// so they are nonpositive for positive edge costs. States with no available
// action carry -inf.
struct ValueTable {
  std::vector<double> values;  // indexed by base StateId; NaN on absent states
  StateId goal = kNoState;
  double alpha = 1.0;
  double residual = 0.0;
  int iterations = 0;

  double at(StateId s) const { return values[s]; }
};

struct SoftmaxParams {
  double alpha = 1.0;
  double tol = 1e-9;
  int max_iters = 0;  // 0: derive 10*ceil(log tol / log gamma)
  std::vector<double>* residual_trace = nullptr;  // per-sweep residuals
};

ValueTable softmax_value_iteration(const Mdp& mdp, StateId goal, const SoftmaxParams& params);

// Induced optima J(i,G) = V^i_G(s0) for every intervention/goal pair, plus the
// unintervened J(G). Values follow the solver's sign convention (nonpositive);
// all observer-side comparisons go through damage() = -J so a single
// convention rules the codebase.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::vector<StateId> goals, std::size_t num_interventions);

  std::size_t num_goals() const { return goals_.size(); }
  std::size_t num_interventions() const { return num_interventions_; }
  const std::vector<StateId>& goals() const { return goals_; }
  int goal_col(StateId goal) const;

  double j(std::size_t i, std::size_t g) const { return entries_[i * goals_.size() + g]; }
  double base_j(std::size_t g) const { return base_entries_[g]; }
  double damage(std::size_t i, std::size_t g) const { return -j(i, g); }

  void set_entry(std::size_t i, std::size_t g, double value) {
    entries_[i * goals_.size() + g] = value;
  }
  void set_base_entry(std::size_t g, double value) { base_entries_[g] = value; }

 private:
  std::vector<StateId> goals_;
  std::size_t num_interventions_ = 0;
  std::vector<double> entries_;       // row-major (intervention, goal)
  std::vector<double> base_entries_;  // per goal
};

// Runs softmax VI on every induced MDP (|I|*|G| solves). Base-MDP tables are
// taken from `base_tables` when provided (they are what the observer model
// already computed), otherwise solved here (|G| extra solves).
CostMatrix compute_cost_matrix(const Mdp& base, const std::vector<Intervention>& interventions,
                               const SoftmaxParams& params,
                               const std::vector<ValueTable>* base_tables = nullptr,
                               int threads = 1);

// Instrumentation: number of softmax VI solves since the last reset.
std::int64_t softmax_vi_call_count();
void reset_softmax_vi_call_count();

}  // namespace dpp
