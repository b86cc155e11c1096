#include "dpp/observer.hpp"

#include <cmath>
#include <limits>

#include "dpp/errors.hpp"

namespace dpp {

int BeliefTable::goal_col(StateId goal) const {
  for (std::size_t g = 0; g < goals_.size(); ++g)
    if (goals_[g] == goal) return static_cast<int>(g);
  return -1;
}

std::vector<double> uniform_prior(std::size_t num_goals) {
  return std::vector<double>(num_goals, 1.0 / static_cast<double>(num_goals));
}

BeliefTable build_belief_table(const Mdp& base, const std::vector<ValueTable>& base_values,
                               const std::vector<double>& prior, double temperature) {
  const auto& goals = base.goals();
  if (base_values.size() != goals.size())
    throw InputError("belief_tables", "value table count does not match goal count");
  if (prior.size() != goals.size())
    throw InputError("belief_prior", "prior size does not match goal count");
  if (temperature <= 0.0) throw InputError("belief_temperature", "temperature must be positive");
  double prior_total = 0.0;
  for (double p : prior) {
    if (p < 0.0) throw InputError("belief_prior", "prior mass must be nonnegative");
    prior_total += p;
  }
  if (prior_total <= 0.0) throw InputError("belief_prior", "prior must have positive mass");

  BeliefTable table;
  table.goals_ = goals;
  table.prior_.resize(goals.size());
  for (std::size_t g = 0; g + 1 < goals.size(); ++g) table.prior_[g] = prior[g] / prior_total;
  // Pin the normalized prior to sum to exactly 1.0 so the row at s0, where
  // every exponent vanishes, reproduces the prior bit-for-bit.
  double head = 0.0;
  for (std::size_t g = 0; g + 1 < goals.size(); ++g) head += table.prior_[g];
  table.prior_.back() = 1.0 - head;

  const std::size_t n = base.num_states();
  const StateId s0 = base.start();
  table.posterior_.assign(n * goals.size(), 0.0);
  table.defined_.assign(n, 0);

  // Shifted exponents: the prior stays a multiplicative factor and the value
  // gaps are shifted by their row max before exponentiating.
  std::vector<double> gap(goals.size());
  for (StateId s = 0; s < n; ++s) {
    if (!base.contains(s)) continue;
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < goals.size(); ++g) {
      if (table.prior_[g] <= 0.0) {
        gap[g] = -std::numeric_limits<double>::infinity();
        continue;
      }
      gap[g] = (base_values[g].at(s) - base_values[g].at(s0)) / temperature;
      if (gap[g] > shift) shift = gap[g];
    }
    if (!std::isfinite(shift))
      throw NumericalError("belief_normalization",
                           "posterior row is non-normalizable at state " +
                               base.graph().state_names[s]);
    double total = 0.0;
    for (std::size_t g = 0; g < goals.size(); ++g) {
      double w = table.prior_[g] <= 0.0 ? 0.0 : std::exp(gap[g] - shift) * table.prior_[g];
      table.posterior_[s * goals.size() + g] = w;
      total += w;
    }
    for (std::size_t g = 0; g < goals.size(); ++g)
      table.posterior_[s * goals.size() + g] /= total;
    table.defined_[s] = 1;
  }
  return table;
}

std::vector<std::span<const double>> belief_along_trajectory(
    const BeliefTable& table, std::span<const StateId> trajectory) {
  std::vector<std::span<const double>> rows;
  rows.reserve(trajectory.size());
  for (StateId s : trajectory) {
    if (s >= table.num_states() || !table.defined(s))
      throw InputError("belief_unknown_state",
                       "trajectory state " + std::to_string(s) + " has no posterior row");
    rows.push_back(table.row(s));
  }
  return rows;
}

}  // namespace dpp
