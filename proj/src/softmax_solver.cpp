#include "dpp/softmax_solver.hpp"

#include <atomic>
#include <cmath>
#include <future>
#include <limits>

#include "dpp/errors.hpp"

namespace dpp {

namespace {
std::atomic<std::int64_t> g_vi_calls{0};
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

std::int64_t softmax_vi_call_count() { return g_vi_calls.load(); }
void reset_softmax_vi_call_count() { g_vi_calls.store(0); }

ValueTable softmax_value_iteration(const Mdp& mdp, StateId goal, const SoftmaxParams& params) {
  if (goal >= mdp.num_states() || !mdp.contains(goal))
    throw InputError("vi_goal", "goal state absent from the MDP");
  if (params.alpha <= 0.0) throw InputError("vi_alpha", "alpha must be positive");
  if (params.tol <= 0.0) throw InputError("vi_tol", "tolerance must be positive");
  g_vi_calls.fetch_add(1);

  const double alpha = params.alpha;
  const double gamma = mdp.gamma();
  int max_iters = params.max_iters;
  if (max_iters <= 0)
    max_iters = 10 * static_cast<int>(std::ceil(std::log(params.tol) / std::log(gamma)));

  const std::size_t n = mdp.num_states();
  ValueTable table;
  table.goal = goal;
  table.alpha = alpha;
  table.values.assign(n, std::numeric_limits<double>::quiet_NaN());

  std::vector<double> v(n, 0.0), next(n, 0.0);
  for (StateId s = 0; s < n; ++s)
    if (!mdp.contains(s)) v[s] = 0.0;  // never read: absent states have no actions

  std::vector<double> q;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < max_iters && residual >= params.tol; ++it) {
    residual = 0.0;
    for (StateId s = 0; s < n; ++s) {
      if (!mdp.contains(s)) continue;
      if (s == goal) {
        next[s] = 0.0;
        continue;
      }
      q.clear();
      double qmax = kNegInf;
      for (ActionId a = mdp.action_begin(s); a < mdp.action_end(s); ++a) {
        double ev = 0.0;
        for (const TransitionEntry* t = mdp.transition_begin(a); t != mdp.transition_end(a);
             ++t)
          ev += t->prob * v[t->to];
        double qa = (-mdp.action(a).cost + gamma * ev) / alpha;
        q.push_back(qa);
        if (qa > qmax) qmax = qa;
      }
      double value;
      if (q.empty() || qmax == kNegInf) {
        value = kNegInf;  // no action, or every action leads into -inf
      } else {
        double acc = 0.0;
        for (double qa : q) acc += std::exp(qa - qmax);
        value = alpha * (qmax + std::log(acc));
      }
      next[s] = value;
      double delta = std::fabs(value - v[s]);
      if (std::isnan(delta)) delta = 0.0;  // -inf stayed -inf
      if (delta > residual) residual = delta;
    }
    v.swap(next);
    if (params.residual_trace) params.residual_trace->push_back(residual);
  }
  if (!(residual < params.tol))
    throw NumericalError("vi_nonconvergence",
                         "softmax value iteration did not converge; last residual " +
                             std::to_string(residual));
  table.residual = residual;
  table.iterations = it;
  for (StateId s = 0; s < n; ++s)
    if (mdp.contains(s)) table.values[s] = v[s];
  return table;
}

CostMatrix::CostMatrix(std::vector<StateId> goals, std::size_t num_interventions)
    : goals_(std::move(goals)),
      num_interventions_(num_interventions),
      entries_(goals_.size() * num_interventions, 0.0),
      base_entries_(goals_.size(), 0.0) {}

int CostMatrix::goal_col(StateId goal) const {
  for (std::size_t g = 0; g < goals_.size(); ++g)
    if (goals_[g] == goal) return static_cast<int>(g);
  return -1;
}

CostMatrix compute_cost_matrix(const Mdp& base, const std::vector<Intervention>& interventions,
                               const SoftmaxParams& params,
                               const std::vector<ValueTable>* base_tables, int threads) {
  const auto& goals = base.goals();
  CostMatrix matrix(goals, interventions.size());

  if (base_tables) {
    if (base_tables->size() != goals.size())
      throw InputError("cost_matrix_tables", "base table count does not match goal count");
    for (std::size_t g = 0; g < goals.size(); ++g)
      matrix.set_base_entry(g, (*base_tables)[g].at(base.start()));
  } else {
    for (std::size_t g = 0; g < goals.size(); ++g)
      matrix.set_base_entry(g, softmax_value_iteration(base, goals[g], params).at(base.start()));
  }

  std::vector<InducedMdp> induced;
  induced.reserve(interventions.size());
  for (const Intervention& iv : interventions) induced.push_back(build_induced_mdp(base, iv));

  auto solve_cell = [&](std::size_t i, std::size_t g) {
    try {
      return softmax_value_iteration(induced[i], goals[g], params).at(base.start());
    } catch (const NumericalError& e) {
      throw NumericalError("cost_matrix_cell",
                           "solve failed for intervention " + interventions[i].name +
                               ", goal " + base.graph().state_names[goals[g]] + ": " + e.what());
    }
  };

  const std::size_t cells = interventions.size() * goals.size();
  if (threads > 1 && cells > 1) {
    std::vector<std::future<double>> futures(cells);
    for (std::size_t c = 0; c < cells; ++c)
      futures[c] = std::async(std::launch::async, solve_cell, c / goals.size(),
                              c % goals.size());
    for (std::size_t c = 0; c < cells; ++c)
      matrix.set_entry(c / goals.size(), c % goals.size(), futures[c].get());
  } else {
    for (std::size_t i = 0; i < interventions.size(); ++i)
      for (std::size_t g = 0; g < goals.size(); ++g)
        matrix.set_entry(i, g, solve_cell(i, g));
  }
  return matrix;
}

}  // namespace dpp
