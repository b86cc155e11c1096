#include "dpp/simplex.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "dpp/errors.hpp"
#include "dpp/kernels.hpp"

namespace dpp::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-major tableau over [real vars | artificials]; rhs and cost rows held
// separately so pricing can run a flat argmin over the cost row.
class Tableau {
 public:
  Tableau(const Problem& p, const Options& opt)
      : n_(p.num_vars()), m_(p.num_rows()), ncols_(n_ + m_), opt_(opt) {
    data_.assign(m_ * ncols_, 0.0);
    rhs_.assign(m_, 0.0);
    basis_.assign(m_, 0);
    active_.assign(m_, 1);
    for (std::size_t r = 0; r < m_; ++r) {
      double sign = p.rhs[r] < 0.0 ? -1.0 : 1.0;
      double* row = data_.data() + r * ncols_;
      for (std::size_t j = 0; j < n_; ++j) row[j] = sign * p.rows[r][j];
      row[n_ + r] = 1.0;  // artificial
      rhs_[r] = sign * p.rhs[r];
      basis_[r] = n_ + r;
    }
  }

  double* row(std::size_t r) { return data_.data() + r * ncols_; }
  const double* row(std::size_t r) const { return data_.data() + r * ncols_; }

  // Reduced-cost row for the objective `c` (artificials priced at +inf so
  // they never re-enter): cost[j] = c[j] - sum_r c[basis_r] * T[r][j].
  void rebuild_costs(const std::vector<double>& c, bool phase1) {
    cost_.assign(ncols_, 0.0);
    cost_value_ = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) cost_[j] = c[j];
    if (!phase1)
      for (std::size_t j = n_; j < ncols_; ++j) cost_[j] = kInf;
    else
      for (std::size_t j = n_; j < ncols_; ++j) cost_[j] = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (!active_[r]) continue;
      double cb = basis_[r] < c.size() ? c[basis_[r]]
                  : phase1             ? 1.0
                                       : 0.0;
      if (cb == 0.0) continue;
      kern::axpy(cost_.data(), -cb, row(r), phase1 ? ncols_ : n_);
      cost_value_ -= cb * rhs_[r];
    }
    // exact zeros on basic columns
    for (std::size_t r = 0; r < m_; ++r)
      if (active_[r]) cost_[basis_[r]] = 0.0;
  }

  // One pivot: col enters, row chosen by min ratio. Returns false when the
  // column is unbounded.
  bool pivot_on_column(std::size_t col) {
    std::size_t pr = m_;
    double best_ratio = kInf;
    for (std::size_t r = 0; r < m_; ++r) {
      if (!active_[r]) continue;
      double a = row(r)[col];
      if (a <= opt_.pivot_tol) continue;
      double ratio = rhs_[r] / a;
      if (ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 && (pr == m_ || basis_[r] < basis_[pr]))) {
        best_ratio = ratio;
        pr = r;
      }
    }
    if (pr == m_) return false;
    eliminate(pr, col);
    return true;
  }

  void eliminate(std::size_t pr, std::size_t col) {
    double* prow = row(pr);
    double inv = 1.0 / prow[col];
    kern::scale(prow, inv, ncols_);
    rhs_[pr] *= inv;
    prow[col] = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == pr || !active_[r]) continue;
      double f = row(r)[col];
      if (f == 0.0) continue;
      kern::axpy(row(r), -f, prow, ncols_);
      row(r)[col] = 0.0;
      rhs_[r] -= f * rhs_[pr];
      if (rhs_[r] < 0.0 && rhs_[r] > -1e-11) rhs_[r] = 0.0;
    }
    double fc = cost_[col];
    if (fc != 0.0 && std::isfinite(fc)) {
      kern::axpy(cost_.data(), -fc, prow, ncols_);
      cost_[col] = 0.0;
      cost_value_ -= fc * rhs_[pr];
    }
    basis_[pr] = col;
  }

  // Dantzig pricing with a Bland fallback; price_width limits the candidate
  // columns (n_ in phase 2 keeps artificials out).
  std::size_t choose_column(bool bland, std::size_t price_width) const {
    if (bland) {
      for (std::size_t j = 0; j < price_width; ++j)
        if (cost_[j] < -opt_.opt_tol) return j;
      return ncols_;
    }
    std::size_t j = kern::argmin(cost_.data(), price_width);
    return cost_[j] < -opt_.opt_tol ? j : ncols_;
  }

  Status run(std::size_t price_width, long max_iters, long& iters) {
    int stalls = 0;
    bool bland = false;
    while (true) {
      if (iters >= max_iters) return Status::IterationLimit;
      std::size_t col = choose_column(bland, price_width);
      if (col == ncols_) return Status::Optimal;
      double before = cost_value_;
      if (!pivot_on_column(col)) return Status::Unbounded;
      ++iters;
      // cost_value_ is the negated objective, so progress raises it
      if (cost_value_ <= before + 1e-13) {
        if (++stalls >= opt_.stall_limit) bland = true;
      } else {
        stalls = 0;
        bland = false;
      }
    }
  }

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t ncols() const { return ncols_; }
  double objective() const { return -cost_value_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  double rhs(std::size_t r) const { return rhs_[r]; }
  bool active(std::size_t r) const { return active_[r] != 0; }
  void deactivate(std::size_t r) { active_[r] = 0; }

 private:
  std::size_t n_, m_, ncols_;
  Options opt_;
  std::vector<double> data_;
  std::vector<double> rhs_;
  std::vector<double> cost_;
  double cost_value_ = 0.0;  // negative of current objective
  std::vector<std::size_t> basis_;
  std::vector<std::uint8_t> active_;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  const std::size_t n = problem.num_vars();
  const std::size_t m = problem.num_rows();
  for (const auto& row : problem.rows)
    if (row.size() != n)
      throw InputError("lp_shape", "constraint row width does not match variable count");
  if (problem.rhs.size() != m) throw InputError("lp_shape", "rhs size mismatch");

  Solution sol;
  long max_iters = options.max_iters > 0
                       ? options.max_iters
                       : static_cast<long>(200 * (m + n) + 10000);
  Tableau tab(problem, options);

  // Phase 1: drive the artificial basis out. Pricing stays on real columns;
  // artificials only ever leave.
  std::vector<double> zero(n, 0.0);
  tab.rebuild_costs(zero, /*phase1=*/true);
  Status st = tab.run(tab.n(), max_iters, sol.iterations);
  if (st == Status::IterationLimit) {
    sol.status = st;
    sol.message = "phase 1 hit the iteration limit";
    return sol;
  }
  if (tab.objective() > options.feas_tol * (1.0 + static_cast<double>(m))) {
    sol.status = Status::Infeasible;
    sol.message = "phase 1 optimum " + std::to_string(tab.objective()) + " > 0";
    return sol;
  }
  // Pivot remaining zero-level artificials out; rows that cannot pivot are
  // redundant and drop from the system.
  for (std::size_t r = 0; r < tab.m(); ++r) {
    if (!tab.active(r) || tab.basis()[r] < n) continue;
    std::size_t enter = tab.ncols();
    for (std::size_t j = 0; j < n; ++j)
      if (std::fabs(tab.row(r)[j]) > 1e-7) {
        enter = j;
        break;
      }
    if (enter == tab.ncols())
      tab.deactivate(r);
    else
      tab.eliminate(r, enter);
  }

  // Phase 2 on the real objective.
  tab.rebuild_costs(problem.c, /*phase1=*/false);
  st = tab.run(tab.n(), max_iters, sol.iterations);
  if (st == Status::Unbounded) {
    sol.status = st;
    sol.message = "objective unbounded below over the feasible flow";
    return sol;
  }
  if (st == Status::IterationLimit) {
    sol.status = st;
    sol.message = "phase 2 hit the iteration limit";
    return sol;
  }

  sol.status = Status::Optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < tab.m(); ++r) {
    if (!tab.active(r)) continue;
    std::size_t b = tab.basis()[r];
    if (b < n) sol.x[b] = std::max(0.0, tab.rhs(r));
  }
  sol.objective = kern::dot(sol.x.data(), problem.c.data(), n);
  return sol;
}

void write_lp_format(std::ostream& os, const Problem& problem, const std::string& name) {
  auto var = [&](std::size_t j) {
    return problem.var_names.size() == problem.num_vars() ? problem.var_names[j]
                                                          : "x" + std::to_string(j);
  };
  os << "\\ " << name << "\n";
  os << "Minimize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    if (problem.c[j] == 0.0) continue;
    os << (first ? " " : problem.c[j] < 0 ? " " : " + ");
    if (problem.c[j] < 0) os << "- ";
    os << std::fabs(problem.c[j]) << " " << var(j);
    first = false;
  }
  if (first) os << " 0 " << var(0);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < problem.num_rows(); ++r) {
    std::string rname = problem.row_names.size() == problem.num_rows()
                            ? problem.row_names[r]
                            : "c" + std::to_string(r);
    os << " " << rname << ":";
    bool empty = true;
    for (std::size_t j = 0; j < problem.num_vars(); ++j) {
      double a = problem.rows[r][j];
      if (a == 0.0) continue;
      os << (empty ? " " : a < 0 ? " " : " + ");
      if (a < 0) os << "- ";
      os << std::fabs(a) << " " << var(j);
      empty = false;
    }
    if (empty) os << " 0 " << var(0);
    os << " = " << problem.rhs[r] << "\n";
  }
  os << "End\n";
}

}  // namespace dpp::lp
