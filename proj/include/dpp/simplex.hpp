#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

// Dense two-phase primal simplex for equality-constrained programs
//   min c.x   s.t.  A x = b,  x >= 0.
// Infrastructure behind lp_planner; callers re-validate solutions against the
// constraint system independently, so the method is swappable.
namespace dpp::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Problem {
  std::vector<double> c;
  std::vector<std::vector<double>> rows;  // each of size c.size()
  std::vector<double> rhs;
  std::vector<std::string> var_names;  // optional, used by the LP dump
  std::vector<std::string> row_names;

  std::size_t num_vars() const { return c.size(); }
  std::size_t num_rows() const { return rows.size(); }
};

struct Options {
  double pivot_tol = 1e-9;
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  long max_iters = 0;  // 0: 200*(m+n)+10000
  int stall_limit = 64;  // degenerate pivots before switching to Bland's rule
};

struct Solution {
  Status status = Status::IterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  long iterations = 0;
  std::string message;
};

Solution solve(const Problem& problem, const Options& options = {});

// CPLEX LP text format, for external cross-checks.
void write_lp_format(std::ostream& os, const Problem& problem, const std::string& name);

}  // namespace dpp::lp
