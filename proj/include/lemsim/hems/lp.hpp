#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace lemsim::lp {

/// min c'x  s.t.  A x = b,  0 <= x <= u   (every variable bounded, u > 0).
///
/// Columns are stored sparsely. Rows should be numbered so that each column
/// touches a narrow band of rows; the solver factors the normal equations as
/// a banded matrix.
class Problem {
 public:
  explicit Problem(int rows = 0) : rhs_(static_cast<std::size_t>(rows), 0.0) {}

  int add_row(double rhs) {
    rhs_.push_back(rhs);
    return static_cast<int>(rhs_.size()) - 1;
  }
  void set_rhs(int row, double v) { rhs_[static_cast<std::size_t>(row)] = v; }
  void add_rhs(int row, double v) { rhs_[static_cast<std::size_t>(row)] += v; }

  /// Adds a column; entries are (row, coefficient) pairs.
  int add_column(double cost, double upper, std::initializer_list<std::pair<int, double>> entries);

  [[nodiscard]] int rows() const noexcept { return static_cast<int>(rhs_.size()); }
  [[nodiscard]] int cols() const noexcept { return static_cast<int>(cost_.size()); }

  std::vector<double> cost_, upper_, rhs_;
  std::vector<int> col_start_{0};
  std::vector<int> row_idx_;
  std::vector<double> val_;
};

struct Options {
  double feasibility_tol{1e-8};
  double gap_tol{1e-9};
  int max_iterations{100};
};

struct Solution {
  std::vector<double> x;
  std::vector<double> y;
  double objective{0.0};
  double dual_objective{0.0};
  int iterations{0};
};

/// Mehrotra predictor-corrector interior point method. Throws SolverFailure
/// when the iteration does not converge (infeasible or unbounded input).
Solution solve(const Problem& p, const Options& opts = {});

}  // namespace lemsim::lp
