#include "robagg/lp.hpp"

#include <cmath>
#include <limits>

#include "robagg/error.hpp"

namespace robagg::lp {
namespace {

constexpr double kPivotEps = 1e-12;
constexpr int kMaxPivots = 200000;

class Tableau {
 public:
  explicit Tableau(const Problem& p)
      : rows_(static_cast<int>(p.b.size())),
        vars_(static_cast<int>(p.c.size())),
        cols_(vars_ + rows_ + 1),
        t_(static_cast<std::size_t>(rows_) * cols_, 0.0),
        basis_(rows_) {
    for (int r = 0; r < rows_; ++r) {
      if (static_cast<int>(p.a[r].size()) != vars_) {
        throw ValidationError("lp: row length does not match cost vector");
      }
      if (p.b[r] < 0.0) throw ValidationError("lp: right-hand side must be nonnegative");
      for (int j = 0; j < vars_; ++j) at(r, j) = p.a[r][j];
      at(r, vars_ + r) = 1.0;  // artificial
      at(r, cols_ - 1) = p.b[r];
      basis_[r] = vars_ + r;
    }
  }

  double& at(int r, int j) { return t_[static_cast<std::size_t>(r) * cols_ + j]; }
  double at(int r, int j) const { return t_[static_cast<std::size_t>(r) * cols_ + j]; }
  double rhs(int r) const { return at(r, cols_ - 1); }

  // Runs the simplex method for cost vector `cost` (length vars_ + rows_);
  // columns with allowed[j] == false never enter. Returns false if unbounded.
  bool optimize(const std::vector<double>& cost, const std::vector<bool>& allowed, int& pivots) {
    while (pivots < kMaxPivots) {
      int enter = -1;
      for (int j = 0; j < vars_ + rows_; ++j) {
        if (!allowed[j]) continue;
        if (reduced_cost(cost, j) < -1e-11) {
          enter = j;  // Bland: lowest index
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= kPivotEps) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && leave >= 0 &&
                                     basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
    }
    throw NumericError("lp: pivot limit reached");
  }

  double reduced_cost(const std::vector<double>& cost, int j) const {
    double z = cost[j];
    for (int r = 0; r < rows_; ++r) z -= cost[basis_[r]] * at(r, j);
    return z;
  }

  void pivot(int r, int j) {
    const double inv = 1.0 / at(r, j);
    for (int k = 0; k < cols_; ++k) at(r, k) *= inv;
    for (int i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double factor = at(i, j);
      if (factor == 0.0) continue;
      for (int k = 0; k < cols_; ++k) at(i, k) -= factor * at(r, k);
    }
    basis_[r] = j;
  }

  int rows() const { return rows_; }
  int vars() const { return vars_; }
  const std::vector<int>& basis() const { return basis_; }

 private:
  int rows_;
  int vars_;
  int cols_;
  std::vector<double> t_;
  std::vector<int> basis_;
};

}  // namespace

Solution solve(const Problem& problem) {
  if (problem.a.size() != problem.b.size()) {
    throw ValidationError("lp: row count does not match right-hand side");
  }
  Tableau tab(problem);
  const int m = tab.rows();
  const int n = tab.vars();
  Solution sol;

  // Phase 1: drive the artificials to zero.
  std::vector<double> cost1(n + m, 0.0);
  for (int r = 0; r < m; ++r) cost1[n + r] = 1.0;
  std::vector<bool> allowed(n + m, true);
  tab.optimize(cost1, allowed, sol.pivots);
  double infeasibility = 0.0;
  for (int r = 0; r < m; ++r) {
    if (tab.basis()[r] >= n) infeasibility += tab.rhs(r);
  }
  if (infeasibility > 1e-9) {
    sol.status = Status::kInfeasible;
    return sol;
  }
  // Pivot degenerate artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (tab.basis()[r] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tab.at(r, j)) > 1e-9) {
        tab.pivot(r, j);
        ++sol.pivots;
        break;
      }
    }
  }

  // Phase 2 on the original costs; artificials stay out.
  std::vector<double> cost2(n + m, 0.0);
  for (int j = 0; j < n; ++j) cost2[j] = problem.c[j];
  for (int r = 0; r < m; ++r) allowed[n + r] = false;
  if (!tab.optimize(cost2, allowed, sol.pivots)) {
    sol.status = Status::kUnbounded;
    return sol;
  }

  sol.status = Status::kOptimal;
  sol.x.assign(n, 0.0);
  for (int r = 0; r < m; ++r) {
    if (tab.basis()[r] < n) sol.x[tab.basis()[r]] = tab.rhs(r);
  }
  sol.objective = 0.0;
  for (int j = 0; j < n; ++j) sol.objective += problem.c[j] * sol.x[j];
  // The artificial columns carry B^-1.
  sol.duals.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double y = 0.0;
    for (int r = 0; r < m; ++r) y += cost2[tab.basis()[r]] * tab.at(r, n + i);
    sol.duals[i] = y;
  }
  return sol;
}

}  // namespace robagg::lp
