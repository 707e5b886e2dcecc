#pragma once

#include <vector>

namespace robagg::lp {

// Dense two-phase simplex for small problems:
//   minimize c.x  subject to  A x = b,  x >= 0,  b >= 0.
// Bland's rule keeps degenerate problems from cycling.
struct Problem {
  std::vector<double> c;
  std::vector<std::vector<double>> a;  // rows
  std::vector<double> b;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Solution {
  Status status = Status::kInfeasible;
  std::vector<double> x;
  std::vector<double> duals;  // one per row, y = c_B B^-1
  double objective = 0.0;
  int pivots = 0;
};

Solution solve(const Problem& problem);

}  // namespace robagg::lp
