#pragma once

#include <span>
#include <vector>

#include "robagg/model.hpp"

namespace robagg {

// Anonymous aggregator: f(x) is the probability of guessing state 1 after
// seeing x one-reports out of n.
struct Aggregator {
  int n = 1;
  std::vector<double> values;  // n + 1 entries in [0, 1]

  double operator()(int x) const { return values[x]; }
};

// Validates length n + 1, n in [1, kMaxExperts] and entries in [0, 1].
Aggregator make_aggregator(std::vector<double> values);

// 0 below n/2, 1/2 at n/2, 1 above.
Aggregator majority(int n);

// Signed joint mass d(x) = Pr[X = x, state 1] - Pr[X = x, state 0]. Utility is
// sum_x d(x) (2 f(x) - 1); everything in this module is built on it.
std::vector<double> signed_mass(const ReportStructure& report, int n);

// Expected payoff under u = +1 for a correct guess, -1 otherwise.
double utility(const Aggregator& f, const ReportStructure& report);
double utility(std::span<const double> f, std::span<const double> signed_d);

// Utility-maximizing aggregator when the report structure is known: guess by
// the posterior, 1/2 when the posterior is within the tie band of 1/2.
Aggregator omniscient(const ReportStructure& report, int n);

double regret(const Aggregator& f, const ReportStructure& report);

// The structure with prior 1/4 whose uninformative signal has posterior 2/5:
// fully rational experts all report 0, boundedly rational ones do not.
ThreeSignalStructure theta_star();

struct AdvantageCurveRow {
  double lambda = 0.0;
  int n = 1;
  double utility_majority = 0.0;
  double utility_omniscient = 0.0;
};

std::vector<AdvantageCurveRow> advantage_curve(const ThreeSignalStructure& structure, int n,
                                               std::span<const double> lambda_grid);

}  // namespace robagg
