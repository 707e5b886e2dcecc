#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "robagg/aggregate.hpp"
#include "robagg/model.hpp"

namespace robagg {

struct RobustDefaults {
  int structure_resolution = 51;  // points per axis of the (mu, p0, p1) lattice
  int threshold_resolution = 400;
  double lambda_tolerance = 1e-3;
  int iterations = 200;
  // Open boundary above psi(0) for the threshold lattice.
  double threshold_epsilon = 1e-9;
  double refine_step = 1e-6;
};

inline constexpr RobustDefaults kRobustDefaults{};

// The threshold inequality at one (q0, q1) pair. Requires
// psi(0) < q0 <= q1 <= 1/2 and n >= 3; evaluated in log space.
bool pairwise_inequality_holds(double lambda, int n, double q0, double q1);

// The inequality on every lattice pair of [psi(0) + eps, 1/2]. Always true
// for n <= 2.
bool check_lambda(double lambda, int n, int grid_resolution = kRobustDefaults.threshold_resolution);

struct ThresholdResult {
  int n = 0;
  double g = 0.0;  // +infinity when n <= 2
  double lambda_tolerance = 0.0;
  int grid_resolution = 0;

  bool is_infinite() const;
};

// Largest lambda passing check_lambda, found by doubling then bisection.
ThresholdResult g_of_n(int n, double lambda_tol = kRobustDefaults.lambda_tolerance,
                       int grid_resolution = kRobustDefaults.threshold_resolution);

// Uniform lattice over (mu, p0, p1), endpoints included; index
// (i * r + j) * r + k for mu_i, p0_j, p1_k.
std::vector<ThreeSignalStructure> structure_grid(int resolution);

struct WorstCase {
  double regret = 0.0;
  ThreeSignalStructure structure;
};

// Maximum regret over the given structures, optionally followed by a local
// coordinate search from the argmax with step halving down to `min_step`.
WorstCase worst_case_regret(const Aggregator& f, RationalityLevel lambda,
                            std::span<const ThreeSignalStructure> structures,
                            double initial_step, double min_step);
WorstCase worst_case_regret(const Aggregator& f, RationalityLevel lambda, int resolution);

struct WeightedStructure {
  ThreeSignalStructure structure;
  double weight = 0.0;
};

struct MinimaxSolution {
  Aggregator aggregator;
  // Certified lower bound on the game value over the lattice: the adversary
  // mixture's guaranteed regret against any aggregator.
  double value = 0.0;
  // Worst-case regret of `aggregator` on the lattice and after local refinement.
  double grid_upper = 0.0;
  double refined_upper = 0.0;
  double duality_gap = 0.0;  // refined_upper - value
  std::vector<WeightedStructure> adversary_support;
  int hedge_rounds = 0;
  int oracle_rounds = 0;
};

struct MinimaxOptions {
  int resolution = kRobustDefaults.structure_resolution;
  int iterations = kRobustDefaults.iterations;
  bool refine = true;  // local search off the lattice for the reported upper bound
  int max_oracle_rounds = 2000;
  double stop_gap = 1e-12;
};

MinimaxSolution solve_minimax(RationalityLevel lambda, int n, const MinimaxOptions& options = {});
// Same game over an explicit structure list (no off-lattice refinement).
MinimaxSolution solve_minimax(RationalityLevel lambda, int n,
                              std::span<const ThreeSignalStructure> structures, int iterations);

struct RegretCurveRow {
  double lambda = 0.0;
  int n = 1;
  double regret_majority = 0.0;
  double regret_optimal = 0.0;
  double duality_gap = 0.0;
};

std::vector<RegretCurveRow> regret_sweep(std::span<const double> lambda_grid,
                                         std::span<const int> n_list,
                                         const MinimaxOptions& options = {});

// Odd-symmetric partner (mu, p0, p1) -> (1 - mu, p1, p0): swaps the roles of
// the two states and of the signals 0 and 1.
ThreeSignalStructure symmetric_partner(const ThreeSignalStructure& s);

}  // namespace robagg
