#include "robagg/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "robagg/error.hpp"
#include "robagg/kernels.hpp"
#include "robagg/lp.hpp"

namespace robagg {

bool pairwise_inequality_holds(double lambda, int n, double q0, double q1) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("pairwise inequality needs a finite lambda > 0");
  }
  if (n < 1) throw ValidationError("pairwise inequality needs n >= 1");
  const double floor_q = psi(lambda, 0.0);
  if (!(q0 > floor_q)) {
    throw ValidationError("q0 = " + std::to_string(q0) + " must exceed psi(0) = " +
                          std::to_string(floor_q));
  }
  if (!(q1 <= 0.5)) throw ValidationError("q1 must not exceed 1/2");
  if (!(q0 <= q1)) throw ValidationError("q0 must not exceed q1");
  const auto low = kernels::detail::threshold_sides(lambda, n, q0);
  const auto high = kernels::detail::threshold_sides(lambda, n, q1);
  return high.log_lhs <= low.log_rhs + kernels::detail::kLogSlack;
}

bool check_lambda(double lambda, int n, int grid_resolution) {
  if (grid_resolution < 100) throw ValidationError("threshold grid resolution must be >= 100");
  if (n <= 2) return true;
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("check_lambda needs a finite lambda > 0");
  }
  return kernels::threshold_lattice_holds(lambda, n, grid_resolution,
                                          kRobustDefaults.threshold_epsilon);
}

bool ThresholdResult::is_infinite() const { return std::isinf(g); }

ThresholdResult g_of_n(int n, double lambda_tol, int grid_resolution) {
  if (n < 1) throw ValidationError("g_of_n needs n >= 1");
  if (!(lambda_tol > 0.0)) throw ValidationError("lambda tolerance must be positive");
  ThresholdResult result{n, std::numeric_limits<double>::infinity(), lambda_tol,
                         grid_resolution};
  if (n <= 2) return result;

  constexpr double kBracketCap = 1e6;
  double lo = 0.0;
  double hi = 1.0;
  while (check_lambda(hi, n, grid_resolution)) {
    lo = hi;
    hi *= 2.0;
    if (hi > kBracketCap) return result;
  }
  while (hi - lo >= lambda_tol) {
    const double mid = 0.5 * (lo + hi);
    if (check_lambda(mid, n, grid_resolution)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.g = lo;
  return result;
}

std::vector<ThreeSignalStructure> structure_grid(int resolution) {
  if (resolution < 2) throw ValidationError("structure grid resolution must be >= 2");
  const auto axis = [resolution](int i) {
    return i + 1 == resolution ? 1.0 : static_cast<double>(i) / (resolution - 1);
  };
  std::vector<ThreeSignalStructure> grid;
  grid.reserve(static_cast<std::size_t>(resolution) * resolution * resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      for (int k = 0; k < resolution; ++k) {
        grid.push_back(make_three_signal(axis(i), axis(j), axis(k)));
      }
    }
  }
  return grid;
}

ThreeSignalStructure symmetric_partner(const ThreeSignalStructure& s) {
  return make_three_signal(1.0 - s.mu, s.p1, s.p0);
}

namespace {

double structure_regret(const Aggregator& f, RationalityLevel lambda,
                        const ThreeSignalStructure& s) {
  return regret(f, report_structure(s, lambda));
}

WorstCase refine(const Aggregator& f, RationalityLevel lambda, WorstCase start,
                 double initial_step, double min_step) {
  constexpr int kMaxMoves = 100000;
  WorstCase cur = start;
  double h = initial_step;
  int moves = 0;
  while (h >= min_step && moves < kMaxMoves) {
    bool improved = false;
    for (int c = 0; c < 3; ++c) {
      for (double sign : {1.0, -1.0}) {
        double coords[3] = {cur.structure.mu, cur.structure.p0, cur.structure.p1};
        coords[c] = std::clamp(coords[c] + sign * h, 0.0, 1.0);
        const auto cand = make_three_signal(coords[0], coords[1], coords[2]);
        const double r = structure_regret(f, lambda, cand);
        if (r > cur.regret) {
          cur = {r, cand};
          improved = true;
          ++moves;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return cur;
}

std::vector<double> best_response(std::span<const double> mixture_mass) {
  std::vector<double> f(mixture_mass.size());
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (mixture_mass[x] > 0.0) {
      f[x] = 1.0;
    } else if (mixture_mass[x] < 0.0) {
      f[x] = 0.0;
    } else {
      f[x] = 0.5;
    }
  }
  return f;
}

// Guaranteed regret of a mixture against every aggregator:
//   sum_k w_k best_k - sum_x |sum_k w_k d_k(x)|.
double mixture_floor(const kernels::RegretTable& table, std::span<const std::size_t> support,
                     std::span<const double> weights) {
  std::vector<double> mass(table.n + 1, 0.0);
  double value = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto row = table.row(support[i]);
    value += weights[i] * table.best[support[i]];
    for (std::size_t x = 0; x < mass.size(); ++x) mass[x] += weights[i] * row[x];
  }
  for (double m : mass) value -= std::abs(m);
  return value;
}

struct RestrictedGame {
  std::vector<double> f;
  std::vector<double> weights;  // aligned with support
};

// min_f max_{k in support} regret(f, k) as a linear program in (f, t).
RestrictedGame solve_restricted(const kernels::RegretTable& table,
                                std::span<const std::size_t> support) {
  const int m = table.n + 1;
  const int s = static_cast<int>(support.size());
  const int vars = m + 1 + m + s;  // f, t, box slacks, surpluses
  lp::Problem p;
  p.c.assign(vars, 0.0);
  p.c[m] = 1.0;
  for (int i = 0; i < s; ++i) {
    const auto row = table.row(support[i]);
    std::vector<double> a(vars, 0.0);
    double rhs = table.best[support[i]];
    for (int x = 0; x < m; ++x) {
      a[x] = 2.0 * row[x];
      rhs += row[x];
    }
    a[m] = 1.0;
    a[2 * m + 1 + i] = -1.0;
    p.a.push_back(std::move(a));
    p.b.push_back(std::max(0.0, rhs));
  }
  for (int x = 0; x < m; ++x) {
    std::vector<double> a(vars, 0.0);
    a[x] = 1.0;
    a[m + 1 + x] = 1.0;
    p.a.push_back(std::move(a));
    p.b.push_back(1.0);
  }
  const lp::Solution sol = lp::solve(p);
  if (sol.status != lp::Status::kOptimal) {
    throw NumericError("restricted minimax program did not reach an optimum");
  }
  RestrictedGame game;
  game.f.resize(m);
  for (int x = 0; x < m; ++x) game.f[x] = std::clamp(sol.x[x], 0.0, 1.0);
  game.weights.resize(s);
  double total = 0.0;
  for (int i = 0; i < s; ++i) {
    game.weights[i] = std::max(0.0, sol.duals[i]);
    total += game.weights[i];
  }
  if (!(total > 0.0)) throw NumericError("restricted minimax program returned no mixture");
  for (double& w : game.weights) w /= total;
  return game;
}

MinimaxSolution solve_on(RationalityLevel lambda, int n,
                         std::span<const ThreeSignalStructure> structures, int iterations,
                         int max_oracle_rounds, double stop_gap) {
  if (iterations < 1) throw ValidationError("solve_minimax needs iterations >= 1");
  if (structures.empty()) throw ValidationError("solve_minimax needs at least one structure");
  const kernels::RegretTable table = kernels::regret_table(structures, lambda, n);
  const std::size_t count = table.size;
  const std::size_t width = n + 1;

  // Hedge for the adversary against a best-responding aggregator.
  std::vector<double> log_w(count, 0.0);
  std::vector<double> w(count);
  std::vector<double> w_sum(count, 0.0);
  std::vector<double> f_sum(width, 0.0);
  // Regrets lie in [0, 2]; the step is scaled to payoffs in [0, 1].
  const double eta =
      0.5 * std::sqrt(8.0 * std::log(std::max<double>(2.0, count)) / iterations);
  for (int t = 0; t < iterations; ++t) {
    const double top = *std::max_element(log_w.begin(), log_w.end());
    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      w[k] = std::exp(log_w[k] - top);
      total += w[k];
    }
    for (std::size_t k = 0; k < count; ++k) {
      w[k] /= total;
      w_sum[k] += w[k];
    }
    const std::vector<double> f_t = best_response(kernels::mixture_signed_mass(table, w));
    for (std::size_t x = 0; x < width; ++x) f_sum[x] += f_t[x];
    kernels::hedge_step(table, f_t, eta, log_w);
  }
  std::vector<double> f_avg(width);
  for (std::size_t x = 0; x < width; ++x) f_avg[x] = f_sum[x] / iterations;

  // Oracle refinement: solve the game restricted to a growing support and add
  // the lattice point that beats the restricted solution the most.
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t seeds = std::min<std::size_t>(count, 32);
  std::partial_sort(order.begin(), order.begin() + seeds, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return w_sum[a] > w_sum[b] || (w_sum[a] == w_sum[b] && a < b);
                    });
  std::vector<std::size_t> support(order.begin(), order.begin() + seeds);
  const auto add = [&support](std::size_t k) {
    if (std::find(support.begin(), support.end(), k) == support.end()) support.push_back(k);
  };
  add(kernels::max_regret(table, f_avg).index);
  add(kernels::max_regret(table, majority(n).values).index);

  MinimaxSolution sol;
  sol.hedge_rounds = iterations;
  RestrictedGame game;
  kernels::ArgMax worst;
  for (int round = 0;; ++round) {
    game = solve_restricted(table, support);
    worst = kernels::max_regret(table, game.f);
    sol.value = mixture_floor(table, support, game.weights);
    sol.oracle_rounds = round + 1;
    const bool known =
        std::find(support.begin(), support.end(), worst.index) != support.end();
    if (worst.value - sol.value <= stop_gap || known || round + 1 >= max_oracle_rounds) break;
    support.push_back(worst.index);
  }

  sol.aggregator = Aggregator{n, game.f};
  sol.grid_upper = worst.value;
  sol.refined_upper = worst.value;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (game.weights[i] > 0.0) {
      sol.adversary_support.push_back({structures[support[i]], game.weights[i]});
    }
  }
  sol.duality_gap = std::max(0.0, sol.refined_upper - sol.value);
  return sol;
}

double lattice_step(int resolution) { return 1.0 / (resolution - 1); }

}  // namespace

WorstCase worst_case_regret(const Aggregator& f, RationalityLevel lambda,
                            std::span<const ThreeSignalStructure> structures,
                            double initial_step, double min_step) {
  if (structures.empty()) throw ValidationError("worst_case_regret needs structures");
  const kernels::RegretTable table = kernels::regret_table(structures, lambda, f.n);
  const kernels::ArgMax am = kernels::max_regret(table, f.values);
  WorstCase start{std::max(0.0, am.value), structures[am.index]};
  if (initial_step < min_step) return start;
  return refine(f, lambda, start, initial_step, min_step);
}

WorstCase worst_case_regret(const Aggregator& f, RationalityLevel lambda, int resolution) {
  const auto grid = structure_grid(resolution);
  return worst_case_regret(f, lambda, grid, lattice_step(resolution),
                           kRobustDefaults.refine_step);
}

MinimaxSolution solve_minimax(RationalityLevel lambda, int n,
                              std::span<const ThreeSignalStructure> structures, int iterations) {
  return solve_on(lambda, n, structures, iterations, MinimaxOptions{}.max_oracle_rounds,
                  MinimaxOptions{}.stop_gap);
}

MinimaxSolution solve_minimax(RationalityLevel lambda, int n, const MinimaxOptions& options) {
  const auto grid = structure_grid(options.resolution);
  MinimaxSolution sol = solve_on(lambda, n, grid, options.iterations, options.max_oracle_rounds,
                                 options.stop_gap);
  if (options.refine) {
    const WorstCase wc = worst_case_regret(sol.aggregator, lambda, grid,
                                           lattice_step(options.resolution),
                                           kRobustDefaults.refine_step);
    sol.refined_upper = std::max(sol.grid_upper, wc.regret);
    sol.duality_gap = std::max(0.0, sol.refined_upper - sol.value);
  }
  return sol;
}

std::vector<RegretCurveRow> regret_sweep(std::span<const double> lambda_grid,
                                         std::span<const int> n_list,
                                         const MinimaxOptions& options) {
  if (lambda_grid.empty() || n_list.empty()) {
    throw ValidationError("regret_sweep needs nonempty lambda and n lists");
  }
  const auto grid = structure_grid(options.resolution);
  const double step = lattice_step(options.resolution);
  // Without refinement the search never starts.
  const double min_step = options.refine ? kRobustDefaults.refine_step : 2.0 * step;
  std::vector<RegretCurveRow> rows;
  for (int n : n_list) {
    const Aggregator maj = majority(n);
    for (double l : lambda_grid) {
      const auto lambda = RationalityLevel::finite(l);
      const WorstCase wc_maj =
          worst_case_regret(maj, lambda, grid, step, min_step);
      MinimaxSolution sol = solve_on(lambda, n, grid, options.iterations,
                                     options.max_oracle_rounds, options.stop_gap);
      const WorstCase wc_opt =
          worst_case_regret(sol.aggregator, lambda, grid, step, min_step);
      const double upper = std::max(sol.grid_upper, wc_opt.regret);
      rows.push_back({l, n, wc_maj.regret, upper, std::max(0.0, upper - sol.value)});
    }
  }
  return rows;
}

}  // namespace robagg
