#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "robagg/model.hpp"

// Data-parallel inner loops of the robust solver. Every kernel has an OpenMP
// version in robagg::kernels and a plain loop in robagg::kernels::reference;
// the two must agree bit for bit (reductions use a fixed block layout).
namespace robagg::kernels {

// Regret of aggregator f against structure k is
//   best[k] - sum_x d[k][x] (2 f(x) - 1)
// where d is the signed joint mass and best the omniscient utility.
struct RegretTable {
  int n = 0;
  std::size_t size = 0;
  std::vector<double> signed_mass;  // size * (n + 1), row-major
  std::vector<double> best;

  std::span<const double> row(std::size_t k) const {
    return {signed_mass.data() + k * (n + 1), static_cast<std::size_t>(n + 1)};
  }
};

struct ArgMax {
  double value = 0.0;
  std::size_t index = 0;
};

// Fixed reduction block; partial sums are combined in block order.
inline constexpr std::size_t kBlock = 1024;

RegretTable regret_table(std::span<const ThreeSignalStructure> structures,
                         RationalityLevel lambda, int n);
ArgMax max_regret(const RegretTable& table, std::span<const double> f);
// out[x] = sum_k w[k] d[k][x]
std::vector<double> mixture_signed_mass(const RegretTable& table, std::span<const double> w);
// log_w[k] += eta * regret(f, k)
void hedge_step(const RegretTable& table, std::span<const double> f, double eta,
                std::span<double> log_w);
// True iff the threshold inequality holds at every lattice pair q0 <= q1.
bool threshold_lattice_holds(double lambda, int n, int resolution, double epsilon);

namespace reference {
RegretTable regret_table(std::span<const ThreeSignalStructure> structures,
                         RationalityLevel lambda, int n);
ArgMax max_regret(const RegretTable& table, std::span<const double> f);
std::vector<double> mixture_signed_mass(const RegretTable& table, std::span<const double> w);
void hedge_step(const RegretTable& table, std::span<const double> f, double eta,
                std::span<double> log_w);
bool threshold_lattice_holds(double lambda, int n, int resolution, double epsilon);
}  // namespace reference

// Shared per-element pieces, exposed for the reference and parallel loops.
namespace detail {
void fill_row(const ThreeSignalStructure& s, RationalityLevel lambda, int n, double* d,
              double* best);
double regret_of_row(const double* d, double best, std::span<const double> f);
std::vector<double> threshold_lattice(double lambda, int resolution, double epsilon);

// Both sides of the threshold inequality in log space (-inf encodes 0):
//   lhs(q) = log[(q(1-q))^k (1-2q) / (psi(1) - q)]
//   rhs(q) = lhs(q) + log[(2 lambda + L) / (2 lambda - L)],  L = log((1-q)/q)
// with k = floor((n - 1) / 2).
struct ThresholdSides {
  double log_lhs;
  double log_rhs;
};
ThresholdSides threshold_sides(double lambda, int n, double q);

// Slack on the log comparison; absorbs rounding at q0 == q1.
inline constexpr double kLogSlack = 1e-12;
}  // namespace detail

}  // namespace robagg::kernels
