#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "robagg/config.hpp"
#include "robagg/kernels.hpp"

namespace robagg::kernels::detail {

void fill_row(const ThreeSignalStructure& s, RationalityLevel lambda, int n, double* d,
              double* best) {
  const ReportStructure rep = report_structure(s, lambda);
  double coeff = 1.0;
  double total = 0.0;
  for (int x = 0; x <= n; ++x) {
    const double pmf0 = coeff * std::pow(rep.q0, x) * std::pow(1.0 - rep.q0, n - x);
    const double pmf1 = coeff * std::pow(rep.q1, x) * std::pow(1.0 - rep.q1, n - x);
    const double joint0 = (1.0 - rep.mu) * pmf0;
    const double joint1 = rep.mu * pmf1;
    d[x] = joint1 - joint0;
    // Same three-way rule as the omniscient aggregator.
    const double marginal = joint0 + joint1;
    const double posterior = marginal > 0.0 ? joint1 / marginal : rep.mu;
    if (std::abs(posterior - 0.5) > kTol.tie_band) total += std::abs(d[x]);
    coeff = coeff * (n - x) / (x + 1);
  }
  *best = total;
}

double regret_of_row(const double* d, double best, std::span<const double> f) {
  double u = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) u += d[x] * (2.0 * f[x] - 1.0);
  return best - u;
}

std::vector<double> threshold_lattice(double lambda, int resolution, double epsilon) {
  const double lo = psi(lambda, 0.0) + epsilon;
  std::vector<double> q(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) {
    q[i] = i + 1 == resolution ? 0.5 : lo + (0.5 - lo) * i / (resolution - 1);
  }
  return q;
}

ThresholdSides threshold_sides(double lambda, int n, double q) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const int k = (n - 1) / 2;
  const double centre = 1.0 - 2.0 * q;
  if (centre <= 0.0) return {kNegInf, kNegInf};
  const double log_lhs =
      k * std::log(q * (1.0 - q)) + std::log(centre) - std::log(psi(lambda, 1.0) - q);
  const double logit = std::log((1.0 - q) / q);
  const double log_ratio = std::log(2.0 * lambda + logit) - std::log(2.0 * lambda - logit);
  return {log_lhs, log_lhs + log_ratio};
}

}  // namespace robagg::kernels::detail
