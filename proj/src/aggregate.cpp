#include "robagg/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robagg/config.hpp"
#include "robagg/error.hpp"

namespace robagg {

Aggregator make_aggregator(std::vector<double> values) {
  const int n = static_cast<int>(values.size()) - 1;
  if (n < 1 || n > kMaxExperts) {
    throw ValidationError("aggregator needs between 2 and " + std::to_string(kMaxExperts + 1) +
                          " entries, got " + std::to_string(values.size()));
  }
  for (double v : values) require_probability(v, "aggregator entry");
  return Aggregator{n, std::move(values)};
}

Aggregator majority(int n) {
  if (n < 1 || n > kMaxExperts) throw ValidationError("majority needs 1 <= n <= 64");
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  for (int x = 0; x <= n; ++x) {
    if (2 * x < n) {
      v[x] = 0.0;
    } else if (2 * x == n) {
      v[x] = 0.5;
    } else {
      v[x] = 1.0;
    }
  }
  return Aggregator{n, std::move(v)};
}

std::vector<double> signed_mass(const ReportStructure& report, int n) {
  const CountDistribution d = count_distribution(report, n);
  std::vector<double> s(d.pmf0.size());
  for (std::size_t x = 0; x < s.size(); ++x) {
    s[x] = report.mu * d.pmf1[x] - (1.0 - report.mu) * d.pmf0[x];
  }
  return s;
}

double utility(std::span<const double> f, std::span<const double> signed_d) {
  double u = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) u += signed_d[x] * (2.0 * f[x] - 1.0);
  return u;
}

double utility(const Aggregator& f, const ReportStructure& report) {
  return utility(f.values, signed_mass(report, f.n));
}

Aggregator omniscient(const ReportStructure& report, int n) {
  const CountDistribution d = count_distribution(report, n);
  std::vector<double> v(d.posterior.size());
  for (std::size_t x = 0; x < v.size(); ++x) {
    const double gap = d.posterior[x] - 0.5;
    if (std::abs(gap) <= kTol.tie_band) {
      v[x] = 0.5;
    } else {
      v[x] = gap > 0.0 ? 1.0 : 0.0;
    }
  }
  return Aggregator{n, std::move(v)};
}

double regret(const Aggregator& f, const ReportStructure& report) {
  const std::vector<double> s = signed_mass(report, f.n);
  const Aggregator opt = omniscient(report, f.n);
  return std::max(0.0, utility(opt.values, s) - utility(f.values, s));
}

ThreeSignalStructure theta_star() { return make_three_signal(0.25, 0.5, 1.0); }

std::vector<AdvantageCurveRow> advantage_curve(const ThreeSignalStructure& structure, int n,
                                               std::span<const double> lambda_grid) {
  if (lambda_grid.empty()) throw ValidationError("advantage_curve needs a nonempty grid");
  const Aggregator maj = majority(n);
  std::vector<AdvantageCurveRow> rows;
  rows.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const ReportStructure rep = report_structure(structure, RationalityLevel::finite(lambda));
    rows.push_back({lambda, n, utility(maj, rep), utility(omniscient(rep, n), rep)});
  }
  return rows;
}

}  // namespace robagg
