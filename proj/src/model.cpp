#include "robagg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "robagg/config.hpp"
#include "robagg/error.hpp"

namespace robagg {

RationalityLevel RationalityLevel::finite(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ValidationError("rationality level must be a finite value >= 0, got " +
                          std::to_string(value));
  }
  return RationalityLevel(value);
}

double RationalityLevel::value() const {
  if (!value_) throw ValidationError("rationality level is infinite");
  return *value_;
}

namespace {

// 1 / (1 + e^z) without overflow for large |z|.
double logistic_of_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double step(double p) {
  if (p > 0.5) return 1.0;
  if (p < 0.5) return 0.0;
  return 0.5;
}

}  // namespace

double psi(double lambda, double p) {
  return logistic_of_neg(2.0 * lambda * (1.0 - 2.0 * p));
}

double psi(RationalityLevel lambda, double p) {
  if (lambda.is_infinite()) return step(p);
  return psi(lambda.value(), p);
}

double phi(RationalityLevel lambda, double v) {
  if (lambda.is_infinite()) return step(0.5 + 0.5 * v);
  return logistic_of_neg(-2.0 * lambda.value() * v);
}

double psi_inv(double lambda, double q) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("psi_inv needs a finite rationality level > 0");
  }
  const double lo = psi(lambda, 0.0);
  const double hi = psi(lambda, 1.0);
  const double slack = 4.0 * std::numeric_limits<double>::epsilon();
  if (!(q >= lo - slack && q <= hi + slack)) {
    throw ValidationError("psi_inv: q = " + std::to_string(q) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const double logit = std::log((1.0 - q) / q);
  const double p = 0.5 * (1.0 - logit / (2.0 * lambda));
  return std::clamp(p, 0.0, 1.0);
}

void require_probability(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [0, 1], got " +
                          std::to_string(value));
  }
}

ThreeSignalStructure make_three_signal(double mu, double p0, double p1) {
  require_probability(mu, "mu");
  require_probability(p0, "p0");
  require_probability(p1, "p1");
  ThreeSignalStructure s{mu, p0, p1, 0.5};
  const double interior = mu * p1 + (1.0 - mu) * p0;
  if (interior > 0.0) s.p = mu * p1 / interior;
  return s;
}

GeneralSignalStructure make_general(double mu, std::vector<SignalAtom> atoms) {
  require_probability(mu, "mu");
  if (atoms.empty()) throw ValidationError("signal structure needs at least one atom");
  double mass = 0.0;
  double mean = 0.0;
  for (const auto& a : atoms) {
    require_probability(a.posterior, "atom posterior");
    require_probability(a.mass, "atom mass");
    mass += a.mass;
    mean += a.mass * a.posterior;
  }
  if (std::abs(mass - 1.0) > kTol.structural) {
    throw ValidationError("atom masses sum to " + std::to_string(mass) + ", expected 1");
  }
  if (std::abs(mean - mu) > kTol.structural) {
    throw ValidationError("structure is not Bayes plausible: mean posterior " +
                          std::to_string(mean) + " != mu " + std::to_string(mu));
  }
  return GeneralSignalStructure{mu, std::move(atoms)};
}

GeneralSignalStructure to_general(const ThreeSignalStructure& s) {
  return GeneralSignalStructure{
      s.mu, {{0.0, s.mass_zero()}, {s.p, s.mass_interior()}, {1.0, s.mass_one()}}};
}

ReportStructure report_structure(const ThreeSignalStructure& s, RationalityLevel lambda) {
  const double at_p = psi(lambda, s.p);
  return ReportStructure{s.mu, (1.0 - s.p0) * psi(lambda, 0.0) + s.p0 * at_p,
                         (1.0 - s.p1) * psi(lambda, 1.0) + s.p1 * at_p};
}

ReportStructure report_structure(const GeneralSignalStructure& s, RationalityLevel lambda) {
  double joint0 = 0.0;  // Pr[X = 1, state 0]
  double joint1 = 0.0;  // Pr[X = 1, state 1]
  for (const auto& a : s.atoms) {
    const double r = psi(lambda, a.posterior);
    joint0 += a.mass * (1.0 - a.posterior) * r;
    joint1 += a.mass * a.posterior * r;
  }
  const double tie = psi(lambda, 0.5);
  const double q0 = s.mu < 1.0 ? joint0 / (1.0 - s.mu) : tie;
  const double q1 = s.mu > 0.0 ? joint1 / s.mu : tie;
  return ReportStructure{s.mu, std::clamp(q0, 0.0, 1.0), std::clamp(q1, 0.0, 1.0)};
}

std::vector<double> binomial_pmf(int n, double q) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
  double coeff = 1.0;
  for (int x = 0; x <= n; ++x) {
    pmf[x] = coeff * std::pow(q, x) * std::pow(1.0 - q, n - x);
    coeff = coeff * (n - x) / (x + 1);
  }
  return pmf;
}

CountDistribution count_distribution(const ReportStructure& report, int n) {
  if (n < 1) throw ValidationError("count_distribution needs n >= 1");
  CountDistribution d;
  d.n = n;
  d.mu = report.mu;
  d.pmf0 = binomial_pmf(n, report.q0);
  d.pmf1 = binomial_pmf(n, report.q1);
  d.marginal.resize(d.pmf0.size());
  d.posterior.resize(d.pmf0.size());
  for (std::size_t x = 0; x < d.pmf0.size(); ++x) {
    const double joint1 = report.mu * d.pmf1[x];
    d.marginal[x] = (1.0 - report.mu) * d.pmf0[x] + joint1;
    d.posterior[x] = d.marginal[x] > 0.0 ? joint1 / d.marginal[x] : report.mu;
  }
  return d;
}

}  // namespace robagg
