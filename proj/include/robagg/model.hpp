#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace robagg {

// Rationality parameter of a quantal-response expert. Zero is uniform
// randomization; the infinite level is the deterministic best response
// (step function with a fair coin at posterior exactly 1/2).
class RationalityLevel {
 public:
  // Finite level; throws ValidationError when value < 0 or not finite.
  static RationalityLevel finite(double value);
  static RationalityLevel infinite() { return RationalityLevel(); }

  bool is_infinite() const { return !value_.has_value(); }
  // Throws ValidationError for the infinite level.
  double value() const;

  friend bool operator==(const RationalityLevel&, const RationalityLevel&) = default;

 private:
  RationalityLevel() = default;
  explicit RationalityLevel(double v) : value_(v) {}
  std::optional<double> value_;
};

// Probability that an expert with posterior p reports 1:
//   psi_lambda(p) = 1 / (1 + exp(2 lambda (1 - 2p))).
double psi(RationalityLevel lambda, double p);
double psi(double lambda, double p);

// Same response written on the utility difference v = 2p - 1.
double phi(RationalityLevel lambda, double v);

// Inverse of psi for finite lambda > 0; q must lie in [psi(0), psi(1)].
double psi_inv(double lambda, double q);

// Canonical three-signal c.i.i.d. structure with posteriors {0, p, 1}.
// p0 / p1 are the probabilities of the interior signal given state 0 / 1.
struct ThreeSignalStructure {
  double mu = 0.5;
  double p0 = 0.0;
  double p1 = 0.0;
  double p = 0.5;  // derived interior posterior

  // Masses of the signals with posterior 0, p and 1.
  double mass_zero() const { return (1.0 - mu) * (1.0 - p0); }
  double mass_interior() const { return mu * p1 + (1.0 - mu) * p0; }
  double mass_one() const { return mu * (1.0 - p1); }
};

ThreeSignalStructure make_three_signal(double mu, double p0, double p1);

struct SignalAtom {
  double posterior = 0.0;
  double mass = 0.0;
};

// Arbitrary finite c.i.i.d. structure given as (posterior, mass) atoms.
struct GeneralSignalStructure {
  double mu = 0.5;
  std::vector<SignalAtom> atoms;
};

// Validates total mass 1 and Bayes plausibility (sum of mass * posterior = mu).
GeneralSignalStructure make_general(double mu, std::vector<SignalAtom> atoms);

// Atoms at {0, p, 1}; zero-mass atoms are kept so the shape is fixed.
GeneralSignalStructure to_general(const ThreeSignalStructure& s);

// Joint law of (state, one expert's report).
struct ReportStructure {
  double mu = 0.5;
  double q0 = 0.5;  // Pr[X_i = 1 | state 0]
  double q1 = 0.5;  // Pr[X_i = 1 | state 1]
};

ReportStructure report_structure(const ThreeSignalStructure& s, RationalityLevel lambda);
ReportStructure report_structure(const GeneralSignalStructure& s, RationalityLevel lambda);

// Law of the number of 1-reports among n conditionally independent experts.
struct CountDistribution {
  int n = 0;
  double mu = 0.5;
  std::vector<double> pmf0;
  std::vector<double> pmf1;
  std::vector<double> marginal;
  std::vector<double> posterior;  // Pr[state 1 | X = x]; mu where marginal is 0
};

CountDistribution count_distribution(const ReportStructure& report, int n);

// Binomial pmf vector of length n + 1.
std::vector<double> binomial_pmf(int n, double q);

// Checks that every probability lies in [0, 1]; throws ValidationError naming
// the field otherwise.
void require_probability(double value, const char* name);

}  // namespace robagg
