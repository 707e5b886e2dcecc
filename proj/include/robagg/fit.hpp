#pragma once

#include <span>
#include <vector>

#include "robagg/model.hpp"

namespace robagg {

struct ChoiceObservation {
  double posterior = 0.5;
  long successes = 0;  // choices of option 1
  long trials = 1;
};

void validate(const ChoiceObservation& o);

// Appends the mirrored record (1 - p, trials - successes) for every input.
std::vector<ChoiceObservation> symmetrize(std::span<const ChoiceObservation> obs);

struct LogLik {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

LogLik loglik(double lambda, std::span<const ChoiceObservation> obs);

struct FitResult {
  RationalityLevel lambda_hat = RationalityLevel::infinite();
  bool separated = false;
  // NaN when separated.
  double std_error = 0.0;
  double z_value = 0.0;
  double p_value = 0.0;
  int newton_steps = 0;
};

FitResult fit_lambda(std::span<const ChoiceObservation> obs);

double predict(const FitResult& fit, double p);

// Two-sided normal p-value.
double two_sided_p(double z);

}  // namespace robagg
