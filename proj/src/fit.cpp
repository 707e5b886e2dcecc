#include "robagg/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "robagg/error.hpp"

namespace robagg {
namespace {

constexpr double kLambdaMax = 1e6;

// log(1 + e^t) without overflow.
double log1pexp(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

bool informative(const ChoiceObservation& o) { return o.trials > 0 && o.posterior != 0.5; }

}  // namespace

void validate(const ChoiceObservation& o) {
  require_probability(o.posterior, "posterior");
  if (o.trials < 0 || o.successes < 0 || o.successes > o.trials) {
    std::ostringstream os;
    os << "observation needs 0 <= successes <= trials (got " << o.successes << "/" << o.trials
       << ")";
    throw ValidationError(os.str());
  }
}

std::vector<ChoiceObservation> symmetrize(std::span<const ChoiceObservation> obs) {
  std::vector<ChoiceObservation> out(obs.begin(), obs.end());
  out.reserve(2 * obs.size());
  for (const auto& o : obs) {
    validate(o);
    out.push_back({1.0 - o.posterior, o.trials - o.successes, o.trials});
  }
  return out;
}

LogLik loglik(double lambda, std::span<const ChoiceObservation> obs) {
  if (!(lambda >= 0.0)) throw ValidationError("loglik needs lambda >= 0");
  // psi = sigmoid(lambda * a) with a = 2(2p - 1); log psi = -log1pexp(-lambda a).
  LogLik r;
  for (const auto& o : obs) {
    validate(o);
    const double a = 2.0 * (2.0 * o.posterior - 1.0);
    const double t = lambda * a;
    const double k = static_cast<double>(o.successes);
    const double miss = static_cast<double>(o.trials - o.successes);
    if (k > 0.0) r.value -= k * log1pexp(-t);
    if (miss > 0.0) r.value -= miss * log1pexp(t);
    const double s = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
    r.d1 += a * (k - static_cast<double>(o.trials) * s);
    r.d2 -= a * a * static_cast<double>(o.trials) * s * (1.0 - s);
  }
  return r;
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

FitResult fit_lambda(std::span<const ChoiceObservation> obs) {
  bool any = false;
  bool separated = true;
  for (const auto& o : obs) {
    validate(o);
    if (!informative(o)) continue;
    any = true;
    if (o.posterior > 0.5 && o.successes != o.trials) separated = false;
    if (o.posterior < 0.5 && o.successes != 0) separated = false;
  }
  if (!any) throw ValidationError("fit_lambda: no observation with posterior != 0.5 (unidentifiable)");

  FitResult fit;
  if (separated) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    fit.separated = true;
    fit.lambda_hat = RationalityLevel::infinite();
    fit.std_error = fit.z_value = fit.p_value = nan;
    return fit;
  }

  // The log-likelihood is concave in lambda, so Newton with step halving
  // converges from any start.
  double lambda = 1.0;
  LogLik cur = loglik(lambda, obs);
  int steps = 0;
  for (; steps < 500; ++steps) {
    double step = cur.d2 < 0.0 ? -cur.d1 / cur.d2 : (cur.d1 > 0.0 ? lambda + 1.0 : -lambda);
    double next = std::clamp(lambda + step, 0.0, kLambdaMax);
    LogLik cand = loglik(next, obs);
    int halvings = 0;
    while (cand.value < cur.value && halvings < 60) {
      step *= 0.5;
      next = std::clamp(lambda + step, 0.0, kLambdaMax);
      cand = loglik(next, obs);
      ++halvings;
    }
    const double delta = std::abs(next - lambda);
    lambda = next;
    cur = cand;
    if (delta < 1e-9) break;
  }
  if (!(cur.d2 < 0.0)) {
    throw NumericError("fit_lambda: log-likelihood not strictly concave at the optimum");
  }
  fit.lambda_hat = RationalityLevel::finite(lambda);
  fit.std_error = 1.0 / std::sqrt(-cur.d2);
  fit.z_value = lambda / fit.std_error;
  fit.p_value = two_sided_p(fit.z_value);
  fit.newton_steps = steps;
  return fit;
}

double predict(const FitResult& fit, double p) { return psi(fit.lambda_hat, p); }

}  // namespace robagg
