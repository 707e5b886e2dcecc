#include <doctest.h>

#include <cmath>
#include <random>

#include "robagg/error.hpp"
#include "robagg/experiments.hpp"
#include "robagg/fit.hpp"

using namespace robagg;

namespace {

std::vector<ChoiceObservation> synthetic(double lambda, std::uint64_t seed, int trials = 20) {
  Rng rng(seed);
  std::vector<ChoiceObservation> obs;
  for (const auto& s : generate_scenarios(5)) {
    const double p = scenario_posterior(s);
    long k = 0;
    for (int t = 0; t < trials; ++t) k += rng.bernoulli(psi(lambda, p));
    obs.push_back({p, k, trials});
  }
  return obs;
}

}  // namespace

TEST_CASE("symmetrize") {
  const std::vector<ChoiceObservation> one{{0.8, 18, 20}};
  const auto s = symmetrize(one);
  REQUIRE(s.size() == 2);
  CHECK(s[1].posterior == doctest::Approx(0.2));
  CHECK(s[1].successes == 2);
  CHECK(s[1].trials == 20);
  const std::vector<ChoiceObservation> half{{0.5, 10, 20}};
  const auto h = symmetrize(half);
  CHECK(h[1].posterior == 0.5);
  CHECK(h[1].successes == 10);
  CHECK(symmetrize(synthetic(3.0, 1)).size() == 800);
}

TEST_CASE("loglik") {
  const std::vector<ChoiceObservation> flat{{0.5, 3, 10}, {0.5, 9, 10}};
  CHECK(loglik(0.3, flat).value == doctest::Approx(loglik(7.0, flat).value));
  CHECK(loglik(0.3, flat).d1 == 0.0);

  const std::vector<ChoiceObservation> agree{{0.75, 10, 10}};
  double prev = loglik(0.0, agree).value;
  for (double l = 0.5; l < 20; l += 0.5) {
    const double v = loglik(l, agree).value;
    CHECK(v > prev);
    prev = v;
  }

  const auto obs = synthetic(4.0, 2);
  const double h = 1e-5;
  const auto at = loglik(1.3, obs);
  const double fd1 = (loglik(1.3 + h, obs).value - loglik(1.3 - h, obs).value) / (2 * h);
  const double fd2 = (loglik(1.3 + h, obs).d1 - loglik(1.3 - h, obs).d1) / (2 * h);
  CHECK(std::abs(at.d1 - fd1) <= 1e-6 * std::abs(at.d1));
  CHECK(std::abs(at.d2 - fd2) <= 1e-6 * std::abs(at.d2));
}

TEST_CASE("symmetrized likelihood is invariant under relabeling") {
  const auto raw = synthetic(6.0, 3);
  std::vector<ChoiceObservation> flipped;
  for (const auto& o : raw) flipped.push_back({1 - o.posterior, o.trials - o.successes, o.trials});
  for (double l : {0.5, 3.0, 9.0}) {
    CHECK(loglik(l, symmetrize(raw)).value ==
          doctest::Approx(loglik(l, symmetrize(flipped)).value).epsilon(1e-12));
  }
}

TEST_CASE("fit recovers lambda") {
  const auto obs = synthetic(13.25, 42);
  const auto f = fit_lambda(obs);
  REQUIRE_FALSE(f.separated);
  CHECK(std::abs(f.lambda_hat.value() - 13.25) <= 2 * f.std_error);
  CHECK(f.p_value < 1e-3);
  CHECK(loglik(f.lambda_hat.value(), obs).d2 < 0.0);
}

TEST_CASE("fit coverage over replicates") {
  for (double truth : {5.0, 13.25, 26.0}) {
    int covered = 0;
    for (int r = 0; r < 50; ++r) {
      const auto f = fit_lambda(synthetic(truth, 1000 + r));
      if (!f.separated && std::abs(f.lambda_hat.value() - truth) <= 2 * f.std_error) ++covered;
    }
    CHECK(covered >= 40);
  }
}

TEST_CASE("separation") {
  std::vector<ChoiceObservation> obs;
  for (const auto& s : generate_scenarios(5)) {
    const double p = scenario_posterior(s);
    obs.push_back({p, p > 0.5 ? 20 : (p < 0.5 ? 0 : 11), 20});
  }
  const auto f = fit_lambda(obs);
  CHECK(f.separated);
  CHECK(f.lambda_hat.is_infinite());
  CHECK(std::isnan(f.std_error));
  for (const auto& o : obs) {
    if (std::abs(o.posterior - 0.5) >= 0.05) {
      CHECK(predict(f, o.posterior) == static_cast<double>(o.successes) / o.trials);
    }
  }
  const std::vector<ChoiceObservation> none{{0.5, 3, 10}};
  CHECK_THROWS_AS(fit_lambda(none), ValidationError);
  const std::vector<ChoiceObservation> bad{{0.7, 11, 10}};
  CHECK_THROWS_AS(fit_lambda(bad), ValidationError);
}

TEST_CASE("predict") {
  FitResult inf;
  inf.separated = true;
  CHECK(predict(inf, 0.3) == 0.0);
  FitResult f;
  f.lambda_hat = RationalityLevel::finite(8.93);
  CHECK(predict(f, 0.5) == 0.5);
  CHECK(predict(f, 0.6) == doctest::Approx(1 / (1 + std::exp(-3.572))).epsilon(1e-14));
}

TEST_CASE("two-sided p-value") {
  CHECK(two_sided_p(0.0) == doctest::Approx(1.0));
  CHECK(two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(two_sided_p(-3.290526731491926) == doctest::Approx(0.001).epsilon(1e-8));
}
