#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "robagg/aggregate.hpp"
#include "robagg/error.hpp"

using namespace robagg;

namespace {

RationalityLevel fin(double v) { return RationalityLevel::finite(v); }

// Utility from the posterior form sum_x Pr[X=x](2 Pr[state 1|x] - 1)(2f(x) - 1),
// with binomials built from scratch.
double utility_oracle(const std::vector<double>& f, double mu, double q0, double q1) {
  const int n = static_cast<int>(f.size()) - 1;
  double u = 0.0;
  for (int x = 0; x <= n; ++x) {
    const double c = std::tgamma(n + 1.0) / (std::tgamma(x + 1.0) * std::tgamma(n - x + 1.0));
    const double a1 = mu * c * std::pow(q1, x) * std::pow(1 - q1, n - x);
    const double a0 = (1 - mu) * c * std::pow(q0, x) * std::pow(1 - q0, n - x);
    u += (a1 - a0) * (2 * f[x] - 1);
  }
  return u;
}

}  // namespace

TEST_CASE("majority rule") {
  CHECK(majority(3).values == std::vector<double>{0, 0, 1, 1});
  CHECK(majority(2).values == std::vector<double>{0, 0.5, 1});
  CHECK(majority(1).values == std::vector<double>{0, 1});
  CHECK_THROWS_AS(majority(0), ValidationError);
  CHECK_THROWS_AS(make_aggregator({0.2, 1.3}), ValidationError);
}

TEST_CASE("utility examples") {
  CHECK(utility(majority(3), {0.5, 0.3, 0.3}) == doctest::Approx(0.0).epsilon(1e-15));
  const auto t = theta_star();
  const auto rinf = report_structure(t, RationalityLevel::infinite());
  CHECK(utility(majority(1), rinf) == doctest::Approx(0.5).epsilon(1e-15));
  const auto r = report_structure(t, fin(2.5));
  const auto opt = omniscient(r, 2);
  CHECK(std::abs(utility(opt, r) - 0.507674) <= 1e-6);
  CHECK(utility(opt, r) == doctest::Approx(utility_oracle(opt.values, r.mu, r.q0, r.q1)).epsilon(1e-13));
}

TEST_CASE("omniscient examples") {
  CHECK(omniscient({0.7, 0.4, 0.4}, 3).values == std::vector<double>{1, 1, 1, 1});
  const auto r = report_structure(theta_star(), fin(2.5));
  CHECK(omniscient(r, 2).values == std::vector<double>{0, 0, 1});
  CHECK(omniscient({0.5, 0.2, 0.8}, 1).values == std::vector<double>{0, 1});
  CHECK(omniscient({0.5, 0.3, 0.3}, 2).values == std::vector<double>{0.5, 0.5, 0.5});
}

TEST_CASE("regret examples") {
  const auto r = report_structure(theta_star(), fin(2.5));
  CHECK(regret(omniscient(r, 2), r) == 0.0);
  const double u_opt = utility(omniscient(r, 2), r);
  const double u_maj = utility_oracle(majority(2).values, r.mu, r.q0, r.q1);
  CHECK(regret(majority(2), r) == doctest::Approx(u_opt - u_maj).epsilon(1e-13));
  const auto half = make_aggregator({0.5, 0.5, 0.5, 0.5});
  const ReportStructure any{0.35, 0.2, 0.6};
  CHECK(regret(half, any) == doctest::Approx(utility(omniscient(any, 3), any)).epsilon(1e-15));
}

TEST_CASE("theta_star") {
  const auto t = theta_star();
  CHECK(t.mu == 0.25);
  CHECK(t.p0 == 0.5);
  CHECK(t.p1 == 1.0);
  CHECK(t.p == doctest::Approx(0.4).epsilon(1e-15));
  // joint table [3/8, 3/8, 0; 0, 1/4, 0]
  CHECK(t.mass_zero() == doctest::Approx(0.375));
  CHECK((1 - t.mu) * t.p0 == doctest::Approx(0.375));
  CHECK(t.mu * t.p1 == doctest::Approx(0.25));
  CHECK(t.mass_one() == 0.0);
  const auto r0 = report_structure(t, fin(0.0));
  CHECK(r0.q0 == 0.5);
  CHECK(r0.q1 == 0.5);
}

TEST_CASE("advantage curve") {
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(0.2 * i);
  for (const auto& row : advantage_curve(theta_star(), 1, grid)) {
    CHECK(row.utility_omniscient == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(row.utility_omniscient >= row.utility_majority - 1e-12);
  }
  const auto one = advantage_curve(theta_star(), 1, grid);
  const auto two = advantage_curve(theta_star(), 2, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(one[i].utility_majority - two[i].utility_majority) <= 1e-12);
  }
  bool exceeded = false;
  for (const auto& row : advantage_curve(theta_star(), 3, grid)) exceeded |= row.utility_majority > 0.5;
  CHECK(exceeded);
}

TEST_CASE("omniscient dominates random aggregators") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const ReportStructure r{u(gen), u(gen), u(gen)};
    const int n = 1 + i % 7;
    const double best = utility(omniscient(r, n), r);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> f(n + 1);
      for (auto& v : f) v = u(gen);
      CHECK(utility(make_aggregator(f), r) <= best + 1e-12);
    }
  }
}

TEST_CASE("utility is bilinear in f") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const ReportStructure r{u(gen), u(gen), u(gen)};
    const int n = 1 + i % 9;
    std::vector<double> f(n + 1), g(n + 1), h(n + 1);
    const double a = u(gen);
    for (int x = 0; x <= n; ++x) {
      f[x] = u(gen);
      g[x] = u(gen);
      h[x] = a * f[x] + (1 - a) * g[x];
    }
    const double lhs = utility(make_aggregator(h), r);
    const double rhs = a * utility(make_aggregator(f), r) + (1 - a) * utility(make_aggregator(g), r);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("even n majority utility equals n - 1") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const ReportStructure r{u(gen), u(gen), u(gen)};
    for (int n : {2, 4, 6, 8}) {
      CHECK(std::abs(utility(majority(n), r) - utility(majority(n - 1), r)) <= 1e-12);
    }
  }
}

TEST_CASE("odd majority beats 1/2 on theta_star at lambda 2.5") {
  const auto r = report_structure(theta_star(), fin(2.5));
  for (int n : {3, 5, 7}) CHECK(utility(majority(n), r) > 0.5);
}

TEST_CASE("single expert: full rationality dominates") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::vector<double>> rules = {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0.5, 0.5}};
  for (int i = 0; i < 200; ++i) {
    const int k = 1 + i % 6;
    std::vector<double> s(k), w(k);
    double total = 0;
    for (int j = 0; j < k; ++j) {
      s[j] = u(gen);
      w[j] = u(gen) + 1e-3;
      total += w[j];
    }
    std::vector<SignalAtom> atoms;
    double mu = 0;
    for (int j = 0; j < k; ++j) {
      atoms.push_back({s[j], w[j] / total});
      mu += s[j] * w[j] / total;
    }
    const auto g = make_general(mu, atoms);
    const double rational = utility(majority(1), report_structure(g, RationalityLevel::infinite()));
    for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
      const auto r = report_structure(g, fin(lambda));
      for (const auto& f : rules) CHECK(utility(make_aggregator(f), r) <= rational + 1e-12);
    }
  }
}
