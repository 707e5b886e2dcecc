#include <doctest.h>

#include <cmath>
#include <random>

#include "robagg/lp.hpp"

using namespace robagg;

TEST_CASE("lp: small optimum with duals") {
  // min -x1 - 2 x2  s.t.  x1 + x2 + s1 = 4,  x1 + 3 x2 + s2 = 6
  lp::Problem p{{-1, -2, 0, 0}, {{1, 1, 1, 0}, {1, 3, 0, 1}}, {4, 6}};
  const auto s = lp::solve(p);
  REQUIRE(s.status == lp::Status::kOptimal);
  CHECK(s.objective == doctest::Approx(-5.0));
  CHECK(s.x[0] == doctest::Approx(3.0));
  CHECK(s.x[1] == doctest::Approx(1.0));
  // strong duality: b.y = c.x
  CHECK(4 * s.duals[0] + 6 * s.duals[1] == doctest::Approx(-5.0));
}

TEST_CASE("lp: infeasible and unbounded") {
  lp::Problem inf{{1, 1}, {{1, 1}, {1, 1}}, {1, 2}};
  CHECK(lp::solve(inf).status == lp::Status::kInfeasible);
  lp::Problem unb{{-1, 0}, {{1, -1}}, {1}};
  CHECK(lp::solve(unb).status == lp::Status::kUnbounded);
}

TEST_CASE("lp: random feasible problems satisfy complementary slackness") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const int m = 3 + t % 4;
    const int n = m + 4;
    lp::Problem p;
    p.a.assign(m, std::vector<double>(n));
    std::vector<double> x0(n);
    for (auto& v : x0) v = u(gen);
    for (int i = 0; i < m; ++i) {
      double b = 0;
      for (int j = 0; j < n; ++j) {
        p.a[i][j] = u(gen) - 0.3;
        b += p.a[i][j] * x0[j];
      }
      if (b < 0) {
        for (auto& v : p.a[i]) v = -v;
        b = -b;
      }
      p.b.push_back(b);
    }
    for (int j = 0; j < n; ++j) p.c.push_back(u(gen));  // c >= 0: bounded below
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::kOptimal);
    double by = 0;
    for (int i = 0; i < m; ++i) by += p.b[i] * s.duals[i];
    CHECK(by == doctest::Approx(s.objective).epsilon(1e-9));
    for (int j = 0; j < n; ++j) {
      double reduced = p.c[j];
      for (int i = 0; i < m; ++i) reduced -= p.a[i][j] * s.duals[i];
      CHECK(reduced >= -1e-9);
      CHECK(s.x[j] >= -1e-12);
    }
  }
}
