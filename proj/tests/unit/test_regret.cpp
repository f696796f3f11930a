#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "regretforge/catalog.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/generators.hpp"
#include "regretforge/regret.hpp"

using namespace regretforge;

TEST_CASE("flexible regret examples") {
  auto r = flexible_regret(0.8, 0.2);
  CHECK(r.regret == doctest::Approx(0.3));
  CHECK(r.antagonist == AgentTag::a);
  r = flexible_regret(-0.5, 0.5);
  CHECK(r.regret == doctest::Approx(0.5));
  CHECK(r.antagonist == AgentTag::p);
  r = flexible_regret(0.4, 0.4);
  CHECK(r.regret == 0.0);
  CHECK(r.antagonist == AgentTag::a);
  CHECK_THROWS_AS(flexible_regret(std::nan(""), 0.0), DomainError);
  CHECK_THROWS_AS(flexible_regret(0.0, std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("flexible regret equals half the gap and is symmetric") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), p = u(rng);
    const auto r = flexible_regret(a, p);
    CHECK(r.regret >= 0.0);
    CHECK(std::abs(r.regret - 0.5 * std::abs(a - p)) < 1e-15);
    CHECK(flexible_regret(p, a).regret == r.regret);
  }
}

TEST_CASE("paired regret") {
  const std::vector<double> a{0.1, 0.9, 0.4};
  const std::vector<double> p{0.2, 0.4};
  CHECK(paired_regret(a, p) == doctest::Approx(0.6));
  CHECK(paired_regret(std::vector<double>{-1.0}, std::vector<double>{1.0}) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(paired_regret({}, p), ArgumentError);
  CHECK_THROWS_AS(paired_regret(a, {}), ArgumentError);
}

TEST_CASE("budget objective") {
  CHECK(budget_objective(2.0, std::vector<double>{-0.5, -0.25}) == doctest::Approx(-1.5));
  CHECK(budget_objective(-1.0, std::vector<double>{-0.5}) == doctest::Approx(0.5));
  CHECK(budget_objective(1.0, {}) == 0.0);
}

TEST_CASE("agent tags") {
  CHECK(to_string(AgentTag::a) == "A");
  CHECK(to_string(AgentTag::p) == "P");
}

TEST_CASE("DR samples are uniform over primitives plus SKIP") {
  std::mt19937_64 rng(3);
  std::int64_t skips = 0, total = 0;
  std::vector<int> ks(4, 0);
  for (int i = 0; i < 20000; ++i) {
    const auto s = dr_sample(3, 8, rng);
    CHECK(s.provenance == Provenance::dr);
    ++ks[static_cast<std::size_t>(s.k)];
    for (const auto& a : s.actions) {
      skips += a.is_skip();
      ++total;
      CHECK(a.page < s.k);
    }
  }
  CHECK(std::abs(double(skips) / double(total) - 1.0 / 41.0) < 0.005);
  CHECK(ks[0] == 0);
  for (int k = 1; k <= 3; ++k) CHECK(std::abs(ks[k] / 20000.0 - 1.0 / 3.0) < 0.02);
}

TEST_CASE("DR respects a subset") {
  const std::vector<PrimitiveId> subset{catalog().lookup("username").id, catalog().lookup("submit").id};
  std::mt19937_64 rng(4);
  std::int64_t skips = 0, total = 0;
  for (int i = 0; i < 3000; ++i) {
    for (const auto& a : dr_sample(2, 5, rng, subset).actions) {
      CHECK((a.is_skip() || a.primitive == subset[0] || a.primitive == subset[1]));
      skips += a.is_skip();
      ++total;
    }
  }
  CHECK(std::abs(double(skips) / double(total) - 1.0 / 3.0) < 0.02);
  CHECK_THROWS_AS(dr_sample(0, 5, rng), ArgumentError);
}

TEST_CASE("CL schedule") {
  const ClSchedule s{0.1, 100};
  CHECK(cl_probability(0, s) == doctest::Approx(0.1));
  CHECK(cl_probability(50, s) == doctest::Approx(0.55));
  CHECK(cl_probability(100, s) == 1.0);
  CHECK(cl_probability(1000, s) == 1.0);
  double prev = 0.0;
  for (int i = 0; i <= 120; ++i) {
    const double p = cl_probability(i, s);
    CHECK(p >= prev);
    prev = p;
  }
  CHECK_THROWS_AS(cl_probability(0, ClSchedule{0.0, 10}), ArgumentError);
  CHECK_THROWS_AS(cl_probability(0, ClSchedule{0.1, 0}), ArgumentError);
}

TEST_CASE("CL samples fill more slots as the schedule advances") {
  const ClSchedule s{0.1, 100};
  std::mt19937_64 rng(6);
  auto fill = [&](std::int64_t it) {
    std::int64_t placed = 0;
    for (int i = 0; i < 2000; ++i) {
      const auto spec = cl_sample(it, s, 3, 8, rng);
      CHECK(spec.provenance == Provenance::cl);
      placed += static_cast<std::int64_t>(spec.placed().size());
    }
    return placed / (2000.0 * 8.0);
  };
  CHECK(std::abs(fill(0) - 0.1) < 0.02);
  CHECK(std::abs(fill(50) - 0.55) < 0.02);
  CHECK(fill(100) == 1.0);
}
