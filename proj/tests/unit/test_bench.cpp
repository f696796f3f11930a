#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "regretforge/bench.hpp"
#include "regretforge/catalog.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/generators.hpp"
#include "regretforge/policy.hpp"
#include "regretforge/site.hpp"
#include "regretforge/text.hpp"

using namespace regretforge;

TEST_CASE("suite has 5 tasks at 4 levels") {
  const auto& suite = test_suite();
  CHECK(suite.size() == 20);
  std::set<std::string> ids;
  std::set<std::string> names;
  for (const auto& t : suite) {
    ids.insert(t.id());
    names.insert(t.name);
    CHECK(t.spec.provenance == Provenance::benchmark);
  }
  CHECK(ids.size() == 20);
  CHECK(names == std::set<std::string>{"address", "flight", "login", "payment", "shopping"});
}

TEST_CASE("shipped benchmark file is pinned") {
  CHECK(text::hex64(text::fnv1a64(benchmark_source())) == "1f14e8af82b0c9c1");
}

TEST_CASE("difficulty adds elements and levels never need repairs") {
  for (const auto& name : {"login", "address", "payment", "flight", "shopping"}) {
    std::size_t prev = 0;
    for (int d = 1; d <= 4; ++d) {
      const auto tasks = select_tasks(std::string(name) + ":" + std::to_string(d));
      REQUIRE(tasks.size() == 1);
      RenderReport rep;
      const auto site = render(tasks[0].spec, &rep);
      CHECK(site.element_count() > prev);
      prev = site.element_count();
      CHECK_FALSE(rep.submit_repaired);
      CHECK(rep.advance_repairs == 0);
      CHECK(site.page_count() == (std::string_view(name) == "shopping" ? 3 : 1));
    }
  }
}

TEST_CASE("task selectors") {
  CHECK(select_tasks("").size() == 20);
  CHECK(select_tasks("all").size() == 20);
  CHECK(select_tasks("login").size() == 4);
  CHECK(select_tasks("login:1,address").size() == 5);
  CHECK_THROWS_AS(select_tasks("nosuch"), ArgumentError);
  CHECK_THROWS_AS(select_tasks("login:5"), ArgumentError);
}

TEST_CASE("suite parser reports positions") {
  CHECK(parse_suite("task a 1\nGMDS/1\nk 1\nprovenance benchmark\nend\n").size() == 1);
  try {
    parse_suite("task a 1\nGMDS/1\nk 1\nprovenance benchmark\nplace nosuch 0\nend\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  CHECK_THROWS_AS(parse_suite("task a 9\nGMDS/1\nk 1\nprovenance benchmark\nend\n"), ParseError);
  CHECK_THROWS_AS(parse_suite("junk\n"), ParseError);
}

TEST_CASE("oracle solves every task") {
  OraclePolicy oracle;
  const auto report = evaluate(oracle, test_suite(), 20, 0);
  CHECK(report.results.size() == 20);
  for (const auto& r : report.results) CHECK(r.success_rate == 1.0);
  for (double v : report.by_difficulty) CHECK(v == 1.0);
  REQUIRE(report.find("shopping", 4) != nullptr);
  CHECK(report.find("shopping", 5) == nullptr);
}

TEST_CASE("random policy fails the hard tasks") {
  RandomPolicy random;
  const auto report = evaluate(random, select_tasks("login:4,shopping:4"), 50, 0);
  for (const auto& r : report.results) CHECK(r.success_rate < 0.1);
}

TEST_CASE("task seeds do not depend on the selection") {
  OraclePolicy oracle;
  const auto alone = evaluate(oracle, select_tasks("payment:2"), 5, 3);
  const auto all = evaluate(oracle, test_suite(), 5, 3);
  CHECK(alone.results[0].mean_return == all.find("payment", 2)->mean_return);
  CHECK(alone.results[0].seed == all.find("payment", 2)->seed);
}

TEST_CASE("csv layout") {
  OraclePolicy oracle;
  const auto csv = to_csv(evaluate(oracle, select_tasks("login:1"), 3, 0));
  CHECK(csv.starts_with("task,difficulty,success_rate,episodes,seed\n"));
  CHECK(csv.find("login,1,1.000000,3,") != std::string::npos);
}

TEST_CASE("complexity metrics of a DR stream") {
  std::mt19937_64 rng(12);
  std::vector<DesignSpec> stream;
  for (int i = 0; i < 10000; ++i) stream.push_back(dr_sample(3, 8, rng));
  const auto m = complexity_metrics(stream);
  REQUIRE(m.active_fraction.size() == stream.size());
  const double mean = std::accumulate(m.active_fraction.begin(), m.active_fraction.end(), 0.0) / stream.size();
  CHECK(std::abs(mean - 0.6) < 0.02);

  std::int64_t placed = 0;
  for (const auto& s : stream) placed += static_cast<std::int64_t>(s.placed().size());
  CHECK(std::accumulate(m.histogram.begin(), m.histogram.end(), std::int64_t{0}) == placed);
  std::int64_t windowed = 0;
  for (const auto& w : m.windows) windowed += std::accumulate(w.begin(), w.end(), std::int64_t{0});
  CHECK(windowed == placed);
  CHECK_THROWS_AS(complexity_metrics({}), ArgumentError);
}
