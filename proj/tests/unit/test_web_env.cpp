#include <doctest.h>

#include <cmath>
#include <random>

#include "regretforge/catalog.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/generators.hpp"
#include "regretforge/policy.hpp"
#include "regretforge/site.hpp"
#include "regretforge/web_env.hpp"

using namespace regretforge;

namespace {

Website site_of(int k, std::initializer_list<std::pair<const char*, int>> placements) {
  DesignSpec s;
  s.k = k;
  for (const auto& [name, page] : placements) s.actions.push_back({catalog().lookup(name).id, page});
  return render(s);
}

const DomElement& find_key(const EpisodeState& s, std::string_view key) {
  for (const auto& e : s.page()) {
    if (e.hidden_key && *e.hidden_key == key && e.focusable) return e;
  }
  throw std::runtime_error("no element for key");
}

const DomElement& find_effect(const EpisodeState& s, NavEffect effect) {
  for (const auto& e : s.page()) {
    if (e.nav_effect == effect) return e;
  }
  throw std::runtime_error("no nav element");
}

int field_index(const EpisodeState& s, std::string_view key) {
  for (std::size_t i = 0; i < s.instruction.fields.size(); ++i) {
    if (s.instruction.fields[i].key == key) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

TEST_CASE("horizon formula") {
  CHECK(horizon_for(0, 1) == 6);
  CHECK(horizon_for(2, 1) == 12);
  CHECK(horizon_for(5, 3) == 25);
}

TEST_CASE("reset samples the instruction from value domains") {
  const auto site = site_of(1, {{"username", 0}, {"password", 0}, {"submit", 0}});
  const auto ep = reset(site, 42);
  REQUIRE(ep.state.instruction.fields.size() == 2);
  for (const auto& f : ep.state.instruction.fields) {
    const auto& domain = catalog().lookup(f.key).value_domain;
    CHECK(std::find(domain.begin(), domain.end(), f.value) != domain.end());
  }
  CHECK(reset(site, 42).state.instruction == ep.state.instruction);
  CHECK(ep.state.horizon == 12);
  CHECK(ep.state.step_penalty == doctest::Approx(-2.0 / 12));
  CHECK(potential(ep.state) == 0.0);
}

TEST_CASE("first correct fill with two fields shapes by one half") {
  const auto site = site_of(1, {{"username", 0}, {"password", 0}, {"submit", 0}});
  auto ep = reset(site, 1, EnvConfig{1.0});
  const auto& e = find_key(ep.state, "username");
  const auto out = step(ep.state, {e.id, field_index(ep.state, "username")});
  CHECK(out.info.shaping == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.info.n_correct == 1);
  CHECK(out.reward == doctest::Approx(0.5 - 2.0 / 12).epsilon(1e-12));
  CHECK_FALSE(out.done);
}

TEST_CASE("wrong field value gives no progress") {
  const auto site = site_of(1, {{"username", 0}, {"password", 0}, {"submit", 0}});
  auto ep = reset(site, 1, EnvConfig{1.0});
  const auto& e = find_key(ep.state, "username");
  const auto out = step(ep.state, {e.id, field_index(ep.state, "password")});
  CHECK(out.info.shaping == 0.0);
  CHECK(out.info.n_correct == 0);
}

TEST_CASE("shaping telescopes with gamma = 1") {
  // Over complete episodes the shaping sum equals Phi(final) - Phi(initial) = Phi(final).
  std::mt19937_64 rng(9);
  RandomPolicy random;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto site = render(dr_sample(3, 8, rng));
    auto ep = reset(site, rng(), EnvConfig{1.0});
    std::mt19937_64 act(rng());
    double sum = 0.0;
    StepInfo last;
    while (!ep.state.done) {
      const auto d = random.decide(ep.state, ep.observation, act);
      const auto out = step(ep.state, d.action);
      sum += out.info.shaping;
      last = out.info;
      ep.observation = out.observation;
    }
    const double initial = site.n_fields == 0 ? 1.0 : 0.0;
    worst = std::max(worst, std::abs(sum - (last.potential_after - initial)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("submit outcomes") {
  const auto site = site_of(1, {{"username", 0}, {"submit", 0}});
  auto ep = reset(site, 3);
  const auto& sub = find_effect(ep.state, NavEffect::terminate);
  auto out = step(ep.state, {sub.id, 0});
  CHECK(out.done);
  CHECK(out.info.terminal == TerminalKind::fail_submit);
  CHECK(out.reward == doctest::Approx(-1.0 - 2.0 / horizon_for(1, 1)));

  ep = reset(site, 3);
  step(ep.state, {find_key(ep.state, "username").id, 0});
  out = step(ep.state, {sub.id, 0});
  CHECK(out.info.terminal == TerminalKind::success);
  CHECK(ep.state.terminal == TerminalKind::success);
  CHECK_THROWS_AS(step(ep.state, {sub.id, 0}), ContractViolation);
}

TEST_CASE("timeout after the horizon") {
  const auto site = site_of(1, {{"username", 0}, {"submit", 0}});
  auto ep = reset(site, 3);
  const auto& input = find_key(ep.state, "username");
  StepOutcome out;
  int steps = 0;
  while (!ep.state.done) {
    out = step(ep.state, {input.id, 0});
    ++steps;
  }
  CHECK(steps == ep.state.horizon);
  CHECK(out.info.terminal == TerminalKind::timeout);
}

TEST_CASE("advance moves forward and is a no-op on the final page") {
  const auto site = site_of(2, {{"username", 0}, {"password", 1}});
  auto ep = reset(site, 3);
  const auto adv = find_effect(ep.state, NavEffect::advance).id;
  const auto out = step(ep.state, {adv, 0});
  CHECK(ep.state.current_page == 1);
  CHECK(out.observation.page == 1);
  CHECK_THROWS_AS(step(ep.state, {adv, 0}), ContractViolation);
}

TEST_CASE("contract violations") {
  const auto site = site_of(1, {{"header_login", 0}, {"username", 0}, {"submit", 0}});
  auto ep = reset(site, 3);
  ElemId label = -1;
  for (const auto& e : ep.state.page()) {
    if (!e.focusable) label = e.id;
  }
  REQUIRE(label >= 0);
  CHECK_THROWS_AS(step(ep.state, {label, 0}), ContractViolation);
  CHECK_THROWS_AS(step(ep.state, {999, 0}), ContractViolation);
  const auto& input = find_key(ep.state, "username");
  CHECK_THROWS_AS(step(ep.state, {input.id, 1}), ContractViolation);
  CHECK_THROWS_AS(step(ep.state, {input.id, -1}), ContractViolation);
  CHECK(ep.state.t == 0);
}

TEST_CASE("checkbox starts off and toggles") {
  const auto site = site_of(1, {{"rememberme", 0}, {"submit", 0}});
  auto ep = reset(site, 3);
  const auto& box = find_key(ep.state, "rememberme");
  CHECK(box.tag == Tag::checkbox);
  CHECK(box.value == "off");
  const auto id = box.id;
  step(ep.state, {id, 0});
  CHECK(ep.state.filled.at("rememberme") == "on");
  step(ep.state, {id, 0});
  CHECK(ep.state.filled.at("rememberme") == "off");
}

TEST_CASE("empty instruction has potential 1 and one null slot") {
  const auto site = site_of(1, {{"navbar", 0}});
  auto ep = reset(site, 3);
  CHECK(ep.state.instruction.fields.empty());
  CHECK(potential(ep.state) == 1.0);
  const auto& sub = find_effect(ep.state, NavEffect::terminate);
  const auto out = step(ep.state, {sub.id, 0});
  CHECK(out.info.terminal == TerminalKind::success);
  CHECK(out.info.shaping == doctest::Approx(0.99 - 1.0));
}

TEST_CASE("observations hide ground-truth keys") {
  const auto site = site_of(1, {{"username", 0}, {"submit", 0}});
  const auto ep = reset(site, 3);
  const auto text = serialize(ep.observation);
  CHECK(text.find("hidden") == std::string::npos);
  CHECK(ep.observation.fields.size() == 1);
  CHECK(ep.observation.elements.size() == site.pages[0].size());
}

TEST_CASE("oracle solves random sites") {
  std::mt19937_64 rng(21);
  OraclePolicy oracle;
  for (int i = 0; i < 300; ++i) {
    const auto site = render(dr_sample(3, 8, rng));
    const auto traj = rollout(oracle, site, {}, rng(), rng());
    CHECK(traj.success);
  }
}

TEST_CASE("trace records are one JSON line per step") {
  const auto site = site_of(1, {{"username", 0}, {"submit", 0}});
  std::vector<std::string> trace;
  OraclePolicy oracle;
  const auto traj = rollout(oracle, site, {}, 5, 6, &trace);
  CHECK(trace.size() == traj.steps.size());
  CHECK(trace[0].find("\"obs_digest\"") != std::string::npos);
  CHECK(trace.back().find("\"terminal_kind\":\"success\"") != std::string::npos);
}

TEST_CASE("episode return discounts") {
  const std::vector<double> r{1.0, 1.0, 1.0};
  CHECK(episode_return(r, 0.5) == doctest::Approx(1.75));
}
