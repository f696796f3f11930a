#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "regretforge/bench.hpp"
#include "regretforge/catalog.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/generators.hpp"
#include "regretforge/navigator.hpp"
#include "regretforge/site.hpp"
#include "regretforge/web_env.hpp"

using namespace regretforge;
using namespace regretforge::tensor;

namespace {

const NavigatorConfig kSmall{8, 16, 8};

Website site_of(int k, std::initializer_list<const char*> names) {
  DesignSpec s;
  s.k = k;
  for (const char* n : names) s.actions.push_back({catalog().lookup(n).id, 0});
  return render(s);
}

Observation first_obs(const Website& site, std::uint64_t seed = 1) { return reset(site, seed).observation; }

}  // namespace

TEST_CASE("zero scorer gives a uniform distribution over valid pairs") {
  Navigator nav(kSmall, 3);
  nav.params().value("score.W").fill(0.0);
  const auto obs = first_obs(site_of(1, {"header_login", "username", "password", "submit"}));
  Tape tape(false);
  const auto fwd = nav.forward(tape, obs);
  const auto valid = std::count(fwd.mask.begin(), fwd.mask.end(), true);
  CHECK(fwd.n_slots == 2);
  for (std::size_t i = 0; i < fwd.probs.size(); ++i) {
    CHECK(fwd.probs[i] == doctest::Approx(fwd.mask[i] ? 1.0 / double(valid) : 0.0).epsilon(1e-12));
  }
  CHECK(fwd.entropy.item() == doctest::Approx(std::log(double(valid))));
}

TEST_CASE("non-focusable elements get probability zero") {
  Navigator nav(kSmall, 1);
  const auto obs = first_obs(site_of(1, {"header_login", "username", "submit"}));
  Tape tape(false);
  const auto fwd = nav.forward(tape, obs);
  const auto marginal = fwd.element_marginal();
  for (std::size_t i = 0; i < obs.elements.size(); ++i) {
    if (!obs.elements[i].focusable) CHECK(marginal[i] == 0.0);
  }
}

TEST_CASE("element marginal sums to one") {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Navigator nav(kSmall, seed);
    const auto site = render(dr_sample(3, 8, rng));
    const auto obs = first_obs(site, seed);
    Tape tape(false);
    const auto m = nav.forward(tape, obs).element_marginal();
    CHECK(std::abs(std::accumulate(m.begin(), m.end(), 0.0) - 1.0) < 1e-12);
  }
}

TEST_CASE("greedy choice ignores constant shifts and masked entries") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> z(9);
    std::vector<bool> mask(9);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = n(rng);
      mask[i] = rng() % 2 == 0;
    }
    mask[0] = true;
    const auto best = greedy_choice(z, mask);
    CHECK(mask[best]);
    auto shifted = z;
    for (auto& v : shifted) v += 123.0;
    CHECK(greedy_choice(shifted, mask) == best);
  }
  CHECK_THROWS_AS(greedy_choice(std::vector<double>{1.0}, std::vector<bool>{false}), MaskError);
}

TEST_CASE("sampled actions follow the policy probabilities") {
  Navigator nav(kSmall, 5);
  const auto obs = first_obs(site_of(1, {"username", "submit"}));
  Tape tape(false);
  const auto probs = nav.forward(tape, obs).probs;
  std::vector<int> counts(probs.size(), 0);
  std::mt19937_64 rng(9);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[nav.act(obs, rng, false).choice];
  for (std::size_t i = 0; i < probs.size(); ++i) CHECK(std::abs(counts[i] / double(n) - probs[i]) < 0.01);
}

TEST_CASE("forward contract") {
  Navigator nav(kSmall, 1);
  Observation obs;
  obs.elements.push_back({0, Tag::text, {"hello"}, {}, false, 0, 0});
  Tape tape(false);
  CHECK_THROWS_AS(nav.forward(tape, obs), ContractViolation);
  CHECK_THROWS_AS(decode_choice(first_obs(site_of(1, {"submit"})), 5), IndexError);
}

TEST_CASE("empty instruction uses one null slot") {
  Navigator nav(kSmall, 1);
  const auto obs = first_obs(site_of(1, {"navbar"}));
  CHECK(obs.fields.empty());
  Tape tape(false);
  const auto fwd = nav.forward(tape, obs);
  CHECK(fwd.n_slots == 1);
  std::mt19937_64 rng(1);
  CHECK(nav.act(obs, rng, true).action.field == 0);
}

TEST_CASE("returns to go") {
  const auto g = returns_to_go(std::vector<double>{1.0, 0.0, 2.0}, 0.5);
  CHECK(g[2] == 2.0);
  CHECK(g[1] == 1.0);
  CHECK(g[0] == 1.5);
}

TEST_CASE("a2c rejects empty input") {
  Navigator nav(kSmall, 1);
  Tape tape;
  CHECK_THROWS_AS(a2c_loss(tape, nav, std::span<const Trajectory>{}, {}), ArgumentError);
  std::vector<Trajectory> empty(2);
  CHECK_THROWS_AS(a2c_loss(tape, nav, empty, {}), ArgumentError);
}

TEST_CASE("zero advantage and no entropy bonus only trains the critic") {
  Navigator nav(kSmall, 2);
  const auto site = site_of(1, {"username", "password", "submit"});
  NavigatorPolicy policy(nav, false);
  std::mt19937_64 rng(4);
  auto batch = collect(policy, site, 3, {}, rng).trajectories;
  A2CConfig cfg;
  cfg.entropy_coef = 0.0;
  for (auto& traj : batch) {
    const auto g = returns_to_go(traj.rewards(), cfg.gamma);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) traj.steps[t].value = g[t];
  }
  auto& store = nav.params();
  store.zero_grad();
  Tape tape;
  tape.backward(a2c_loss(tape, nav, batch, cfg));
  double value_grad = 0.0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    double norm = 0.0;
    for (double v : store.grad(i).data()) norm += v * v;
    if (store.name(i).starts_with("value.")) {
      value_grad += norm;
    } else {
      INFO(store.name(i));
      CHECK(norm == 0.0);
    }
  }
  CHECK(value_grad > 0.0);
}

TEST_CASE("a2c learns a one-step bandit") {
  Navigator nav(kSmall, 6);
  const auto site = site_of(1, {"username", "submit"});
  const auto obs = first_obs(site);
  Tape probe(false);
  const auto n_choices = nav.forward(probe, obs).probs.size();
  // Reward 1 for the last valid choice, 0 otherwise.
  std::size_t target = 0;
  {
    Tape t(false);
    const auto fwd = nav.forward(t, obs);
    for (std::size_t i = 0; i < n_choices; ++i) {
      if (fwd.mask[i]) target = i;
    }
  }
  A2CConfig cfg;
  cfg.adam.lr = 1e-2;
  cfg.entropy_coef = 0.0;
  std::mt19937_64 rng(3);
  for (int it = 0; it < 500; ++it) {
    std::vector<Trajectory> batch(4);
    for (auto& traj : batch) {
      const auto d = nav.act(obs, rng, false);
      TrajectoryStep s;
      s.observation = obs;
      s.action = d.action;
      s.choice = d.choice;
      s.log_prob = d.log_prob;
      s.value = d.value;
      s.reward = d.choice == target ? 1.0 : 0.0;
      traj.steps.push_back(s);
    }
    a2c_update(nav, batch, cfg);
  }
  Tape t(false);
  CHECK(nav.forward(t, obs).probs[target] > 0.95);
}

TEST_CASE("untrained navigator rarely solves hard tasks") {
  Navigator nav(NavigatorConfig{}, 0);
  NavigatorPolicy policy(nav, false);
  double total = 0.0;
  int count = 0;
  for (const auto& task : test_suite()) {
    if (task.difficulty != 4) continue;
    std::mt19937_64 rng(task_seed(0, task));
    total += collect(policy, render(task.spec), 32, {}, rng).success_rate;
    ++count;
  }
  CHECK(total / count < 0.05);
}

TEST_CASE("construction is reproducible and checkpoints restore it") {
  Navigator a(kSmall, 11);
  Navigator b(kSmall, 11);
  CHECK(a.params().checksum() == b.params().checksum());
  Navigator c(a.params());
  CHECK(c.config().hidden == 16);
  CHECK(c.config().embed == 8);
  CHECK(c.config().value_hidden == 8);
  const auto obs = first_obs(site_of(1, {"username", "submit"}));
  std::mt19937_64 r1(1), r2(1);
  CHECK(a.act(obs, r1, false).choice == c.act(obs, r2, false).choice);
  CHECK_THROWS_AS(Navigator(NavigatorConfig{0, 4, 4}, 1), ArgumentError);
}

TEST_CASE("collect does not depend on the worker count") {
  Navigator nav(kSmall, 4);
  NavigatorPolicy policy(nav, false);
  const auto site = site_of(2, {"username", "password", "submit"});
  std::mt19937_64 r1(5), r2(5);
  const auto one = collect(policy, site, 12, {}, r1, 1);
  const auto four = collect(policy, site, 12, {}, r2, 4);
  REQUIRE(one.trajectories.size() == four.trajectories.size());
  for (std::size_t i = 0; i < one.trajectories.size(); ++i) CHECK(one.trajectories[i].ret == four.trajectories[i].ret);
  CHECK(one.mean_return == four.mean_return);
}
