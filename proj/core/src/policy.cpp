#include "regretforge/policy.hpp"

#include <algorithm>
#include <thread>

#include "regretforge/errors.hpp"

namespace regretforge {

namespace {

std::size_t field_slots(const Observation& obs) { return std::max<std::size_t>(1, obs.fields.size()); }

std::size_t choice_of(const Observation& obs, const NavAction& a) {
  for (std::size_t i = 0; i < obs.elements.size(); ++i) {
    if (obs.elements[i].id == a.element) return i * field_slots(obs) + static_cast<std::size_t>(a.field);
  }
  throw ContractViolation("action element not in observation");
}

}  // namespace

Decision OraclePolicy::decide(const EpisodeState& state, const Observation& obs, std::mt19937_64&) const {
  Decision d;
  d.action = oracle_policy(state);
  d.choice = choice_of(obs, d.action);
  return d;
}

Decision RandomPolicy::decide(const EpisodeState&, const Observation& obs, std::mt19937_64& rng) const {
  const auto slots = field_slots(obs);
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < obs.elements.size(); ++i) {
    if (!obs.elements[i].focusable) continue;
    for (std::size_t f = 0; f < slots; ++f) valid.push_back(i * slots + f);
  }
  if (valid.empty()) throw ContractViolation("no focusable element on page");
  std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
  Decision d;
  d.choice = valid[pick(rng)];
  d.action = {obs.elements[d.choice / slots].id, static_cast<int>(d.choice % slots)};
  return d;
}

std::vector<double> Trajectory::rewards() const {
  std::vector<double> r;
  r.reserve(steps.size());
  for (const auto& s : steps) r.push_back(s.reward);
  return r;
}

Trajectory rollout(const NavPolicy& policy, const Website& site, const EnvConfig& env, std::uint64_t instruction_seed,
                   std::uint64_t action_seed, std::vector<std::string>* trace) {
  auto [state, obs] = reset(site, instruction_seed, env);
  std::mt19937_64 rng(action_seed);
  Trajectory traj;
  traj.instruction_seed = instruction_seed;
  while (!state.done) {
    const Decision d = policy.decide(state, obs, rng);
    auto out = step(state, d.action);
    if (trace) trace->push_back(trace_record(state.t - 1, obs, d.action, out));
    TrajectoryStep s;
    s.observation = std::move(obs);
    s.action = d.action;
    s.choice = d.choice;
    s.log_prob = d.log_prob;
    s.value = d.value;
    s.entropy = d.entropy;
    s.reward = out.reward;
    traj.steps.push_back(std::move(s));
    obs = std::move(out.observation);
  }
  traj.terminal = state.terminal;
  traj.success = state.terminal == TerminalKind::success;
  traj.ret = episode_return(traj.rewards(), env.gamma);
  return traj;
}

CollectResult collect(const NavPolicy& policy, const Website& site, int episodes, const EnvConfig& env,
                      std::mt19937_64& rng, int workers) {
  if (episodes < 1) throw ArgumentError("collect: need at least one episode");
  const auto M = static_cast<std::size_t>(episodes);
  std::vector<std::uint64_t> seeds(2 * M);
  for (auto& s : seeds) s = rng();

  CollectResult res;
  res.trajectories.resize(M);
  auto run_range = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < M; i += stride) {
      res.trajectories[i] = rollout(policy, site, env, seeds[2 * i], seeds[2 * i + 1]);
    }
  };
  const auto n_workers = static_cast<std::size_t>(std::clamp(workers, 1, episodes));
  if (n_workers == 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(run_range, w, n_workers);
    for (auto& t : pool) t.join();
  }
  double total = 0.0;
  std::size_t wins = 0;
  for (const auto& t : res.trajectories) {
    total += t.ret;
    wins += t.success ? 1 : 0;
  }
  res.mean_return = total / static_cast<double>(M);
  res.success_rate = static_cast<double>(wins) / static_cast<double>(M);
  return res;
}

}  // namespace regretforge
