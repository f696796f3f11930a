#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "regretforge/web_env.hpp"

namespace regretforge {

/// One navigator decision. `choice` indexes the flattened (element, field) grid of the current
/// observation; log_prob/value/entropy are zero for scripted policies.
struct Decision {
  NavAction action;
  std::size_t choice = 0;
  double log_prob = 0.0;
  double value = 0.0;
  double entropy = 0.0;
};

/// Anything that can drive an episode. Implementations must be safe to call concurrently.
class NavPolicy {
 public:
  virtual ~NavPolicy() = default;
  virtual Decision decide(const EpisodeState& state, const Observation& obs, std::mt19937_64& rng) const = 0;
};

/// Scripted solver backed by hidden keys (test oracle).
class OraclePolicy final : public NavPolicy {
 public:
  Decision decide(const EpisodeState& state, const Observation& obs, std::mt19937_64& rng) const override;
};

/// Uniform over every valid (focusable element, field) pair.
class RandomPolicy final : public NavPolicy {
 public:
  Decision decide(const EpisodeState& state, const Observation& obs, std::mt19937_64& rng) const override;
};

struct TrajectoryStep {
  Observation observation;
  NavAction action;
  std::size_t choice = 0;
  double log_prob = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double reward = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  TerminalKind terminal = TerminalKind::none;
  double ret = 0.0;  // episode_return(rewards, gamma)
  bool success = false;
  std::uint64_t instruction_seed = 0;

  std::vector<double> rewards() const;
};

struct CollectResult {
  std::vector<Trajectory> trajectories;
  double mean_return = 0.0;
  double success_rate = 0.0;
};

/// Runs one episode from a fresh reset. Appends one trace record per step when `trace` is set.
Trajectory rollout(const NavPolicy& policy, const Website& site, const EnvConfig& env, std::uint64_t instruction_seed,
                   std::uint64_t action_seed, std::vector<std::string>* trace = nullptr);

/// M independent episodes. Per-episode seeds are drawn from `rng` up front, so the result is the
/// same for any worker count.
CollectResult collect(const NavPolicy& policy, const Website& site, int episodes, const EnvConfig& env,
                      std::mt19937_64& rng, int workers = 1);

}  // namespace regretforge
