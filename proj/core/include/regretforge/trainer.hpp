#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "regretforge/adversary.hpp"
#include "regretforge/bench.hpp"
#include "regretforge/generators.hpp"
#include "regretforge/navigator.hpp"
#include "regretforge/regret.hpp"

namespace regretforge {

enum class Algorithm { paired, flexible, flexible_b, paired_b, dr, cl };

std::string_view to_string(Algorithm a);
/// Throws ConfigError for unknown names.
Algorithm algorithm_from_string(std::string_view name);

bool uses_adversary(Algorithm a);
bool uses_budget(Algorithm a);
bool uses_flexible_regret(Algorithm a);

struct TrainConfig {
  Algorithm algorithm = Algorithm::flexible_b;
  int max_pages = 3;     // K
  int design_steps = 8;  // N
  int episodes = 4;      // M
  std::int64_t iterations = 100;
  double gamma = 0.99;
  double lambda_budget = 1.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::int64_t eval_every = 0;  // 0: evaluate once, after the last iteration
  int eval_episodes = 100;
  std::string eval_tasks = "all";
  std::int64_t checkpoint_every = 0;  // 0: final checkpoint only
  /// Primitive names the generators may place; empty means the whole catalog.
  std::vector<std::string> primitive_subset;

  NavigatorConfig navigator;
  double navigator_lr = 1e-3;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double navigator_grad_clip = 5.0;

  int adversary_hidden = 64;
  double adversary_lr = 1e-3;
  double adversary_entropy_coef = 0.01;
  double adversary_grad_clip = 5.0;
  double baseline_decay = 0.95;

  double cl_p0 = 0.1;
  double cl_fraction = 0.8;  // share of the run over which p ramps to 1

  /// Throws ConfigError naming the offending field.
  void validate() const;
  std::vector<PrimitiveId> subset_ids() const;
  ClSchedule cl_schedule() const;
};

struct IterationRecord {
  std::int64_t iteration = 0;
  Algorithm algorithm = Algorithm::flexible_b;
  std::string design_digest;
  int pages = 0;
  std::vector<std::string> primitives;  // placed, in action order
  double active_fraction = 0.0;
  double mean_return_a = 0.0;
  double mean_return_p = 0.0;
  double success_a = 0.0;
  double success_p = 0.0;
  double regret = 0.0;
  AgentTag antagonist = AgentTag::a;
  double best_return = 0.0;
  double skip_fraction = 0.0;
  std::optional<double> adversary_loss;
  double baseline = 0.0;
  double loss_a = 0.0;
  double loss_p = 0.0;
  std::optional<std::string> fault;
};

/// One JSON object on a single line; field names are stable.
std::string to_json_line(const IterationRecord& record);
/// One JSON line per evaluated task, tagged with the iteration and agent.
std::string to_json_lines(const EvalReport& report, std::int64_t iteration, AgentTag agent);

/// Owns both navigators, the adversary and every random stream of a run.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);

  const TrainConfig& config() const { return config_; }
  std::int64_t iteration() const { return iteration_; }
  Navigator& agent(AgentTag tag) { return tag == AgentTag::a ? agent_a_ : agent_p_; }
  const Navigator& agent(AgentTag tag) const { return tag == AgentTag::a ? agent_a_ : agent_p_; }
  AdversaryPolicy& adversary() { return adversary_; }
  const AdversaryPolicy& adversary() const { return adversary_; }
  double baseline() const { return baseline_; }
  const DesignSpec& last_spec() const { return last_spec_; }

  /// One step of Algorithm 1: design, render, collect, regret, adversary update, agent updates.
  IterationRecord step();

  /// Greedy, gradient-free evaluation of one agent on the benchmark.
  EvalReport evaluate_agent(AgentTag tag, std::span<const TestTask> tasks, int episodes, std::uint64_t seed) const;

 private:
  DesignSpec design(std::optional<DesignSample>& sample);

  TrainConfig config_;
  std::vector<PrimitiveId> subset_;
  Navigator agent_a_;
  Navigator agent_p_;
  AdversaryPolicy adversary_;
  std::mt19937_64 design_rng_;
  std::mt19937_64 rollout_rng_;
  double baseline_ = 0.0;
  std::int64_t iteration_ = 0;
  DesignSpec last_spec_;
};

struct TrainSummary {
  std::filesystem::path run_dir;
  std::int64_t iterations = 0;
  std::vector<EvalReport> final_eval;  // agent A, agent P
};

/// Runs the configured iterations, writing manifest.json, metrics.jsonl, eval.jsonl,
/// eval_<iteration>.csv and checkpoints/ into `run_dir`. `log` receives human-readable progress.
TrainSummary train(const TrainConfig& config, const std::filesystem::path& run_dir,
                   const std::function<void(const std::string&)>& log = {});

}  // namespace regretforge

namespace regretforge {

/// Library version string baked in at build time.
std::string_view library_version();

/// Deterministic independent seed for stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace regretforge
