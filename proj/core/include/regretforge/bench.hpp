#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regretforge/design.hpp"
#include "regretforge/policy.hpp"

namespace regretforge {

struct TestTask {
  std::string name;
  int difficulty = 1;
  DesignSpec spec;

  /// "name:difficulty"
  std::string id() const;
};

/// The 20 canonical tasks, parsed from the shipped benchmark file.
const std::vector<TestTask>& test_suite();
std::string_view benchmark_source();

/// Parses a benchmark file: "task <name> <difficulty>" headers each followed by one GMDS/1 document.
std::vector<TestTask> parse_suite(std::string_view text);

/// Comma-separated selectors, each "name" or "name:difficulty"; empty or "all" selects everything.
/// Throws ArgumentError when a selector matches nothing.
std::vector<TestTask> select_tasks(std::string_view selector);

struct TaskResult {
  std::string task;
  int difficulty = 1;
  double success_rate = 0.0;
  double mean_return = 0.0;
  int episodes = 0;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::vector<TaskResult> results;
  int episodes = 0;
  std::uint64_t seed = 0;
  /// Mean success per difficulty 1..4 over the evaluated tasks (0 when none).
  std::array<double, 4> by_difficulty{};

  const TaskResult* find(std::string_view task, int difficulty) const;
};

/// Episode seed stream for one task; independent of which other tasks are evaluated.
std::uint64_t task_seed(std::uint64_t seed, const TestTask& task);

/// Runs `episodes` fresh-seeded episodes per task with `policy` (callers pass a greedy policy).
EvalReport evaluate(const NavPolicy& policy, std::span<const TestTask> tasks, int episodes, std::uint64_t seed,
                    const EnvConfig& env = {}, int workers = 1);

/// Flat summary: task,difficulty,success_rate,episodes,seed
std::string to_csv(const EvalReport& report);

struct ComplexityMetrics {
  /// Active fraction of each spec's placed primitives (0 for an all-SKIP spec).
  std::vector<double> active_fraction;
  /// Placement counts per primitive over the whole stream.
  std::array<std::int64_t, Catalog::kSize> histogram{};
  /// The same counts split into early / middle / late thirds of the stream.
  std::array<std::array<std::int64_t, Catalog::kSize>, 3> windows{};
};

ComplexityMetrics complexity_metrics(std::span<const DesignSpec> stream);

}  // namespace regretforge
