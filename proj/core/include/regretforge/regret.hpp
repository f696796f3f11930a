#pragma once

#include <span>
#include <string_view>

namespace regretforge {

enum class AgentTag { a, p };
std::string_view to_string(AgentTag t);

/// Eq. 1: max(returns_A) - mean(returns_P). Both lists must be non-empty.
double paired_regret(std::span<const double> returns_a, std::span<const double> returns_p);

struct FlexibleRegret {
  double regret = 0.0;
  AgentTag antagonist = AgentTag::a;
};

/// Eq. 2: max{a, p} - (a + p) / 2; the better agent is the antagonist, ties go to A.
FlexibleRegret flexible_regret(double mean_a, double mean_p);

/// R_best * sum_i log pi(SKIP_i); minimized by the adversary.
double budget_objective(double best_return, std::span<const double> skip_logps);

}  // namespace regretforge
