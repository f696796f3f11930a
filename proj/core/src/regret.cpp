#include "regretforge/regret.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regretforge/errors.hpp"

namespace regretforge {

std::string_view to_string(AgentTag t) { return t == AgentTag::a ? "A" : "P"; }

double paired_regret(std::span<const double> returns_a, std::span<const double> returns_p) {
  if (returns_a.empty() || returns_p.empty()) throw ArgumentError("paired_regret: empty return list");
  const double best = *std::max_element(returns_a.begin(), returns_a.end());
  const double mean = std::accumulate(returns_p.begin(), returns_p.end(), 0.0) / static_cast<double>(returns_p.size());
  return best - mean;
}

FlexibleRegret flexible_regret(double mean_a, double mean_p) {
  if (!std::isfinite(mean_a) || !std::isfinite(mean_p)) throw DomainError("flexible_regret: non-finite return");
  FlexibleRegret r;
  r.antagonist = mean_a >= mean_p ? AgentTag::a : AgentTag::p;
  r.regret = std::max(mean_a, mean_p) - 0.5 * (mean_a + mean_p);
  return r;
}

double budget_objective(double best_return, std::span<const double> skip_logps) {
  double total = 0.0;
  for (double lp : skip_logps) total += lp;
  const double out = best_return * total;
  if (!std::isfinite(out)) throw DomainError("budget_objective: non-finite input");
  return out;
}

}  // namespace regretforge
