#include "regretforge/generators.hpp"

#include <algorithm>

#include "regretforge/errors.hpp"

namespace regretforge {

namespace {

std::vector<PrimitiveId> allowed(std::span<const PrimitiveId> subset) {
  std::vector<PrimitiveId> ids;
  if (subset.empty()) {
    for (const auto& p : catalog().primitives()) ids.push_back(p.id);
  } else {
    for (PrimitiveId id : subset) ids.push_back(catalog().at(id).id);
  }
  return ids;
}

void check_shape(int max_pages, int design_steps) {
  if (max_pages < 1) throw ArgumentError("generator: K must be >= 1");
  if (design_steps < 1) throw ArgumentError("generator: N must be >= 1");
}

}  // namespace

DesignSpec dr_sample(int max_pages, int design_steps, std::mt19937_64& rng, std::span<const PrimitiveId> subset) {
  check_shape(max_pages, design_steps);
  auto ids = allowed(subset);
  ids.push_back(kSkip);
  DesignSpec spec;
  spec.provenance = Provenance::dr;
  spec.k = std::uniform_int_distribution<int>(1, max_pages)(rng);
  std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
  std::uniform_int_distribution<int> page(0, spec.k - 1);
  for (int i = 0; i < design_steps; ++i) {
    const PrimitiveId p = ids[pick(rng)];
    const int loc = page(rng);
    spec.actions.push_back({p, p == kSkip ? 0 : loc});
  }
  return spec;
}

double cl_probability(std::int64_t iteration, const ClSchedule& schedule) {
  if (!(schedule.p0 > 0.0 && schedule.p0 <= 1.0)) throw ArgumentError("cl schedule: p0 must lie in (0, 1]");
  if (schedule.iterations_to_one < 1) throw ArgumentError("cl schedule: horizon must be >= 1");
  if (iteration >= schedule.iterations_to_one) return 1.0;
  const double p = schedule.p0 + static_cast<double>(std::max<std::int64_t>(iteration, 0)) * (1.0 - schedule.p0) /
                                     static_cast<double>(schedule.iterations_to_one);
  return std::min(1.0, p);
}

DesignSpec cl_sample(std::int64_t iteration, const ClSchedule& schedule, int max_pages, int design_steps,
                     std::mt19937_64& rng, std::span<const PrimitiveId> subset) {
  check_shape(max_pages, design_steps);
  const auto ids = allowed(subset);
  const double p = cl_probability(iteration, schedule);
  DesignSpec spec;
  spec.provenance = Provenance::cl;
  spec.k = std::uniform_int_distribution<int>(1, max_pages)(rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
  std::uniform_int_distribution<int> page(0, spec.k - 1);
  for (int i = 0; i < design_steps; ++i) {
    if (coin(rng) < p) {
      const PrimitiveId id = ids[pick(rng)];
      spec.actions.push_back({id, page(rng)});
    } else {
      spec.actions.push_back({kSkip, 0});
    }
  }
  return spec;
}

}  // namespace regretforge
