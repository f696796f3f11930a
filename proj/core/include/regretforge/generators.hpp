#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "regretforge/design.hpp"

namespace regretforge {

/// Domain randomization: k ~ U{1..K}; each of N steps draws a primitive uniformly from the
/// allowed set plus SKIP and a page uniformly from {0..k-1}. An empty subset means the whole catalog.
DesignSpec dr_sample(int max_pages, int design_steps, std::mt19937_64& rng,
                     std::span<const PrimitiveId> subset = {});

struct ClSchedule {
  double p0 = 0.1;
  std::int64_t iterations_to_one = 1;
};

/// min(1, p0 + iteration * (1 - p0) / iterations_to_one); exactly 1 from the schedule end on.
double cl_probability(std::int64_t iteration, const ClSchedule& schedule);

/// Scheduled curriculum: each slot is a uniform non-SKIP primitive on a uniform page with
/// probability p, SKIP otherwise.
DesignSpec cl_sample(std::int64_t iteration, const ClSchedule& schedule, int max_pages, int design_steps,
                     std::mt19937_64& rng, std::span<const PrimitiveId> subset = {});

}  // namespace regretforge
