#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regretforge/grad_check.hpp"

namespace regretforge {

struct GradCheckEntry {
  std::string model;  // "op:<name>", "navigator.a2c" or "adversary.loss"
  tensor::GradCheckReport report;
};

/// Names of every registered check, in run order.
std::vector<std::string> gradcheck_models();

/// Finite-difference checks over every tensor op, the navigator a2c loss and the adversary loss.
std::vector<GradCheckEntry> run_gradcheck_suite(const tensor::GradCheckOptions& options = {});

}  // namespace regretforge
