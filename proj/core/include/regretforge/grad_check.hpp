#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "regretforge/autodiff.hpp"

namespace regretforge::tensor {

struct GradCheckOptions {
  double eps = 1e-5;
  double tolerance = 1e-4;
  /// Stores with more coordinates than this are checked on a random subsample of this size.
  std::size_t max_coords = 256;
  std::uint64_t seed = 0;
  /// Lower bound on the relative-error denominator, so near-zero gradients are compared absolutely.
  /// Sized to the central-difference roundoff of losses of magnitude ~10-100 (about 1e-10).
  double denominator_floor = 1e-5;
  /// Restrict the check to parameters whose name starts with one of these prefixes (empty = all).
  std::vector<std::string> only_params;
};

struct GradCheckReport {
  bool passed = false;
  double max_rel_err = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Builds the scalar loss on a fresh tape from the current store values.
using LossFn = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients against central finite differences. Store gradients are
/// zeroed before and after; parameter values are restored exactly.
GradCheckReport grad_check(ParamStore& store, const LossFn& loss, const GradCheckOptions& options = {});

}  // namespace regretforge::tensor
