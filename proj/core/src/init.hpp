#pragma once

#include <cmath>
#include <random>

#include "regretforge/tensor.hpp"

namespace regretforge::detail {

// U(-scale/sqrt(fan_in), scale/sqrt(fan_in)) weights.
inline tensor::Tensor fan_in_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  tensor::Tensor t({rows, cols});
  const double bound = scale / std::sqrt(static_cast<double>(rows));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& x : t.data()) x = u(rng);
  return t;
}

inline tensor::Tensor normal_init(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double stddev) {
  tensor::Tensor t({rows, cols});
  std::normal_distribution<double> n(0.0, stddev);
  for (auto& x : t.data()) x = n(rng);
  return t;
}

inline tensor::Tensor zeros(std::size_t rows, std::size_t cols) { return tensor::Tensor({rows, cols}); }

}  // namespace regretforge::detail
