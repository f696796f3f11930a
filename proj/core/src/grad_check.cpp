#include "regretforge/grad_check.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

namespace regretforge::tensor {

namespace {

double eval_loss(const LossFn& loss) {
  Tape tape(false);
  return loss(tape).item();
}

}  // namespace

GradCheckReport grad_check(ParamStore& store, const LossFn& loss, const GradCheckOptions& options) {
  store.zero_grad();
  {
    Tape tape(true);
    tape.backward(loss(tape));
  }
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  auto selected = [&](const std::string& name) {
    if (options.only_params.empty()) return true;
    return std::any_of(options.only_params.begin(), options.only_params.end(),
                       [&](const std::string& prefix) { return name.rfind(prefix, 0) == 0; });
  };
  for (std::size_t p = 0; p < store.size(); ++p) {
    if (!selected(store.name(p))) continue;
    for (std::size_t j = 0; j < store.value(p).size(); ++j) coords.emplace_back(p, j);
  }
  if (coords.size() > options.max_coords) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
    std::sort(coords.begin(), coords.end());
  }

  GradCheckReport rep;
  for (const auto& [p, j] : coords) {
    double& w = store.value(p)[j];
    const double orig = w;
    w = orig + options.eps;
    const double up = eval_loss(loss);
    w = orig - options.eps;
    const double down = eval_loss(loss);
    w = orig;
    const double numeric = (up - down) / (2.0 * options.eps);
    const double analytic = store.grad(p)[j];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), options.denominator_floor});
    const double rel = std::abs(analytic - numeric) / denom;
    const double err = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
    if (++rep.coords_checked == 1 || err > rep.max_rel_err) {
      rep.max_rel_err = err;
      rep.worst_param = store.name(p);
      rep.worst_index = j;
      rep.worst_analytic = analytic;
      rep.worst_numeric = numeric;
    }
  }
  rep.passed = rep.max_rel_err < options.tolerance;
  store.zero_grad();
  return rep;
}

}  // namespace regretforge::tensor
