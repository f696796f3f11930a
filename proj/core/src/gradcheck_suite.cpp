#include "regretforge/gradcheck_suite.hpp"

#include <functional>
#include <random>

#include "init.hpp"
#include "regretforge/adversary.hpp"
#include "regretforge/bench.hpp"
#include "regretforge/navigator.hpp"
#include "regretforge/site.hpp"

namespace regretforge {

using tensor::ParamStore;
using tensor::Tape;
using tensor::Tensor;
using tensor::Var;

namespace {

// Each op check owns a small store: "x" (2x3), "y" (2x3), "w" (3x4), "b" (1x4). The scalar loss
// is a fixed random projection of the op output, so every output coordinate gets its own weight.
struct OpFixture {
  ParamStore store;

  explicit OpFixture(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    // Values kept away from 0 so relu is differentiable at every coordinate.
    auto away = [&](std::size_t r, std::size_t c) {
      Tensor t({r, c});
      std::uniform_real_distribution<double> u(0.2, 1.0);
      std::bernoulli_distribution sign(0.5);
      for (auto& v : t.data()) v = sign(rng) ? u(rng) : -u(rng);
      return t;
    };
    store.add("x", away(2, 3));
    store.add("y", away(2, 3));
    store.add("w", away(3, 4));
    store.add("b", away(1, 4));
  }

  Var project(Tape& tape, Var v) const {
    Tensor p(v.value().shape());
    std::mt19937_64 rng(v.value().size() * 7919);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& e : p.data()) e = n(rng);
    return tensor::sum(tensor::mul(v, tape.constant(p)));
  }
};

using OpBody = std::function<Var(Tape&, ParamStore&)>;

const std::vector<std::pair<std::string, OpBody>>& op_bodies() {
  static const std::vector<std::pair<std::string, OpBody>> ops = [] {
    std::vector<std::pair<std::string, OpBody>> v;
    auto X = [](Tape& t, ParamStore& s) { return t.param(s, "x"); };
    auto Y = [](Tape& t, ParamStore& s) { return t.param(s, "y"); };
    auto W = [](Tape& t, ParamStore& s) { return t.param(s, "w"); };
    auto B = [](Tape& t, ParamStore& s) { return t.param(s, "b"); };
    v.emplace_back("add", [=](Tape& t, ParamStore& s) { return tensor::add(X(t, s), Y(t, s)); });
    v.emplace_back("sub", [=](Tape& t, ParamStore& s) { return tensor::sub(X(t, s), Y(t, s)); });
    v.emplace_back("mul", [=](Tape& t, ParamStore& s) { return tensor::mul(X(t, s), Y(t, s)); });
    v.emplace_back("mul_broadcast",
                   [=](Tape& t, ParamStore& s) { return tensor::mul(X(t, s), tensor::element(Y(t, s), 1)); });
    v.emplace_back("scale", [=](Tape& t, ParamStore& s) { return tensor::scale(X(t, s), -1.7); });
    v.emplace_back("add_scalar", [=](Tape& t, ParamStore& s) { return tensor::mul(tensor::add_scalar(X(t, s), 0.3), X(t, s)); });
    v.emplace_back("neg", [=](Tape& t, ParamStore& s) { return tensor::mul(tensor::neg(X(t, s)), Y(t, s)); });
    v.emplace_back("tanh", [=](Tape& t, ParamStore& s) { return tensor::tanh(X(t, s)); });
    v.emplace_back("relu", [=](Tape& t, ParamStore& s) { return tensor::relu(X(t, s)); });
    v.emplace_back("sigmoid", [=](Tape& t, ParamStore& s) { return tensor::sigmoid(X(t, s)); });
    v.emplace_back("exp", [=](Tape& t, ParamStore& s) { return tensor::exp(X(t, s)); });
    v.emplace_back("log", [=](Tape& t, ParamStore& s) { return tensor::log(tensor::exp(X(t, s))); });
    v.emplace_back("matmul", [=](Tape& t, ParamStore& s) { return tensor::matmul(X(t, s), W(t, s)); });
    v.emplace_back("affine", [=](Tape& t, ParamStore& s) { return tensor::affine(X(t, s), W(t, s), B(t, s)); });
    v.emplace_back("transpose",
                   [=](Tape& t, ParamStore& s) { return tensor::matmul(tensor::transpose(W(t, s)), tensor::transpose(X(t, s))); });
    v.emplace_back("sum", [=](Tape& t, ParamStore& s) { return tensor::mul(tensor::sum(X(t, s)), tensor::sum(W(t, s))); });
    v.emplace_back("mean", [=](Tape& t, ParamStore& s) { return tensor::mul(tensor::mean(X(t, s)), tensor::mean(Y(t, s))); });
    v.emplace_back("concat_cols", [=](Tape& t, ParamStore& s) {
      const Var parts[] = {X(t, s), Y(t, s)};
      return tensor::tanh(tensor::concat_cols(parts));
    });
    v.emplace_back("stack_rows", [=](Tape& t, ParamStore& s) {
      const Var parts[] = {tensor::row(X(t, s), 1), tensor::row(Y(t, s), 0), tensor::row(X(t, s), 0)};
      return tensor::tanh(tensor::stack_rows(parts));
    });
    v.emplace_back("row", [=](Tape& t, ParamStore& s) { return tensor::mul(tensor::row(X(t, s), 1), tensor::row(Y(t, s), 0)); });
    v.emplace_back("slice_cols", [=](Tape& t, ParamStore& s) { return tensor::tanh(tensor::slice_cols(W(t, s), 1, 3)); });
    v.emplace_back("element", [=](Tape& t, ParamStore& s) { return tensor::mul(tensor::element(X(t, s), 4), X(t, s)); });
    v.emplace_back("embedding", [=](Tape& t, ParamStore& s) { return tensor::tanh(tensor::embedding(W(t, s), 2)); });
    v.emplace_back("embedding_mean", [=](Tape& t, ParamStore& s) {
      const std::size_t idx[] = {0, 2, 2};
      return tensor::tanh(tensor::embedding_mean(W(t, s), idx));
    });
    v.emplace_back("lstm_cell", [=](Tape& t, ParamStore& s) {
      // x: 1x3, h/c: 1x1 sliced from b, wx: 3x4, wh: 1x4, bias: 1x4
      Var x = tensor::row(X(t, s), 0);
      Var h = tensor::slice_cols(tensor::row(Y(t, s), 1), 0, 1);
      Var c = tensor::slice_cols(tensor::row(Y(t, s), 1), 1, 2);
      auto [h2, c2] = tensor::lstm_cell(x, h, c, W(t, s), tensor::row(W(t, s), 0), B(t, s));
      const Var parts[] = {h2, c2};
      return tensor::concat_cols(parts);
    });
    v.emplace_back("masked_log_softmax", [=](Tape& t, ParamStore& s) {
      const std::vector<bool> mask = {true, false, true, true, true, false};
      return tensor::masked_log_softmax(X(t, s), mask);
    });
    v.emplace_back("masked_entropy", [=](Tape& t, ParamStore& s) {
      const std::vector<bool> mask = {true, true, false, true, true, true};
      return tensor::masked_entropy(Y(t, s), mask);
    });
    return v;
  }();
  return ops;
}

tensor::GradCheckReport check_op(const OpBody& body, const tensor::GradCheckOptions& options) {
  OpFixture fx(options.seed + 11);
  return tensor::grad_check(
      fx.store, [&](Tape& tape) { return fx.project(tape, body(tape, fx.store)); }, options);
}

tensor::GradCheckReport check_navigator(const tensor::GradCheckOptions& options) {
  NavigatorConfig cfg;
  cfg.embed = 6;
  cfg.hidden = 8;
  cfg.value_hidden = 5;
  Navigator nav(cfg, options.seed + 21);
  const auto tasks = select_tasks("login:2,shopping:1");
  std::vector<Trajectory> trajectories;
  std::mt19937_64 rng(options.seed + 22);
  for (const auto& task : tasks) {
    const Website site = render(task.spec);
    auto res = collect(NavigatorPolicy(nav, false), site, 1, EnvConfig{}, rng);
    for (auto& t : res.trajectories) {
      // A few steps are enough and keep the check fast.
      if (t.steps.size() > 4) t.steps.resize(4);
      trajectories.push_back(std::move(t));
    }
  }
  // The critic reads a detached context, so the full loss is not a plain function of the encoder
  // weights. Check its two consistent restrictions: the actor/entropy terms over every parameter,
  // and the complete loss over the value-head parameters, which only the critic term touches.
  A2CConfig actor;
  actor.value_coef = 0.0;
  auto report = tensor::grad_check(
      nav.params(), [&](Tape& tape) { return a2c_loss(tape, nav, trajectories, actor); }, options);
  A2CConfig full;
  auto value_opts = options;
  value_opts.only_params = {"value."};
  const auto critic = tensor::grad_check(
      nav.params(), [&](Tape& tape) { return a2c_loss(tape, nav, trajectories, full); }, value_opts);
  if (critic.max_rel_err > report.max_rel_err) {
    const auto checked = report.coords_checked;
    report = critic;
    report.coords_checked += checked;
  } else {
    report.coords_checked += critic.coords_checked;
  }
  report.passed = report.passed && critic.passed;
  return report;
}

tensor::GradCheckReport check_adversary(const tensor::GradCheckOptions& options) {
  AdversaryConfig cfg;
  cfg.max_pages = 3;
  cfg.design_steps = 5;
  cfg.hidden = 8;
  AdversaryPolicy adv(cfg, options.seed + 31);
  std::mt19937_64 rng(options.seed + 32);
  const auto sample = adv.sample(rng);
  AdversaryLossTerms terms;
  terms.regret = 0.35;
  terms.baseline = 0.1;
  terms.best_return = -0.4;
  terms.lambda_budget = 1.0;
  terms.entropy_coef = 0.01;
  return tensor::grad_check(
      adv.params(), [&](Tape& tape) { return adversary_loss(tape, adv, sample, terms); }, options);
}

}  // namespace

std::vector<std::string> gradcheck_models() {
  std::vector<std::string> names;
  for (const auto& [name, body] : op_bodies()) names.push_back("op:" + name);
  names.push_back("navigator.a2c");
  names.push_back("adversary.loss");
  return names;
}

std::vector<GradCheckEntry> run_gradcheck_suite(const tensor::GradCheckOptions& options) {
  std::vector<GradCheckEntry> out;
  for (const auto& [name, body] : op_bodies()) out.push_back({"op:" + name, check_op(body, options)});
  out.push_back({"navigator.a2c", check_navigator(options)});
  out.push_back({"adversary.loss", check_adversary(options)});
  return out;
}

}  // namespace regretforge
