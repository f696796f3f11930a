#include "regretforge/adversary.hpp"

#include <cmath>

#include "init.hpp"
#include "regretforge/errors.hpp"

namespace regretforge {

using tensor::Tape;
using tensor::Tensor;
using tensor::Var;

struct AdversaryPolicy::Rollout {
  DesignSpec spec;
  Var total;
  Var logp_k;
  Var entropy;
  std::vector<Var> skip_logp;
  std::vector<double> logp_primitive;
  std::vector<double> logp_location;
};

AdversaryPolicy::AdversaryPolicy(AdversaryConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  if (config_.max_pages < 1) throw ArgumentError("adversary: K must be >= 1");
  if (config_.design_steps < 1) throw ArgumentError("adversary: N must be >= 1");
  const auto K = static_cast<std::size_t>(config_.max_pages);
  const auto H = static_cast<std::size_t>(config_.hidden);
  const auto D = static_cast<std::size_t>(config_.obs_dim);
  const auto A = kDesignActionCount;

  primitive_mask_.assign(A, config_.primitive_subset.empty());
  for (PrimitiveId id : config_.primitive_subset) {
    catalog().at(id);
    primitive_mask_[static_cast<std::size_t>(id)] = true;
  }
  primitive_mask_[static_cast<std::size_t>(kSkip)] = true;

  std::mt19937_64 rng(init_seed);
  const double head_scale = config_.uniform_heads ? 0.0 : 0.1;
  params_.add("f0.W", detail::fan_in_uniform(D, H, rng));
  params_.add("f0.b", detail::zeros(1, H));
  params_.add("fK.W", detail::fan_in_uniform(H, K, rng, head_scale));
  params_.add("fK.b", detail::zeros(1, K));
  params_.add("k_embed", detail::normal_init(K, H, rng, 0.1));
  params_.add("core.Wx", detail::fan_in_uniform(H, 4 * H, rng));
  params_.add("core.Wh", detail::fan_in_uniform(H, 4 * H, rng));
  params_.add("core.b", detail::zeros(1, 4 * H));
  params_.add("fP.W", detail::fan_in_uniform(H, A, rng, head_scale));
  params_.add("fP.b", detail::zeros(1, A));
  params_.add("fL.W", detail::fan_in_uniform(H, K, rng, head_scale));
  params_.add("fL.b", detail::zeros(1, K));
  params_.add("fI.primitive", detail::normal_init(A, H, rng, 0.5));
  params_.add("fI.location", detail::normal_init(K, H, rng, 0.5));
  params_.add("fI.b", detail::zeros(1, H));
}

void AdversaryPolicy::run(Tape& tape, std::span<const double> noise, const DesignSpec* forced,
                          std::mt19937_64* rng, const DesignForwardHooks& hooks, Rollout& out) {
  const int K = config_.max_pages;
  const int N = config_.design_steps;
  if (noise.size() != static_cast<std::size_t>(config_.obs_dim)) throw ShapeError("adversary: noise has wrong size");
  if (forced) {
    if (static_cast<int>(forced->actions.size()) != N) {
      throw ArgumentError("adversary: design has " + std::to_string(forced->actions.size()) + " actions, expected " +
                          std::to_string(N));
    }
    if (forced->k < 1 || forced->k > K) throw ArgumentError("adversary: design page count outside 1..K");
  }
  auto P = [&](const char* name) { return tape.param(params_, name); };

  Var obs = tape.constant(Tensor({1, noise.size()}, std::vector<double>(noise.begin(), noise.end())));
  Var h0 = tensor::tanh(tensor::affine(obs, P("f0.W"), P("f0.b")));

  const std::vector<bool> all_pages(static_cast<std::size_t>(K), true);
  Var k_logits = tensor::affine(h0, P("fK.W"), P("fK.b"));
  Var k_logp = tensor::masked_log_softmax(k_logits, all_pages);
  int k = 0;
  if (forced) {
    k = forced->k;
  } else {
    const auto probs = tensor::masked_softmax(k_logits.value().data(), all_pages);
    k = static_cast<int>(tensor::sample_index(probs, *rng)) + 1;
  }
  out.spec.k = k;
  out.spec.provenance = Provenance::adversary;
  out.logp_k = tensor::element(k_logp, static_cast<std::size_t>(k - 1));

  std::vector<bool> page_mask(static_cast<std::size_t>(K), false);
  for (int p = 0; p < k; ++p) page_mask[static_cast<std::size_t>(p)] = true;

  const auto H = static_cast<std::size_t>(config_.hidden);
  Var x = tensor::add(h0, tensor::embedding(P("k_embed"), static_cast<std::size_t>(k - 1)));
  Var h = tape.constant(Tensor({1, H}));
  Var c = tape.constant(Tensor({1, H}));
  Var total = out.logp_k;
  std::vector<Var> entropies;

  for (int i = 0; i < N; ++i) {
    std::tie(h, c) = tensor::lstm_cell(x, h, c, P("core.Wx"), P("core.Wh"), P("core.b"));
    Var p_logits = tensor::affine(h, P("fP.W"), P("fP.b"));
    if (static_cast<std::size_t>(i) < hooks.skip_logit_offset.size()) {
      Tensor offset({1, kDesignActionCount});
      offset[static_cast<std::size_t>(kSkip)] = hooks.skip_logit_offset[static_cast<std::size_t>(i)];
      p_logits = tensor::add(p_logits, tape.constant(std::move(offset)));
    }
    Var p_logp = tensor::masked_log_softmax(p_logits, primitive_mask_);
    entropies.push_back(tensor::masked_entropy(p_logits, primitive_mask_));

    DesignAction action;
    if (forced) {
      action = forced->actions[static_cast<std::size_t>(i)];
      if (!action.is_skip() && !primitive_mask_[static_cast<std::size_t>(action.primitive)]) {
        throw ArgumentError("adversary: design uses a primitive outside the allowed subset");
      }
    } else {
      const auto probs = tensor::masked_softmax(p_logits.value().data(), primitive_mask_);
      action.primitive = static_cast<PrimitiveId>(tensor::sample_index(probs, *rng));
    }
    Var a_logp = tensor::element(p_logp, static_cast<std::size_t>(action.primitive));
    out.skip_logp.push_back(tensor::element(p_logp, static_cast<std::size_t>(kSkip)));
    out.logp_primitive.push_back(a_logp.item());
    total = tensor::add(total, a_logp);

    Var next_in;
    if (action.is_skip()) {
      action.page = 0;
      out.logp_location.push_back(0.0);
      next_in = tensor::add(tensor::embedding(P("fI.primitive"), static_cast<std::size_t>(kSkip)), P("fI.b"));
    } else {
      Var l_logits = tensor::affine(h, P("fL.W"), P("fL.b"));
      Var l_logp = tensor::masked_log_softmax(l_logits, page_mask);
      entropies.push_back(tensor::masked_entropy(l_logits, page_mask));
      if (forced) {
        if (action.page < 0 || action.page >= k) throw ArgumentError("adversary: design page index >= k");
      } else {
        const auto probs = tensor::masked_softmax(l_logits.value().data(), page_mask);
        action.page = static_cast<int>(tensor::sample_index(probs, *rng));
      }
      Var b_logp = tensor::element(l_logp, static_cast<std::size_t>(action.page));
      out.logp_location.push_back(b_logp.item());
      total = tensor::add(total, b_logp);
      next_in = tensor::add(
          tensor::add(tensor::embedding(P("fI.primitive"), static_cast<std::size_t>(action.primitive)),
                      tensor::embedding(P("fI.location"), static_cast<std::size_t>(action.page))),
          P("fI.b"));
    }
    x = tensor::tanh(next_in);
    out.spec.actions.push_back(action);
  }
  out.total = total;
  out.entropy = tensor::sum(tensor::stack_rows(entropies));
}

DesignSample AdversaryPolicy::sample(std::mt19937_64& rng) {
  DesignSample s;
  std::normal_distribution<double> normal(0.0, 1.0);
  s.noise.resize(static_cast<std::size_t>(config_.obs_dim));
  for (auto& v : s.noise) v = normal(rng);
  Tape tape(false);
  Rollout r;
  run(tape, s.noise, nullptr, &rng, {}, r);
  s.spec = std::move(r.spec);
  s.logp_k = r.logp_k.item();
  s.logp_primitive = std::move(r.logp_primitive);
  s.logp_location = std::move(r.logp_location);
  for (const auto& v : r.skip_logp) s.skip_logp.push_back(v.item());
  s.total_logp = r.total.item();
  s.entropy = r.entropy.item();
  return s;
}

DesignForward AdversaryPolicy::forward(Tape& tape, const DesignSpec& spec, std::span<const double> noise,
                                       const DesignForwardHooks& hooks) {
  Rollout r;
  run(tape, noise, &spec, nullptr, hooks, r);
  return {r.total, r.logp_k, std::move(r.skip_logp), r.entropy};
}

double AdversaryPolicy::design_log_prob(const DesignSpec& spec, std::span<const double> noise,
                                        std::vector<double>* skip_logp) {
  Tape tape(false);
  const auto fwd = forward(tape, spec, noise);
  if (skip_logp) {
    skip_logp->clear();
    for (const auto& v : fwd.skip_logp) skip_logp->push_back(v.item());
  }
  return fwd.total_logp.item();
}

Var adversary_loss(const DesignForward& fwd, const AdversaryLossTerms& terms) {
  Var loss = tensor::scale(fwd.total_logp, -(terms.regret - terms.baseline));
  if (terms.lambda_budget != 0.0 && !fwd.skip_logp.empty()) {
    Var skip_sum = tensor::sum(tensor::stack_rows(fwd.skip_logp));
    loss = tensor::add(loss, tensor::scale(skip_sum, terms.lambda_budget * terms.best_return));
  }
  if (terms.entropy_coef != 0.0) loss = tensor::add(loss, tensor::scale(fwd.entropy, -terms.entropy_coef));
  return loss;
}

Var adversary_loss(Tape& tape, AdversaryPolicy& policy, const DesignSample& sample, const AdversaryLossTerms& terms,
                   const DesignForwardHooks& hooks) {
  return adversary_loss(policy.forward(tape, sample.spec, sample.noise, hooks), terms);
}

double adversary_update(AdversaryPolicy& policy, const DesignSample& sample, const AdversaryLossTerms& terms,
                        const tensor::AdamConfig& adam, double grad_clip) {
  auto& store = policy.params();
  store.zero_grad();
  double value = 0.0;
  {
    Tape tape(true);
    Var loss = adversary_loss(tape, policy, sample, terms);
    value = loss.item();
    tape.backward(loss);
  }
  if (grad_clip > 0.0) store.clip_grad_norm(grad_clip);
  tensor::adam_step(store, adam);
  return value;
}

}  // namespace regretforge
