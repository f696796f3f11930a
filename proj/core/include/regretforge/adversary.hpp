#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "regretforge/autodiff.hpp"
#include "regretforge/design.hpp"

namespace regretforge {

struct AdversaryConfig {
  int max_pages = 3;      // K
  int design_steps = 8;   // N
  int obs_dim = 16;
  int hidden = 64;
  /// Primitives the adversary may place; empty means the whole catalog. SKIP is always allowed.
  std::vector<PrimitiveId> primitive_subset;
  /// Zero the output heads so every categorical starts uniform.
  bool uniform_heads = false;
};

/// A sampled design together with everything needed to re-evaluate its log-probability.
struct DesignSample {
  DesignSpec spec;
  std::vector<double> noise;  // o^A
  double logp_k = 0.0;
  std::vector<double> logp_primitive;
  /// Location log-prob per step; 0 on SKIP steps, where it is excluded from the total.
  std::vector<double> logp_location;
  std::vector<double> skip_logp;
  double total_logp = 0.0;
  double entropy = 0.0;
};

/// Differentiable, teacher-forced evaluation of a design.
struct DesignForward {
  tensor::Var total_logp;
  tensor::Var logp_k;
  std::vector<tensor::Var> skip_logp;
  /// Sum of primitive-head entropies over all steps plus location-head entropies on non-SKIP steps.
  tensor::Var entropy;
};

/// Test hook: per-step additive offsets on the SKIP logit (empty = none).
struct DesignForwardHooks {
  std::vector<double> skip_logit_offset;
};

struct AdversaryLossTerms {
  double regret = 0.0;
  double baseline = 0.0;
  double best_return = 0.0;   // R_best, treated as a constant
  double lambda_budget = 0.0;
  double entropy_coef = 0.01;
};

/// Autoregressive environment designer: o^A ~ N(0, I), h0 = f0(o^A), k ~ fK(h0), then an LSTM
/// rollout of N steps emitting (primitive, page) pairs through fP and fL, fed back through fI.
class AdversaryPolicy {
 public:
  AdversaryPolicy(AdversaryConfig config, std::uint64_t init_seed);

  const AdversaryConfig& config() const { return config_; }
  tensor::ParamStore& params() { return params_; }
  const tensor::ParamStore& params() const { return params_; }

  /// Mask over the primitive head (catalog + SKIP).
  const std::vector<bool>& primitive_mask() const { return primitive_mask_; }

  DesignSample sample(std::mt19937_64& rng);

  /// Teacher-forced log-probability of `spec` given noise `noise`.
  DesignForward forward(tensor::Tape& tape, const DesignSpec& spec, std::span<const double> noise,
                        const DesignForwardHooks& hooks = {});

  /// Scalar convenience wrapper around forward().
  double design_log_prob(const DesignSpec& spec, std::span<const double> noise, std::vector<double>* skip_logp = nullptr);

 private:
  struct Rollout;
  void run(tensor::Tape& tape, std::span<const double> noise, const DesignSpec* forced, std::mt19937_64* rng,
           const DesignForwardHooks& hooks, Rollout& out);

  AdversaryConfig config_;
  tensor::ParamStore params_;
  std::vector<bool> primitive_mask_;
};

/// REINFORCE on regret plus the budget term and an entropy bonus:
///   -(regret - baseline) * log pi(design) + lambda * R_best * sum_i log pi(SKIP_i) - beta_H * H.
tensor::Var adversary_loss(const DesignForward& fwd, const AdversaryLossTerms& terms);

/// Recomputes the sample's forward pass on `tape` and returns adversary_loss.
tensor::Var adversary_loss(tensor::Tape& tape, AdversaryPolicy& policy, const DesignSample& sample,
                           const AdversaryLossTerms& terms, const DesignForwardHooks& hooks = {});

/// One Adam step on the adversary loss. Returns the loss value.
double adversary_update(AdversaryPolicy& policy, const DesignSample& sample, const AdversaryLossTerms& terms,
                        const tensor::AdamConfig& adam, double grad_clip);

}  // namespace regretforge
