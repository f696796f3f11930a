#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "regretforge/autodiff.hpp"
#include "regretforge/policy.hpp"
#include "regretforge/vocabulary.hpp"
#include "regretforge/web_env.hpp"

namespace regretforge {

struct NavigatorConfig {
  int embed = 32;
  int hidden = 64;
  int value_hidden = 32;
};

/// Hand-crafted per-element features appended to the token embeddings:
/// tag one-hot, focusable, depth / 4, sibling index / 8.
inline constexpr std::size_t kElementFeatureCount = kTagCount + 3;

/// Differentiable output of one policy evaluation.
struct NavForward {
  tensor::Var scores;     // elements x slots bilinear scores
  tensor::Var log_probs;  // same shape; 0 on masked entries
  tensor::Var entropy;
  tensor::Var value;      // 1 x 1
  std::vector<bool> mask;  // flattened, true where the pair is selectable
  std::vector<double> probs;
  std::size_t n_elements = 0;
  std::size_t n_slots = 0;

  /// Element marginal p(e) = sum over fields of the joint.
  std::vector<double> element_marginal() const;
};

/// Index of the largest unmasked logit (first one on ties).
std::size_t greedy_choice(std::span<const double> logits, const std::vector<bool>& mask);

/// Page-level LSTM element encoder, field MLP, bilinear scorer and attention-pooled value head.
class Navigator {
 public:
  Navigator(NavigatorConfig config, std::uint64_t init_seed);
  /// Adopts an existing parameter set (e.g. a loaded checkpoint); dimensions are read off the shapes.
  explicit Navigator(tensor::ParamStore params);

  const NavigatorConfig& config() const { return config_; }
  tensor::ParamStore& params() { return params_; }
  const tensor::ParamStore& params() const { return params_; }
  static const Vocabulary& vocabulary();

  /// Throws ContractViolation when the page has no focusable element.
  NavForward forward(tensor::Tape& tape, const Observation& obs);

  /// Inference-only decision. Safe to call concurrently while parameters are not being updated.
  Decision act(const Observation& obs, std::mt19937_64& rng, bool greedy) const;

 private:
  NavigatorConfig config_;
  tensor::ParamStore params_;
};

/// Maps a flattened choice back to an environment action.
NavAction decode_choice(const Observation& obs, std::size_t choice);

struct A2CConfig {
  double gamma = 0.99;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  tensor::AdamConfig adam;
  double grad_clip = 5.0;
};

struct A2CDiagnostics {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;
  std::size_t steps = 0;
};

/// Discounted return-to-go for each step.
std::vector<double> returns_to_go(std::span<const double> rewards, double gamma);

/// Teacher-forced actor-critic loss over the trajectories:
///   sum_t [ -A_t log pi(a_t) + value_coef (G_t - V_t)^2 - entropy_coef H_t ],
/// with A_t = G_t - (value recorded in the trajectory step), a constant.
tensor::Var a2c_loss(tensor::Tape& tape, Navigator& nav, std::span<const Trajectory> trajectories,
                     const A2CConfig& config, A2CDiagnostics* diag = nullptr);

/// Zeroes gradients, backpropagates a2c_loss, clips and takes one Adam step.
A2CDiagnostics a2c_update(Navigator& nav, std::span<const Trajectory> trajectories, const A2CConfig& config);

/// NavPolicy adapter over a navigator (sampling or greedy).
class NavigatorPolicy final : public NavPolicy {
 public:
  NavigatorPolicy(const Navigator& nav, bool greedy) : nav_(nav), greedy_(greedy) {}
  Decision decide(const EpisodeState& state, const Observation& obs, std::mt19937_64& rng) const override;

 private:
  const Navigator& nav_;
  bool greedy_;
};

}  // namespace regretforge
