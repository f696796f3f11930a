#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "regretforge/tensor.hpp"

namespace regretforge::tensor {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  double item() const { return value().item(); }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records one forward pass. Nodes are appended in creation order, so reverse index order is a
/// reverse topological order. Parameter leaves alias the store's values and gradients, so the
/// store must outlive the tape and stay unmodified while it is in use.
/// A tape built with record=false skips gradient bookkeeping (inference only).
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Tensor value);
  /// Leaf bound to store.value(index); gradients accumulate into store.grad(index).
  Var param(ParamStore& store, std::size_t index);
  Var param(ParamStore& store, std::string_view name) { return param(store, store.index(name)); }

  /// Reverse-mode sweep from a scalar. Parameter gradients accumulate (they are not zeroed).
  void backward(Var loss);

  const Tensor& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer for a node, allocated on first use.
  Tensor& grad(std::size_t id);

  /// Appends a computed node. `backward` runs only when some input requires gradients.
  Var push(Tensor value, bool requires_grad, std::function<void()> backward);

 private:
  struct Node {
    Tensor value;
    const Tensor* alias = nullptr;
    Tensor grad;
    Tensor* grad_alias = nullptr;
    bool requires_grad = false;
    bool grad_ready = false;
    std::function<void()> backward;
  };

  bool record_;
  std::deque<Node> nodes_;
  std::map<std::pair<const ParamStore*, std::size_t>, std::size_t> param_nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

// Elementwise ops; a size-1 operand broadcasts against the other.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var neg(Var a);
Var tanh(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);

// Linear algebra on rank-2 tensors.
Var matmul(Var a, Var b);
/// y = xW + b with b a 1 x p row broadcast over the rows of x.
Var affine(Var x, Var w, Var b);
Var transpose(Var a);

// Reductions and reshaping.
Var sum(Var a);
Var mean(Var a);
Var concat_cols(std::span<const Var> parts);
Var stack_rows(std::span<const Var> rows);
Var row(Var a, std::size_t r);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var element(Var a, std::size_t i);
/// Row `index` of `table`; gradient scatters into that row. Throws IndexError when out of range.
Var embedding(Var table, std::size_t index);
/// Mean of the given rows of `table` (a zero row when `indices` is empty).
Var embedding_mean(Var table, std::span<const std::size_t> indices);

/// Standard 4-gate LSTM cell with gate order (input, forget, cell, output).
/// x: 1 x n, h and c: 1 x H, wx: n x 4H, wh: H x 4H, b: 1 x 4H. Returns (h', c').
std::pair<Var, Var> lstm_cell(Var x, Var h, Var c, Var wx, Var wh, Var b);

/// Log-probabilities of a masked softmax over all entries of `logits` (any shape, flattened).
/// Masked entries (mask == false) carry log-prob 0 in the output and receive no gradient;
/// probabilities() of them is exactly 0. Throws MaskError if every entry is masked.
Var masked_log_softmax(Var logits, const std::vector<bool>& mask);
/// Entropy of the masked softmax distribution (scalar).
Var masked_entropy(Var logits, const std::vector<bool>& mask);
/// Probabilities of the masked softmax, computed stably (max subtraction). Masked entries are 0.
std::vector<double> masked_softmax(std::span<const double> logits, const std::vector<bool>& mask);

struct CategoricalSample {
  std::size_t index = 0;
  Var log_prob;
  std::vector<double> probs;
};

/// Samples from the masked softmax of `logits`; log_prob is differentiable w.r.t. logits.
CategoricalSample softmax_categorical(Var logits, const std::vector<bool>& mask, std::mt19937_64& rng);

/// Draws an index from explicit probabilities using one uniform variate.
std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng);

namespace debug {
/// Negative-control hook: when set, tanh's backward rule is scaled by 1.01.
void set_corrupt_tanh_gradient(bool on);
bool corrupt_tanh_gradient();
}  // namespace debug

}  // namespace regretforge::tensor
