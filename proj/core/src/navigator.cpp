#include "regretforge/navigator.hpp"

#include <algorithm>
#include <cmath>

#include "init.hpp"
#include "regretforge/errors.hpp"

namespace regretforge {

using tensor::Tape;
using tensor::Tensor;
using tensor::Var;

const Vocabulary& Navigator::vocabulary() {
  static const Vocabulary vocab = Vocabulary::from_catalog(catalog());
  return vocab;
}

Navigator::Navigator(NavigatorConfig config, std::uint64_t init_seed) : config_(config) {
  if (config_.embed < 1 || config_.hidden < 1 || config_.value_hidden < 1) {
    throw ArgumentError("navigator: dimensions must be positive");
  }
  const auto V = vocabulary().size();
  const auto E = static_cast<std::size_t>(config_.embed);
  const auto H = static_cast<std::size_t>(config_.hidden);
  const auto Vh = static_cast<std::size_t>(config_.value_hidden);
  const auto D = 2 * E + kElementFeatureCount;

  std::mt19937_64 rng(init_seed);
  params_.add("tok_emb", detail::normal_init(V, E, rng, 0.5));
  params_.add("enc.Wx", detail::fan_in_uniform(D, 4 * H, rng));
  params_.add("enc.Wh", detail::fan_in_uniform(H, 4 * H, rng));
  Tensor bias({1, 4 * H});
  for (std::size_t j = H; j < 2 * H; ++j) bias[j] = 1.0;  // forget gate
  params_.add("enc.b", std::move(bias));
  params_.add("field.W", detail::fan_in_uniform(2 * E, H, rng));
  params_.add("field.b", detail::zeros(1, H));
  params_.add("score.W", detail::fan_in_uniform(H, H, rng));
  params_.add("value.W1", detail::fan_in_uniform(H, Vh, rng));
  params_.add("value.b1", detail::zeros(1, Vh));
  params_.add("value.W2", detail::fan_in_uniform(Vh, 1, rng));
  params_.add("value.b2", detail::zeros(1, 1));
}

Navigator::Navigator(tensor::ParamStore params) : params_(std::move(params)) {
  for (const char* name : {"tok_emb", "enc.Wx", "enc.Wh", "enc.b", "field.W", "field.b", "score.W", "value.W1",
                           "value.b1", "value.W2", "value.b2"}) {
    if (!params_.contains(name)) throw ArgumentError(std::string("navigator: parameter missing: ") + name);
  }
  const auto& emb = params_.value("tok_emb");
  if (emb.rows() != vocabulary().size()) throw ShapeError("navigator: token table does not match vocabulary");
  config_.embed = static_cast<int>(emb.cols());
  config_.hidden = static_cast<int>(params_.value("enc.Wh").rows());
  config_.value_hidden = static_cast<int>(params_.value("value.W1").cols());
  if (params_.value("enc.Wx").rows() != 2 * emb.cols() + kElementFeatureCount) {
    throw ShapeError("navigator: encoder input width does not match embedding size");
  }
}

std::vector<double> NavForward::element_marginal() const {
  std::vector<double> p(n_elements, 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) p[i / n_slots] += probs[i];
  return p;
}

std::size_t greedy_choice(std::span<const double> logits, const std::vector<bool>& mask) {
  std::size_t best = logits.size();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    if (best == logits.size() || logits[i] > logits[best]) best = i;
  }
  if (best == logits.size()) throw MaskError("greedy_choice: every entry is masked");
  return best;
}

NavForward Navigator::forward(Tape& tape, const Observation& obs) {
  const auto& vocab = vocabulary();
  const auto H = static_cast<std::size_t>(config_.hidden);
  const std::size_t m = obs.elements.size();
  if (std::none_of(obs.elements.begin(), obs.elements.end(), [](const ObsElement& e) { return e.focusable; })) {
    throw ContractViolation("navigator: page has no focusable element");
  }
  auto P = [&](const char* name) { return tape.param(params_, name); };
  Var table = P("tok_emb");

  // Element encoder: one LSTM pass over the page in document order.
  Var wx = P("enc.Wx"), wh = P("enc.Wh"), b = P("enc.b");
  Var h = tape.constant(Tensor({1, H}));
  Var c = tape.constant(Tensor({1, H}));
  std::vector<Var> encodings;
  encodings.reserve(m);
  for (const auto& e : obs.elements) {
    const auto text_ids = vocab.ids(e.text_tokens);
    const auto value_ids = vocab.ids(e.value_tokens);
    Tensor feat({1, kElementFeatureCount});
    feat[static_cast<std::size_t>(e.tag)] = 1.0;
    feat[kTagCount] = e.focusable ? 1.0 : 0.0;
    feat[kTagCount + 1] = e.depth / 4.0;
    feat[kTagCount + 2] = e.sibling_index / 8.0;
    const Var parts[] = {tensor::embedding_mean(table, text_ids), tensor::embedding_mean(table, value_ids),
                         tape.constant(std::move(feat))};
    std::tie(h, c) = tensor::lstm_cell(tensor::concat_cols(parts), h, c, wx, wh, b);
    encodings.push_back(h);
  }
  Var enc = tensor::stack_rows(encodings);

  // Field encoder; an empty instruction gets a single null field of one UNK token.
  std::vector<ObsField> fields = obs.fields;
  if (fields.empty()) fields.push_back(ObsField{{"<unk>"}, {}});
  Var fw = P("field.W"), fb = P("field.b");
  std::vector<Var> field_rows;
  for (const auto& f : fields) {
    const auto key_ids = vocab.ids(f.key_tokens);
    const auto value_ids = vocab.ids(f.value_tokens);
    const Var parts[] = {tensor::embedding_mean(table, key_ids), tensor::embedding_mean(table, value_ids)};
    field_rows.push_back(tensor::tanh(tensor::affine(tensor::concat_cols(parts), fw, fb)));
  }
  Var fenc = tensor::stack_rows(field_rows);

  NavForward out;
  out.n_elements = m;
  out.n_slots = fields.size();
  out.scores = tensor::matmul(tensor::matmul(enc, P("score.W")), tensor::transpose(fenc));
  out.mask.assign(m * out.n_slots, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (!obs.elements[i].focusable) continue;
    std::fill_n(out.mask.begin() + static_cast<std::ptrdiff_t>(i * out.n_slots), out.n_slots, true);
  }
  out.log_probs = tensor::masked_log_softmax(out.scores, out.mask);
  out.entropy = tensor::masked_entropy(out.scores, out.mask);
  out.probs = tensor::masked_softmax(out.scores.value().data(), out.mask);

  // Critic reads the attention-pooled context as a constant, so its loss only trains the value head.
  const auto marginal = out.element_marginal();
  Var attn = tape.constant(Tensor({1, m}, marginal));
  Var context = tensor::matmul(attn, tape.constant(enc.value()));
  Var hidden = tensor::tanh(tensor::affine(context, P("value.W1"), P("value.b1")));
  out.value = tensor::affine(hidden, P("value.W2"), P("value.b2"));
  return out;
}

NavAction decode_choice(const Observation& obs, std::size_t choice) {
  const std::size_t slots = std::max<std::size_t>(1, obs.fields.size());
  if (choice >= obs.elements.size() * slots) throw IndexError("choice out of range");
  return {obs.elements[choice / slots].id, static_cast<int>(choice % slots)};
}

Decision Navigator::act(const Observation& obs, std::mt19937_64& rng, bool greedy) const {
  Tape tape(false);
  // A non-recording tape only reads parameter values.
  auto fwd = const_cast<Navigator*>(this)->forward(tape, obs);
  Decision d;
  d.choice = greedy ? greedy_choice(fwd.scores.value().data(), fwd.mask) : tensor::sample_index(fwd.probs, rng);
  d.action = decode_choice(obs, d.choice);
  d.log_prob = fwd.log_probs.value()[d.choice];
  d.value = fwd.value.item();
  d.entropy = fwd.entropy.item();
  return d;
}

Decision NavigatorPolicy::decide(const EpisodeState&, const Observation& obs, std::mt19937_64& rng) const {
  return nav_.act(obs, rng, greedy_);
}

std::vector<double> returns_to_go(std::span<const double> rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    g[i] = acc;
  }
  return g;
}

Var a2c_loss(Tape& tape, Navigator& nav, std::span<const Trajectory> trajectories, const A2CConfig& config,
             A2CDiagnostics* diag) {
  if (trajectories.empty()) throw ArgumentError("a2c: empty trajectory list");
  std::vector<Var> terms;
  A2CDiagnostics d;
  for (const auto& traj : trajectories) {
    const auto G = returns_to_go(traj.rewards(), config.gamma);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const auto& s = traj.steps[t];
      auto fwd = nav.forward(tape, s.observation);
      Var logp = tensor::element(fwd.log_probs, s.choice);
      Var v = tensor::element(fwd.value, 0);
      // Baseline is the value recorded at collection time, so the advantage is a constant of the rollout.
      const double advantage = G[t] - s.value;
      Var err = tensor::add_scalar(tensor::neg(v), G[t]);
      Var policy_term = tensor::scale(logp, -advantage);
      Var value_term = tensor::scale(tensor::mul(err, err), config.value_coef);
      Var entropy_term = tensor::scale(fwd.entropy, -config.entropy_coef);
      const Var parts[] = {policy_term, value_term, entropy_term};
      terms.push_back(tensor::sum(tensor::stack_rows(parts)));
      d.policy_loss += policy_term.item();
      d.value_loss += err.item() * err.item();
      d.entropy += fwd.entropy.item();
      ++d.steps;
    }
  }
  if (terms.empty()) throw ArgumentError("a2c: trajectories contain no steps");
  Var loss = tensor::sum(tensor::stack_rows(terms));
  d.loss = loss.item();
  if (diag) *diag = d;
  return loss;
}

A2CDiagnostics a2c_update(Navigator& nav, std::span<const Trajectory> trajectories, const A2CConfig& config) {
  A2CDiagnostics d;
  auto& store = nav.params();
  store.zero_grad();
  {
    Tape tape;
    Var loss = a2c_loss(tape, nav, trajectories, config, &d);
    tape.backward(loss);
  }
  d.grad_norm = config.grad_clip > 0.0 ? store.clip_grad_norm(config.grad_clip) : store.grad_norm();
  tensor::adam_step(store, config.adam);
  return d;
}

}  // namespace regretforge
