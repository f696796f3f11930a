#include "regretforge/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>

#include "regretforge/errors.hpp"

namespace regretforge::tensor {

namespace {

std::atomic<bool> g_corrupt_tanh{false};

Tape& same_tape(Var a, Var b) {
  if (!a.valid() || a.tape() != b.tape()) throw ArgumentError("operands recorded on different tapes");
  return *a.tape();
}

Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a rank-2 tensor, got shape " + shape_str(t.shape()));
  }
}

// Elementwise binary op with scalar broadcast.
// fwd(x, y) -> z; dfa(x, y, z) and dfb(x, y, z) are the local partial derivatives.
template <typename Fwd, typename Da, typename Db>
Var binary(Var a, Var b, const char* op, Fwd fwd, Da dfa, Db dfb) {
  Tape& tape = same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Shape out_shape;
  if (av.shape() == bv.shape()) {
    out_shape = av.shape();
  } else if (bv.size() == 1) {
    out_shape = av.shape();
  } else if (av.size() == 1) {
    out_shape = bv.shape();
  } else {
    throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(av.shape()) + " and " +
                     shape_str(bv.shape()));
  }
  Tensor out(out_shape);
  const std::size_t n = out.size();
  const bool a_bc = av.size() == 1 && n != 1;
  const bool b_bc = bv.size() == 1 && n != 1;
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[a_bc ? 0 : i], bv[b_bc ? 0 : i]);

  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  const bool rg = tape.requires_grad(ia) || tape.requires_grad(ib);
  Tape* tp = &tape;
  const std::size_t out_id = tape.size();
  return tape.push(std::move(out), rg, [tp, ia, ib, out_id, a_bc, b_bc, n, dfa, dfb] {
    const Tensor& x = tp->value(ia);
    const Tensor& y = tp->value(ib);
    const Tensor& z = tp->value(out_id);
    const Tensor& g = tp->grad(out_id);
    if (tp->requires_grad(ia)) {
      Tensor& ga = tp->grad(ia);
      for (std::size_t i = 0; i < n; ++i) {
        ga[a_bc ? 0 : i] += g[i] * dfa(x[a_bc ? 0 : i], y[b_bc ? 0 : i], z[i]);
      }
    }
    if (tp->requires_grad(ib)) {
      Tensor& gb = tp->grad(ib);
      for (std::size_t i = 0; i < n; ++i) {
        gb[b_bc ? 0 : i] += g[i] * dfb(x[a_bc ? 0 : i], y[b_bc ? 0 : i], z[i]);
      }
    }
  });
}

// Elementwise unary op; dfx(x, z) is the local derivative.
template <typename Fwd, typename Dx>
Var unary(Var a, Fwd fwd, Dx dfx) {
  Tape& tape = *a.tape();
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  const std::size_t ia = a.id();
  Tape* tp = &tape;
  const std::size_t out_id = tape.size();
  return tape.push(std::move(out), tape.requires_grad(ia), [tp, ia, out_id, dfx] {
    const Tensor& x = tp->value(ia);
    const Tensor& z = tp->value(out_id);
    const Tensor& g = tp->grad(out_id);
    Tensor& gx = tp->grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfx(x[i], z[i]);
  });
}

// y (m x n) += a (m x k) * b (k x n)
void gemm_acc(const double* a, const double* b, double* y, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* yr = y + i * n;
    const double* ar = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = ar[p];
      if (s == 0.0) continue;
      const double* br = b + p * n;
      for (std::size_t j = 0; j < n; ++j) yr[j] += s * br[j];
    }
  }
}

// ga (m x k) += g (m x n) * b^T  where b is k x n
void gemm_acc_bt(const double* g, const double* b, double* ga, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gr = g + i * n;
    double* out = ga + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* br = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += gr[j] * br[j];
      out[p] += s;
    }
  }
}

// gb (k x n) += a^T * g  where a is m x k, g is m x n
void gemm_acc_at(const double* a, const double* g, double* gb, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ar = a + i * k;
    const double* gr = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = ar[p];
      if (s == 0.0) continue;
      double* out = gb + p * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += s * gr[j];
    }
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t count_unmasked(const std::vector<bool>& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

}  // namespace

// ---- Tape -----------------------------------------------------------------

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::param(ParamStore& store, std::size_t index) {
  const auto key = std::make_pair(static_cast<const ParamStore*>(&store), index);
  if (const auto it = param_nodes_.find(key); it != param_nodes_.end()) return {this, it->second};
  Node n;
  n.value = Tensor(Shape{0});
  n.alias = &store.value(index);
  n.grad_alias = &store.grad(index);
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(key, nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

Var Tape::push(Tensor value, bool requires_grad, std::function<void()> backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = record_ && requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.alias ? *n.alias : n.value;
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  n.grad_ready = true;
  if (n.grad_alias) return *n.grad_alias;
  if (n.grad.size() != value(id).size() || n.grad.shape() != value(id).shape()) n.grad = zeros_like(value(id));
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw ArgumentError("backward: loss recorded on another tape");
  if (!record_) throw ArgumentError("backward on a non-recording tape");
  if (value(loss.id()).size() != 1) {
    throw ShapeError("backward requires a scalar loss, got shape " + shape_str(value(loss.id()).shape()));
  }
  for (auto& n : nodes_) {
    if (!n.grad_alias) {
      n.grad_ready = false;
      n.grad = Tensor(Shape{0});
    }
  }
  if (!nodes_[loss.id()].requires_grad) return;
  grad(loss.id())[0] += 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.requires_grad && n.grad_ready && n.backward) n.backward();
  }
}

// ---- elementwise ------------------------------------------------------------

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Var scale(Var a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var neg(Var a) { return scale(a, -1.0); }

Var tanh(Var a) {
  const double k = debug::corrupt_tanh_gradient() ? 1.01 : 1.0;
  return unary(a, [](double x) { return std::tanh(x); }, [k](double, double z) { return k * (1.0 - z * z); });
}

Var relu(Var a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(a, sigmoid_scalar, [](double, double z) { return z * (1.0 - z); });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double z) { return z; });
}

Var log(Var a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

// ---- linear algebra -----------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) {
    throw ShapeError("matmul: inner dimensions differ " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
  }
  Tensor out({m, n});
  gemm_acc(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  const std::size_t ia = a.id(), ib = b.id(), out_id = tape.size();
  Tape* tp = &tape;
  const bool rg = tape.requires_grad(ia) || tape.requires_grad(ib);
  return tape.push(std::move(out), rg, [tp, ia, ib, out_id, m, k, n] {
    const Tensor& g = tp->grad(out_id);
    if (tp->requires_grad(ia)) {
      gemm_acc_bt(g.data().data(), tp->value(ib).data().data(), tp->grad(ia).data().data(), m, k, n);
    }
    if (tp->requires_grad(ib)) {
      gemm_acc_at(tp->value(ia).data().data(), g.data().data(), tp->grad(ib).data().data(), m, k, n);
    }
  });
}

Var affine(Var x, Var w, Var b) {
  Tape& tape = same_tape(x, w);
  same_tape(x, b);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  require_rank2(xv, "affine");
  require_rank2(wv, "affine");
  const std::size_t m = xv.rows(), k = xv.cols(), n = wv.cols();
  if (wv.rows() != k) {
    throw ShapeError("affine: inner dimensions differ " + shape_str(xv.shape()) + " x " + shape_str(wv.shape()));
  }
  if (bv.size() != n) throw ShapeError("affine: bias shape " + shape_str(bv.shape()) + " does not match width " +
                                       std::to_string(n));
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = bv[j];
  }
  gemm_acc(xv.data().data(), wv.data().data(), out.data().data(), m, k, n);
  const std::size_t ix = x.id(), iw = w.id(), ib = b.id(), out_id = tape.size();
  Tape* tp = &tape;
  const bool rg = tape.requires_grad(ix) || tape.requires_grad(iw) || tape.requires_grad(ib);
  return tape.push(std::move(out), rg, [tp, ix, iw, ib, out_id, m, k, n] {
    const Tensor& g = tp->grad(out_id);
    if (tp->requires_grad(ix)) {
      gemm_acc_bt(g.data().data(), tp->value(iw).data().data(), tp->grad(ix).data().data(), m, k, n);
    }
    if (tp->requires_grad(iw)) {
      gemm_acc_at(tp->value(ix).data().data(), g.data().data(), tp->grad(iw).data().data(), m, k, n);
    }
    if (tp->requires_grad(ib)) {
      Tensor& gb = tp->grad(ib);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
    }
  });
}

Var transpose(Var a) {
  Tape& tape = *a.tape();
  const Tensor& av = a.value();
  require_rank2(av, "transpose");
  const std::size_t m = av.rows(), n = av.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = av.at(i, j);
  }
  const std::size_t ia = a.id(), out_id = tape.size();
  Tape* tp = &tape;
  return tape.push(std::move(out), tape.requires_grad(ia), [tp, ia, out_id, m, n] {
    const Tensor& g = tp->grad(out_id);
    Tensor& ga = tp->grad(ia);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
    }
  });
}

// ---- reductions and reshaping -----------------------------------------------------

Var sum(Var a) {
  Tape& tape = *a.tape();
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  const std::size_t ia = a.id(), out_id = tape.size();
  Tape* tp = &tape;
  return tape.push(Tensor::scalar(s), tape.requires_grad(ia), [tp, ia, out_id] {
    const double g = tp->grad(out_id)[0];
    for (auto& x : tp->grad(ia).data()) x += g;
  });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_cols: no inputs");
  Tape& tape = *parts[0].tape();
  const std::size_t m = parts[0].value().rows();
  std::size_t total = 0;
  bool rg = false;
  std::vector<std::size_t> ids, widths;
  for (const auto& p : parts) {
    if (p.tape() != &tape) throw ArgumentError("concat_cols: operands recorded on different tapes");
    const Tensor& v = p.value();
    require_rank2(v, "concat_cols");
    if (v.rows() != m) throw ShapeError("concat_cols: row counts differ");
    ids.push_back(p.id());
    widths.push_back(v.cols());
    total += v.cols();
    rg = rg || tape.requires_grad(p.id());
  }
  Tensor out({m, total});
  std::size_t off = 0;
  for (const auto& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(v.data().data() + i * v.cols(), v.cols(), out.data().data() + i * total + off);
    }
    off += v.cols();
  }
  const std::size_t out_id = tape.size();
  Tape* tp = &tape;
  return tape.push(std::move(out), rg, [tp, ids, widths, out_id, m, total] {
    const Tensor& g = tp->grad(out_id);
    std::size_t off = 0;
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (tp->requires_grad(ids[p])) {
        Tensor& gp = tp->grad(ids[p]);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < widths[p]; ++j) gp[i * widths[p] + j] += g[i * total + off + j];
        }
      }
      off += widths[p];
    }
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ArgumentError("stack_rows: no inputs");
  Tape& tape = *rows[0].tape();
  const std::size_t n = rows[0].value().size();
  bool rg = false;
  std::vector<std::size_t> ids;
  Tensor out({rows.size(), n});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].tape() != &tape) throw ArgumentError("stack_rows: operands recorded on different tapes");
    const Tensor& v = rows[r].value();
    if (v.size() != n) throw ShapeError("stack_rows: row widths differ");
    std::copy(v.data().begin(), v.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(r * n));
    ids.push_back(rows[r].id());
    rg = rg || tape.requires_grad(rows[r].id());
  }
  const std::size_t out_id = tape.size();
  Tape* tp = &tape;
  return tape.push(std::move(out), rg, [tp, ids, out_id, n] {
    const Tensor& g = tp->grad(out_id);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (!tp->requires_grad(ids[r])) continue;
      Tensor& gr = tp->grad(ids[r]);
      for (std::size_t j = 0; j < n; ++j) gr[j] += g[r * n + j];
    }
  });
}

Var row(Var a, std::size_t r) {
  Tape& tape = *a.tape();
  const Tensor& av = a.value();
  require_rank2(av, "row");
  if (r >= av.rows()) throw IndexError("row " + std::to_string(r) + " out of range for " + shape_str(av.shape()));
  const std::size_t n = av.cols();
  Tensor out({1, n});
  std::copy_n(av.data().data() + r * n, n, out.data().data());
  const std::size_t ia = a.id(), out_id = tape.size();
  Tape* tp = &tape;
  return tape.push(std::move(out), tape.requires_grad(ia), [tp, ia, out_id, r, n] {
    const Tensor& g = tp->grad(out_id);
    Tensor& ga = tp->grad(ia);
    for (std::size_t j = 0; j < n; ++j) ga[r * n + j] += g[j];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Tape& tape = *a.tape();
  const Tensor& av = a.value();
  require_rank2(av, "slice_cols");
  if (begin > end || end > av.cols()) throw IndexError("slice_cols: bad range");
  const std::size_t m = av.rows(), n = av.cols(), w = end - begin;
  Tensor out({m, w});
  for (std::size_t i = 0; i < m; ++i) std::copy_n(av.data().data() + i * n + begin, w, out.data().data() + i * w);
  const std::size_t ia = a.id(), out_id = tape.size();
  Tape* tp = &tape;
  return tape.push(std::move(out), tape.requires_grad(ia), [tp, ia, out_id, m, n, w, begin] {
    const Tensor& g = tp->grad(out_id);
    Tensor& ga = tp->grad(ia);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < w; ++j) ga[i * n + begin + j] += g[i * w + j];
    }
  });
}

Var element(Var a, std::size_t i) {
  Tape& tape = *a.tape();
  const Tensor& av = a.value();
  if (i >= av.size()) throw IndexError("element " + std::to_string(i) + " out of range");
  const std::size_t ia = a.id(), out_id = tape.size();
  Tape* tp = &tape;
  return tape.push(Tensor::scalar(av[i]), tape.requires_grad(ia),
                   [tp, ia, out_id, i] { tp->grad(ia)[i] += tp->grad(out_id)[0]; });
}

Var embedding(Var table, std::size_t index) {
  const Tensor& tv = table.value();
  require_rank2(tv, "embedding");
  if (index >= tv.rows()) {
    throw IndexError("embedding index " + std::to_string(index) + " out of range for " + std::to_string(tv.rows()) +
                     " rows");
  }
  return row(table, index);
}

Var embedding_mean(Var table, std::span<const std::size_t> indices) {
  Tape& tape = *table.tape();
  const Tensor& tv = table.value();
  require_rank2(tv, "embedding_mean");
  const std::size_t n = tv.cols();
  Tensor out({1, n});
  for (auto idx : indices) {
    if (idx >= tv.rows()) throw IndexError("embedding index " + std::to_string(idx) + " out of range");
    const double* r = tv.data().data() + idx * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += r[j];
  }
  const double inv = indices.empty() ? 0.0 : 1.0 / static_cast<double>(indices.size());
  for (auto& x : out.data()) x *= inv;
  const std::size_t it = table.id(), out_id = tape.size();
  Tape* tp = &tape;
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return tape.push(std::move(out), tape.requires_grad(it) && !idx.empty(), [tp, it, out_id, idx, n, inv] {
    const Tensor& g = tp->grad(out_id);
    Tensor& gt = tp->grad(it);
    for (auto r : idx) {
      for (std::size_t j = 0; j < n; ++j) gt[r * n + j] += inv * g[j];
    }
  });
}

// ---- recurrent cell -----------------------------------------------------------------

std::pair<Var, Var> lstm_cell(Var x, Var h, Var c, Var wx, Var wh, Var b) {
  Tape& tape = same_tape(x, h);
  same_tape(x, c);
  same_tape(x, wx);
  same_tape(x, wh);
  same_tape(x, b);
  const Tensor& xv = x.value();
  const Tensor& hv = h.value();
  const Tensor& cv = c.value();
  const Tensor& wxv = wx.value();
  const Tensor& whv = wh.value();
  const Tensor& bv = b.value();
  require_rank2(xv, "lstm_cell");
  require_rank2(wxv, "lstm_cell");
  require_rank2(whv, "lstm_cell");
  const std::size_t nx = xv.size();
  const std::size_t nh = hv.size();
  if (cv.size() != nh || wxv.rows() != nx || wxv.cols() != 4 * nh || whv.rows() != nh || whv.cols() != 4 * nh ||
      bv.size() != 4 * nh) {
    throw ShapeError("lstm_cell: inconsistent shapes x" + shape_str(xv.shape()) + " h" + shape_str(hv.shape()) +
                     " wx" + shape_str(wxv.shape()) + " wh" + shape_str(whv.shape()));
  }

  struct Cache {
    std::vector<double> i, f, g, o, tc;
  };
  auto cache = std::make_shared<Cache>();
  std::vector<double> gates(bv.data().begin(), bv.data().end());
  gemm_acc(xv.data().data(), wxv.data().data(), gates.data(), 1, nx, 4 * nh);
  gemm_acc(hv.data().data(), whv.data().data(), gates.data(), 1, nh, 4 * nh);
  cache->i.resize(nh);
  cache->f.resize(nh);
  cache->g.resize(nh);
  cache->o.resize(nh);
  cache->tc.resize(nh);
  Tensor out({1, 2 * nh});
  for (std::size_t j = 0; j < nh; ++j) {
    const double ig = sigmoid_scalar(gates[j]);
    const double fg = sigmoid_scalar(gates[nh + j]);
    const double gg = std::tanh(gates[2 * nh + j]);
    const double og = sigmoid_scalar(gates[3 * nh + j]);
    const double cn = fg * cv[j] + ig * gg;
    const double tc = std::tanh(cn);
    cache->i[j] = ig;
    cache->f[j] = fg;
    cache->g[j] = gg;
    cache->o[j] = og;
    cache->tc[j] = tc;
    out[j] = og * tc;
    out[nh + j] = cn;
  }

  const std::size_t ix = x.id(), ih = h.id(), ic = c.id(), iwx = wx.id(), iwh = wh.id(), ib = b.id();
  const std::size_t out_id = tape.size();
  const bool rg = tape.requires_grad(ix) || tape.requires_grad(ih) || tape.requires_grad(ic) ||
                  tape.requires_grad(iwx) || tape.requires_grad(iwh) || tape.requires_grad(ib);
  Tape* tp = &tape;
  Var hc = tape.push(std::move(out), rg, [tp, cache, ix, ih, ic, iwx, iwh, ib, out_id, nx, nh] {
    const Tensor& g = tp->grad(out_id);
    const Tensor& cprev = tp->value(ic);
    std::vector<double> dgates(4 * nh);
    std::vector<double> dc_prev(nh);
    for (std::size_t j = 0; j < nh; ++j) {
      const double dh = g[j];
      const double dc = g[nh + j] + dh * cache->o[j] * (1.0 - cache->tc[j] * cache->tc[j]);
      const double di = dc * cache->g[j];
      const double df = dc * cprev[j];
      const double dg = dc * cache->i[j];
      const double d_o = dh * cache->tc[j];
      dc_prev[j] = dc * cache->f[j];
      dgates[j] = di * cache->i[j] * (1.0 - cache->i[j]);
      dgates[nh + j] = df * cache->f[j] * (1.0 - cache->f[j]);
      dgates[2 * nh + j] = dg * (1.0 - cache->g[j] * cache->g[j]);
      dgates[3 * nh + j] = d_o * cache->o[j] * (1.0 - cache->o[j]);
    }
    if (tp->requires_grad(ic)) {
      Tensor& gc = tp->grad(ic);
      for (std::size_t j = 0; j < nh; ++j) gc[j] += dc_prev[j];
    }
    if (tp->requires_grad(ib)) {
      Tensor& gb = tp->grad(ib);
      for (std::size_t j = 0; j < 4 * nh; ++j) gb[j] += dgates[j];
    }
    if (tp->requires_grad(iwx)) {
      gemm_acc_at(tp->value(ix).data().data(), dgates.data(), tp->grad(iwx).data().data(), 1, nx, 4 * nh);
    }
    if (tp->requires_grad(iwh)) {
      gemm_acc_at(tp->value(ih).data().data(), dgates.data(), tp->grad(iwh).data().data(), 1, nh, 4 * nh);
    }
    if (tp->requires_grad(ix)) {
      gemm_acc_bt(dgates.data(), tp->value(iwx).data().data(), tp->grad(ix).data().data(), 1, nx, 4 * nh);
    }
    if (tp->requires_grad(ih)) {
      gemm_acc_bt(dgates.data(), tp->value(iwh).data().data(), tp->grad(ih).data().data(), 1, nh, 4 * nh);
    }
  });
  return {slice_cols(hc, 0, nh), slice_cols(hc, nh, 2 * nh)};
}

// ---- categorical distributions ----------------------------------------------------

std::vector<double> masked_softmax(std::span<const double> logits, const std::vector<bool>& mask) {
  if (mask.size() != logits.size()) throw ShapeError("mask size does not match logits");
  if (count_unmasked(mask) == 0) throw MaskError("every entry is masked");
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) mx = std::max(mx, logits[i]);
  }
  if (!std::isfinite(mx)) throw MaskError("no finite unmasked logit");
  std::vector<double> p(logits.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) {
      p[i] = std::exp(logits[i] - mx);
      z += p[i];
    }
  }
  for (auto& x : p) x /= z;
  return p;
}

Var masked_log_softmax(Var logits, const std::vector<bool>& mask) {
  Tape& tape = *logits.tape();
  const Tensor& lv = logits.value();
  const auto probs = masked_softmax(lv.data(), mask);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (mask[i]) mx = std::max(mx, lv[i]);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (mask[i]) z += std::exp(lv[i] - mx);
  }
  const double lse = mx + std::log(z);
  Tensor out(lv.shape());
  for (std::size_t i = 0; i < lv.size(); ++i) out[i] = mask[i] ? lv[i] - lse : 0.0;

  const std::size_t il = logits.id(), out_id = tape.size();
  Tape* tp = &tape;
  std::vector<bool> m(mask.begin(), mask.end());
  return tape.push(std::move(out), tape.requires_grad(il), [tp, il, out_id, probs, m] {
    const Tensor& g = tp->grad(out_id);
    Tensor& gl = tp->grad(il);
    double gsum = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i]) gsum += g[i];
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i]) gl[i] += g[i] - probs[i] * gsum;
    }
  });
}

Var masked_entropy(Var logits, const std::vector<bool>& mask) {
  Tape& tape = *logits.tape();
  const Tensor& lv = logits.value();
  const auto probs = masked_softmax(lv.data(), mask);
  std::vector<double> logp(probs.size(), 0.0);
  double h = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      logp[i] = std::log(probs[i]);
      h -= probs[i] * logp[i];
    }
  }
  const std::size_t il = logits.id(), out_id = tape.size();
  Tape* tp = &tape;
  return tape.push(Tensor::scalar(h), tape.requires_grad(il), [tp, il, out_id, probs, logp, h] {
    const double g = tp->grad(out_id)[0];
    Tensor& gl = tp->grad(il);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0) gl[i] += -g * probs[i] * (logp[i] + h);
    }
  });
}

std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

CategoricalSample softmax_categorical(Var logits, const std::vector<bool>& mask, std::mt19937_64& rng) {
  CategoricalSample s;
  s.probs = masked_softmax(logits.value().data(), mask);
  s.index = sample_index(s.probs, rng);
  s.log_prob = element(masked_log_softmax(logits, mask), s.index);
  return s;
}

namespace debug {
void set_corrupt_tanh_gradient(bool on) { g_corrupt_tanh.store(on); }
bool corrupt_tanh_gradient() { return g_corrupt_tanh.load(); }
}  // namespace debug

}  // namespace regretforge::tensor
