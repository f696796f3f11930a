#include "regretforge/tensor.hpp"

#include <cmath>
#include <cstring>

#include "regretforge/errors.hpp"
#include "regretforge/text.hpp"

namespace regretforge::tensor {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != numel(shape_)) {
    throw ShapeError("tensor data size " + std::to_string(data_.size()) + " does not match shape " +
                     shape_str(shape_));
  }
}

Tensor Tensor::row(std::vector<double> v) {
  const auto n = v.size();
  return Tensor({1, n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor({rows, cols}, std::move(v));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows() on rank-" + std::to_string(rank()) + " tensor");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols() on rank-" + std::to_string(rank()) + " tensor");
  return shape_[1];
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
  return data_[0];
}

void Tensor::fill(double v) {
  for (auto& x : data_) x = v;
}

std::size_t ParamStore::add(std::string name, Tensor init) {
  if (by_name_.count(name)) throw ArgumentError("duplicate parameter '" + name + "'");
  const auto i = values_.size();
  by_name_.emplace(name, i);
  names_.push_back(std::move(name));
  grads_.emplace_back(init.shape());
  m_.emplace_back(init.shape());
  v_.emplace_back(init.shape());
  values_.push_back(std::move(init));
  return i;
}

std::size_t ParamStore::index(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw LookupError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& g : grads_) g.fill(0.0);
}

double ParamStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& g : grads_) {
    for (double x : g.data()) sq += x * x;
  }
  return std::sqrt(sq);
}

double ParamStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& g : grads_) {
      for (auto& x : g.data()) x *= s;
    }
  }
  return norm;
}

std::uint64_t ParamStore::checksum() const {
  std::string bytes;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    bytes += names_[i];
    const auto d = values_[i].data();
    bytes.append(reinterpret_cast<const char*>(d.data()), d.size() * sizeof(double));
  }
  return text::fnv1a64(bytes);
}

void adam_step(ParamStore& store, const AdamConfig& c) {
  const auto t = store.adam_steps() + 1;
  store.set_adam_steps(t);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto w = store.value(i).data();
    const auto g = store.grad(i).data();
    auto m = store.first_moment(i).data();
    auto v = store.second_moment(i).data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace regretforge::tensor
