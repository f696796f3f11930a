#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace regretforge::tensor {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major f64 array. Rank 0 is a scalar; row vectors are 1 x n.
class Tensor {
 public:
  Tensor() : shape_{}, data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor row(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const;

  void fill(double v);
  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Named parameters with gradient accumulators and Adam moments.
class ParamStore {
 public:
  std::size_t add(std::string name, Tensor init);

  std::size_t size() const { return values_.size(); }
  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const { return by_name_.count(std::string(name)) != 0; }
  const std::string& name(std::size_t i) const { return names_[i]; }

  Tensor& value(std::size_t i) { return values_[i]; }
  const Tensor& value(std::size_t i) const { return values_[i]; }
  Tensor& value(std::string_view name) { return values_[index(name)]; }
  const Tensor& value(std::string_view name) const { return values_[index(name)]; }
  Tensor& grad(std::size_t i) { return grads_[i]; }
  const Tensor& grad(std::size_t i) const { return grads_[i]; }
  Tensor& grad(std::string_view name) { return grads_[index(name)]; }
  Tensor& first_moment(std::size_t i) { return m_[i]; }
  Tensor& second_moment(std::size_t i) { return v_[i]; }
  const Tensor& first_moment(std::size_t i) const { return m_[i]; }
  const Tensor& second_moment(std::size_t i) const { return v_[i]; }

  std::int64_t adam_steps() const { return adam_steps_; }
  void set_adam_steps(std::int64_t n) { adam_steps_ = n; }

  std::size_t parameter_count() const;
  void zero_grad();
  double grad_norm() const;
  /// Scales gradients so their global L2 norm is at most `max_norm`. Returns the pre-clip norm.
  double clip_grad_norm(double max_norm);
  /// Digest of parameter values (bit-exact).
  std::uint64_t checksum() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::int64_t adam_steps_ = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update from the accumulated gradients. Gradients are left in place.
void adam_step(ParamStore& store, const AdamConfig& config);

/// Checkpoint archive ("RFCK1"): named tensors with shape headers.
void save_checkpoint(const ParamStore& store, const std::filesystem::path& path);
ParamStore load_checkpoint(const std::filesystem::path& path);
/// Loads values into an existing store; names and shapes must match exactly.
void load_checkpoint_into(ParamStore& store, const std::filesystem::path& path);

}  // namespace regretforge::tensor
