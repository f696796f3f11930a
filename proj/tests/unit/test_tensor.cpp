#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "regretforge/autodiff.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/grad_check.hpp"
#include "regretforge/gradcheck_suite.hpp"
#include "regretforge/tensor.hpp"

using namespace regretforge;
using namespace regretforge::tensor;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "regretforge_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("tensor shapes") {
  const auto m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.at(1, 2) == 6);
  CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(m.item(), ShapeError);
  CHECK(Tensor::scalar(3).item() == 3);
  CHECK(Tensor::identity(3).at(1, 1) == 1);
  CHECK(shape_str({2, 3}).find('2') != std::string::npos);
}

TEST_CASE("matmul and affine values") {
  Tape tape;
  const auto a = tape.constant(Tensor::matrix(1, 2, {1, 2}));
  const auto w = tape.constant(Tensor::matrix(2, 2, {1, 0, 3, -1}));
  const auto b = tape.constant(Tensor::matrix(1, 2, {0.5, 0.5}));
  const auto y = affine(a, w, b);
  CHECK(y.value().at(0, 0) == 7.5);
  CHECK(y.value().at(0, 1) == -1.5);
  CHECK_THROWS_AS(matmul(w, a), ShapeError);
}

TEST_CASE("masked softmax sums to one and zeroes masked entries") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 30.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(13);
    std::vector<bool> mask(13);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      logits[i] = n(rng);
      mask[i] = (rng() % 3) != 0;
    }
    mask[trial % 13] = true;
    const auto p = masked_softmax(logits, mask);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!mask[i]) CHECK(p[i] == 0.0);
    }
  }
  const std::vector<double> big{1000.0, 1000.0};
  const auto p = masked_softmax(big, {true, true});
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(masked_softmax(big, {false, false}), MaskError);
}

TEST_CASE("masked log softmax gives no gradient to masked entries") {
  ParamStore store;
  store.add("z", Tensor::matrix(1, 4, {0.3, -1.0, 2.0, 0.1}));
  Tape tape;
  const auto z = tape.param(store, "z");
  const std::vector<bool> mask{true, false, true, true};
  const auto lp = masked_log_softmax(z, mask);
  CHECK(lp.value()[1] == 0.0);
  tape.backward(add(element(lp, 0), masked_entropy(z, mask)));
  CHECK(store.grad("z")[1] == 0.0);
  CHECK(store.grad("z")[0] != 0.0);
}

TEST_CASE("entropy of a uniform masked softmax is log of the support") {
  Tape tape;
  const auto z = tape.constant(Tensor::matrix(1, 5, {2, 2, 2, 2, 2}));
  CHECK(masked_entropy(z, {true, true, false, true, false}).item() == doctest::Approx(std::log(3.0)));
}

TEST_CASE("sample_index follows the probabilities") {
  std::mt19937_64 rng(4);
  const std::vector<double> p{0.2, 0.0, 0.5, 0.3};
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_index(p, rng)];
  CHECK(counts[1] == 0);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(counts[i] / double(n) - p[i]) < 0.01);
}

TEST_CASE("embedding rejects out-of-range rows") {
  Tape tape;
  const auto table = tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  CHECK(embedding(table, 1).value().at(0, 1) == 4);
  CHECK_THROWS_AS(embedding(table, 2), IndexError);
  const std::vector<std::size_t> none;
  CHECK(embedding_mean(table, none).value().at(0, 0) == 0.0);
}

TEST_CASE("gradients accumulate until zeroed") {
  ParamStore store;
  store.add("w", Tensor::matrix(1, 2, {1, 2}));
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    tape.backward(sum(tape.param(store, "w")));
  }
  CHECK(store.grad("w")[0] == 2.0);
  store.zero_grad();
  CHECK(store.grad("w")[0] == 0.0);
}

TEST_CASE("non-recording tape leaves gradients alone") {
  ParamStore store;
  store.add("w", Tensor::matrix(1, 2, {1, 2}));
  Tape tape(false);
  const auto y = sum(tanh(tape.param(store, "w")));
  CHECK(y.item() == doctest::Approx(std::tanh(1.0) + std::tanh(2.0)));
  CHECK(store.grad("w")[0] == 0.0);
}

TEST_CASE("adam first step moves each coordinate by lr") {
  ParamStore store;
  store.add("w", Tensor::matrix(1, 3, {1.0, -2.0, 0.5}));
  store.grad("w") = Tensor::matrix(1, 3, {3.0, -0.1, 0.0});
  adam_step(store, AdamConfig{0.01});
  const auto& w = store.value("w");
  CHECK(w[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(w[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
  CHECK(w[2] == 0.5);
  CHECK(store.adam_steps() == 1);
}

TEST_CASE("adam minimizes a quadratic") {
  ParamStore store;
  store.add("x", Tensor::matrix(1, 2, {3.0, -4.0}));
  for (int i = 0; i < 2000; ++i) {
    store.zero_grad();
    Tape tape;
    const auto x = tape.param(store, "x");
    tape.backward(sum(mul(x, x)));
    adam_step(store, AdamConfig{0.05});
  }
  CHECK(std::abs(store.value("x")[0]) < 1e-2);
  CHECK(std::abs(store.value("x")[1]) < 1e-2);
}

TEST_CASE("gradient clipping caps the global norm") {
  ParamStore store;
  store.add("a", Tensor::matrix(1, 2, {0, 0}));
  store.add("b", Tensor::matrix(1, 1, {0}));
  store.grad("a") = Tensor::matrix(1, 2, {3, 0});
  store.grad("b") = Tensor::matrix(1, 1, {4});
  CHECK(store.clip_grad_norm(1.0) == doctest::Approx(5.0));
  CHECK(store.grad_norm() == doctest::Approx(1.0));
  CHECK(store.grad("a")[0] == doctest::Approx(0.6));
  CHECK(store.clip_grad_norm(10.0) == doctest::Approx(1.0));
  CHECK(store.grad_norm() == doctest::Approx(1.0));
}

TEST_CASE("param store lookups") {
  ParamStore store;
  store.add("a", Tensor({2, 3}));
  CHECK(store.parameter_count() == 6);
  CHECK_THROWS_AS(store.add("a", Tensor::scalar(1)), ArgumentError);
  CHECK_THROWS_AS(store.index("b"), LookupError);
}

TEST_CASE("checkpoint roundtrip is bit-exact") {
  ParamStore store;
  store.add("w", Tensor::matrix(2, 2, {1.0 / 3.0, -0.0, 1e-300, 7}));
  store.add("s", Tensor::scalar(M_PI));
  store.grad("w")[0] = 1.0;
  adam_step(store, {});
  const auto path = temp_file("roundtrip.rfck");
  save_checkpoint(store, path);
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.checksum() == store.checksum());
  CHECK(loaded.size() == 2);
  CHECK(loaded.value("w") == store.value("w"));

  ParamStore target;
  target.add("w", Tensor({2, 2}));
  target.add("s", Tensor::scalar(0));
  load_checkpoint_into(target, path);
  CHECK(target.checksum() == store.checksum());

  ParamStore wrong;
  wrong.add("w", Tensor({1, 4}));
  wrong.add("s", Tensor::scalar(0));
  CHECK_THROWS_AS(load_checkpoint_into(wrong, path), ConfigError);
}

TEST_CASE("checkpoint rejects bad input") {
  const auto path = temp_file("bad.rfck");
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOTACKPT";
  }
  CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
  CHECK_THROWS_AS(load_checkpoint(temp_file("missing.rfck")), ConfigError);

  ParamStore store;
  store.add("w", Tensor({4, 4}, 1.5));
  const auto good = temp_file("trunc.rfck");
  save_checkpoint(store, good);
  std::filesystem::resize_file(good, std::filesystem::file_size(good) - 5);
  CHECK_THROWS_AS(load_checkpoint(good), ConfigError);
}

TEST_CASE("gradient check suite passes") {
  GradCheckOptions opts;
  for (const auto& entry : run_gradcheck_suite(opts)) {
    INFO(entry.model);
    CHECK(entry.report.passed);
  }
}

TEST_CASE("corrupted tanh gradient is caught") {
  debug::set_corrupt_tanh_gradient(true);
  bool any_failed = false;
  for (const auto& entry : run_gradcheck_suite({})) any_failed |= !entry.report.passed;
  debug::set_corrupt_tanh_gradient(false);
  CHECK(any_failed);
}
