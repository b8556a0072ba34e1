// Copyright 2026 The pate-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "pateforge/nn.hpp"
#include "test_helpers.hpp"

using namespace pateforge;
namespace fs = std::filesystem;

namespace {

nn::DenseNet identity_layer_net(std::size_t dim) {
  nn::DenseNet net = nn::init_net({{dim, dim, nn::Activation::kIdentity}}, 1);
  for (auto& layer : net.layers) {
    std::fill(layer.weights.data.begin(), layer.weights.data.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) layer.weights(i, i) = 1.0;
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  return net;
}

}  // namespace

TEST_CASE("identity layer passes the batch through") {
  const nn::DenseNet net = identity_layer_net(3);
  Matrix batch(2, 3);
  batch.data = {1.0, -2.0, 3.0, 0.5, 0.25, -0.125};
  const nn::ForwardCache cache = nn::forward(net, batch);
  CHECK(cache.output().data == batch.data);
}

TEST_CASE("relu and sigmoid behave at their reference points") {
  nn::DenseNet relu_net = identity_layer_net(2);
  relu_net.layers[0].spec.activation = nn::Activation::kRelu;
  Matrix batch(1, 2);
  batch.data = {-1.0, 2.0};
  const nn::ForwardCache relu_cache = nn::forward(relu_net, batch);
  CHECK(relu_cache.output().data == std::vector<double>{0.0, 2.0});

  nn::DenseNet sigmoid_net = identity_layer_net(1);
  sigmoid_net.layers[0].spec.activation = nn::Activation::kSigmoid;
  Matrix zero(1, 1, 0.0);
  CHECK(nn::forward(sigmoid_net, zero).output()(0, 0) == 0.5);
}

TEST_CASE("forward rejects mismatched batch dims") {
  const nn::DenseNet net = identity_layer_net(3);
  Matrix batch(1, 2, 0.0);
  CHECK_THROWS_AS(nn::forward(net, batch), std::invalid_argument);
}

TEST_CASE("zero output gradient produces zero parameter gradients") {
  Rng rng(2);
  const nn::DenseNet net = nn::init_net({{4, 8, nn::Activation::kTanh},
                                         {8, 3, nn::Activation::kIdentity}},
                                        7);
  const Matrix batch = testing::random_matrix(5, 4, rng);
  const nn::ForwardCache cache = nn::forward(net, batch);
  const Matrix zero(5, 3, 0.0);
  const nn::Gradients grads = nn::backward(net, cache, zero);
  for (const auto& w : grads.weights) {
    for (double v : w.data) CHECK(v == 0.0);
  }
  for (const auto& b : grads.bias) {
    for (double v : b) CHECK(v == 0.0);
  }
}

TEST_CASE("one-layer linear squared loss matches the closed form") {
  // loss = ||Wx + b - y||^2, dLoss/dW = 2 (Wx + b - y) x^T.
  Rng rng(3);
  nn::DenseNet net = nn::init_net({{3, 2, nn::Activation::kIdentity}}, 11);
  const Matrix x = testing::random_matrix(1, 3, rng);
  const std::vector<double> y = {0.3, -0.7};
  const nn::ForwardCache cache = nn::forward(net, x);
  Matrix output_grad(1, 2);
  std::vector<double> residual(2);
  for (std::size_t j = 0; j < 2; ++j) {
    residual[j] = cache.output()(0, j) - y[j];
    output_grad(0, j) = 2.0 * residual[j];
  }
  const nn::Gradients grads = nn::backward(net, cache, output_grad);
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(grads.weights[0](j, k) ==
            doctest::Approx(2.0 * residual[j] * x(0, k)).epsilon(1e-12));
    }
    CHECK(grads.bias[0][j] == doctest::Approx(2.0 * residual[j]).epsilon(1e-12));
  }
}

TEST_CASE("three-layer net gradients match finite differences") {
  Rng rng(4);
  nn::DenseNet net = nn::init_net({{4, 6, nn::Activation::kTanh},
                                   {6, 5, nn::Activation::kSigmoid},
                                   {5, 3, nn::Activation::kIdentity}},
                                  13);
  const Matrix batch = testing::random_matrix(3, 4, rng);
  const std::vector<int> labels = {0, 2, 1};
  auto loss_fn = [&](const nn::DenseNet& candidate) {
    const Matrix logits = nn::logits_for(candidate, batch);
    return nn::softmax_cross_entropy_batch(logits, labels).loss;
  };
  const nn::ForwardCache cache = nn::forward(net, batch);
  const nn::BatchLossResult loss =
      nn::softmax_cross_entropy_batch(cache.output(), labels);
  const nn::Gradients grads = nn::backward(net, cache, loss.gradient);
  CHECK(testing::max_fd_rel_error(net, grads, loss_fn) < 1e-4);
}

TEST_CASE("softmax cross entropy hits its reference values") {
  const std::vector<double> uniform(4, 1.25);
  const nn::LossResult uniform_loss = nn::softmax_cross_entropy(uniform, 2);
  CHECK(uniform_loss.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  const std::vector<double> extreme = {1000.0, 0.0};
  const nn::LossResult stable = nn::softmax_cross_entropy(extreme, 0);
  CHECK(std::isfinite(stable.loss));
  CHECK(stable.loss == doctest::Approx(0.0).epsilon(1e-12));

  // Gradient = softmax - one_hot, checked by finite differences on logits.
  Rng rng(5);
  std::vector<double> logits(5);
  for (double& v : logits) v = 2.0 * rng.uniform() - 1.0;
  const nn::LossResult result = nn::softmax_cross_entropy(logits, 3);
  const double h = 1e-6;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    std::vector<double> up = logits, down = logits;
    up[j] += h;
    down[j] -= h;
    const double fd = (nn::softmax_cross_entropy(up, 3).loss -
                       nn::softmax_cross_entropy(down, 3).loss) /
                      (2.0 * h);
    CHECK(std::abs(fd - result.gradient[j]) < 1e-6);
  }
}

TEST_CASE("softmax outputs are a probability vector") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> logits(7);
    for (double& v : logits) v = 10.0 * (2.0 * rng.uniform() - 1.0);
    const std::vector<double> probs = nn::softmax(logits);
    double total = 0.0;
    for (double p : probs) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("binary cross entropy reference points") {
  CHECK(nn::binary_cross_entropy(0.5, 0.0).loss ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(nn::binary_cross_entropy(0.5, 1.0).loss ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(nn::binary_cross_entropy(1.0, 1.0).loss <= 1e-6);
  CHECK(nn::binary_cross_entropy(0.0, 0.0).loss <= 1e-6);
  CHECK(nn::binary_cross_entropy(0.9, 0.0).loss ==
        doctest::Approx(std::log(10.0)).epsilon(1e-9));
}

TEST_CASE("gaussian reconstruction loss and gradient") {
  const std::vector<double> x = {1.0, 2.0};
  CHECK(nn::gaussian_reconstruction(x, x).loss == 0.0);

  const std::vector<double> xhat = {2.0, 3.0};  // residual (1,1)
  const nn::LossResult offset = nn::gaussian_reconstruction(x, xhat);
  CHECK(offset.loss == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(7);
  std::vector<double> a(4), b(4);
  for (double& v : a) v = 2.0 * rng.uniform() - 1.0;
  for (double& v : b) v = 2.0 * rng.uniform() - 1.0;
  const nn::LossResult random_pair = nn::gaussian_reconstruction(a, b);
  const double h = 1e-6;
  for (std::size_t k = 0; k < b.size(); ++k) {
    CHECK(random_pair.gradient[k] ==
          doctest::Approx(b[k] - a[k]).epsilon(1e-12));
    std::vector<double> up = b, down = b;
    up[k] += h;
    down[k] -= h;
    const double fd = (nn::gaussian_reconstruction(a, up).loss -
                       nn::gaussian_reconstruction(a, down).loss) /
                      (2.0 * h);
    CHECK(std::abs(fd - random_pair.gradient[k]) < 1e-6);
  }
}

TEST_CASE("sgd applies the plain update rule") {
  nn::DenseNet net = nn::init_net({{1, 1, nn::Activation::kIdentity}}, 1);
  net.layers[0].weights(0, 0) = 1.0;
  nn::Optimizer optimizer({nn::OptimizerKind::kSgd, 0.1}, net);
  nn::Gradients grads;
  grads.weights.emplace_back(1, 1, 1.0);
  grads.bias.push_back({0.0});
  optimizer.step(net, grads);
  CHECK(net.layers[0].weights(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("adam's first step size is the learning rate regardless of scale") {
  // With bias correction, m_hat = g and v_hat = g^2 at t = 1, so the update
  // is lr * g / (|g| + eps).
  for (double g : {1.0, 100.0, 1e-3}) {
    nn::DenseNet net = nn::init_net({{1, 1, nn::Activation::kIdentity}}, 1);
    net.layers[0].weights(0, 0) = 1.0;
    nn::Optimizer optimizer({nn::OptimizerKind::kAdam, 0.01}, net);
    nn::Gradients grads;
    grads.weights.emplace_back(1, 1, g);
    grads.bias.push_back({0.0});
    optimizer.step(net, grads);
    CHECK(net.layers[0].weights(0, 0) ==
          doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  }
}

TEST_CASE("zero gradients leave parameters unchanged") {
  nn::DenseNet sgd_net = nn::init_net({{2, 2, nn::Activation::kIdentity}}, 3);
  const nn::DenseNet before = sgd_net;
  nn::Optimizer sgd({nn::OptimizerKind::kSgd, 0.5}, sgd_net);
  nn::Gradients zero;
  zero.weights.emplace_back(2, 2, 0.0);
  zero.bias.push_back({0.0, 0.0});
  sgd.step(sgd_net, zero);
  CHECK(testing::nets_bit_equal(sgd_net, before));

  nn::DenseNet adam_net = before;
  nn::Optimizer adam({nn::OptimizerKind::kAdam, 0.5}, adam_net);
  adam.step(adam_net, zero);
  // First adam step with zero gradient: m_hat = 0, so the update is 0.
  CHECK(testing::nets_bit_equal(adam_net, before));
}

TEST_CASE("glorot initialization is seeded, bounded, and zero-biased") {
  const std::vector<nn::LayerSpec> specs = {{64, 16, nn::Activation::kTanh}};
  const nn::DenseNet a = nn::init_net(specs, 17);
  const nn::DenseNet b = nn::init_net(specs, 17);
  CHECK(testing::nets_bit_equal(a, b));
  const nn::DenseNet c = nn::init_net(specs, 18);
  CHECK(!testing::nets_bit_equal(a, c));

  const double limit = std::sqrt(6.0 / 80.0);
  for (double w : a.layers[0].weights.data) {
    CHECK(std::abs(w) <= limit);
  }
  for (double bias : a.layers[0].bias) CHECK(bias == 0.0);
}

TEST_CASE("checkpoints round-trip bit-faithfully") {
  const fs::path dir = fs::temp_directory_path() / "pateforge-nn-tests";
  fs::create_directories(dir);
  const fs::path path = dir / "net.json";
  const nn::DenseNet net = nn::init_net({{5, 4, nn::Activation::kRelu},
                                         {4, 3, nn::Activation::kIdentity}},
                                        23);
  nn::Optimizer optimizer({nn::OptimizerKind::kAdam, 1e-3}, net);
  nn::save_checkpoint(net, &optimizer, path.string());
  const nn::DenseNet loaded = nn::load_checkpoint(path.string());
  CHECK(testing::nets_bit_equal(net, loaded));

  // Save/load/save produces identical bytes.
  const fs::path path2 = dir / "net2.json";
  nn::save_checkpoint(loaded, &optimizer, path2.string());
  std::ifstream f1(path), f2(path2);
  const std::string s1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
}

TEST_CASE("classifier training is deterministic in the seed") {
  data::ToyDatasetConfig toy;
  toy.num_classes = 2;
  toy.samples_per_class = 30;
  toy.feature_dim = 4;
  toy.seed = 5;
  const data::Dataset dataset = data::generate_toy_dataset(toy);
  nn::TrainConfig config;
  config.epochs = 5;
  config.batch_size = 8;
  config.seed = 77;
  nn::DenseNet a = nn::init_net({{4, 8, nn::Activation::kRelu},
                                 {8, 2, nn::Activation::kIdentity}},
                                config.seed);
  nn::DenseNet b = a;
  nn::train_classifier(a, dataset, {}, config);
  nn::train_classifier(b, dataset, {}, config);
  CHECK(testing::nets_bit_equal(a, b));
}
