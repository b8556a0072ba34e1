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

#include "pateforge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pateforge/kernels.hpp"
#include "pateforge/rng.hpp"

namespace pateforge::nn {
namespace {

constexpr double kBceClamp = 1e-7;

double apply_activation(Activation activation, double z) {
  switch (activation) {
    case Activation::kIdentity: return z;
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  throw std::logic_error("unknown activation");
}

// Derivative expressed through the post-activation value y.
double activation_derivative(Activation activation, double y) {
  switch (activation) {
    case Activation::kIdentity: return 1.0;
    case Activation::kRelu: return y > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: return 1.0 - y * y;
    case Activation::kSigmoid: return y * (1.0 - y);
  }
  throw std::logic_error("unknown activation");
}

void check_specs(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("net needs at least one layer");
  for (std::size_t l = 0; l < specs.size(); ++l) {
    if (specs[l].input_dim == 0 || specs[l].output_dim == 0) {
      throw std::invalid_argument("layer dims must be >= 1");
    }
    if (l > 0 && specs[l].input_dim != specs[l - 1].output_dim) {
      throw std::invalid_argument("adjacent layer dims do not chain");
    }
  }
}

nlohmann::json matrix_to_json(const Matrix& m) { return m.data; }

}  // namespace

std::string activation_name(Activation activation) {
  switch (activation) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  throw std::logic_error("unknown activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw std::invalid_argument("unknown activation: " + name);
}

std::size_t DenseNet::parameter_count() const {
  std::size_t count = 0;
  for (const DenseLayer& layer : layers) {
    count += layer.weights.size() + layer.bias.size();
  }
  return count;
}

DenseNet init_net(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  check_specs(specs);
  DenseNet net;
  Rng rng(seed);
  for (const LayerSpec& spec : specs) {
    DenseLayer layer;
    layer.spec = spec;
    layer.weights = Matrix(spec.output_dim, spec.input_dim);
    layer.bias.assign(spec.output_dim, 0.0);
    const double limit = std::sqrt(
        6.0 / static_cast<double>(spec.input_dim + spec.output_dim));
    for (double& w : layer.weights.data) {
      w = (2.0 * rng.uniform() - 1.0) * limit;
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

ForwardCache forward(const DenseNet& net, const Matrix& batch) {
  if (batch.cols != net.input_dim()) {
    throw std::invalid_argument("forward: batch feature dim mismatch");
  }
  ForwardCache cache;
  cache.activations.reserve(net.layers.size() + 1);
  cache.activations.push_back(batch);
  for (const DenseLayer& layer : net.layers) {
    Matrix z;
    kernels::matmul_nt(cache.activations.back(), layer.weights, z);
    for (std::size_t i = 0; i < z.rows; ++i) {
      for (std::size_t j = 0; j < z.cols; ++j) {
        z(i, j) = apply_activation(layer.spec.activation,
                                   z(i, j) + layer.bias[j]);
      }
    }
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

Gradients backward(const DenseNet& net, const ForwardCache& cache,
                   const Matrix& output_gradient) {
  const std::size_t num_layers = net.layers.size();
  if (cache.activations.size() != num_layers + 1) {
    throw std::invalid_argument("backward: cache does not match net");
  }
  if (!same_shape(output_gradient, cache.activations.back())) {
    throw std::invalid_argument("backward: output gradient shape mismatch");
  }
  Gradients grads;
  grads.weights.resize(num_layers);
  grads.bias.resize(num_layers);

  Matrix delta = output_gradient;
  for (std::size_t l = num_layers; l-- > 0;) {
    const DenseLayer& layer = net.layers[l];
    const Matrix& out = cache.activations[l + 1];
    for (std::size_t i = 0; i < delta.rows; ++i) {
      for (std::size_t j = 0; j < delta.cols; ++j) {
        delta(i, j) *= activation_derivative(layer.spec.activation, out(i, j));
      }
    }
    kernels::matmul_tn(delta, cache.activations[l], grads.weights[l]);
    grads.bias[l].assign(layer.spec.output_dim, 0.0);
    for (std::size_t i = 0; i < delta.rows; ++i) {
      for (std::size_t j = 0; j < delta.cols; ++j) {
        grads.bias[l][j] += delta(i, j);
      }
    }
    Matrix next;
    kernels::matmul_nn(delta, layer.weights, next);
    delta = std::move(next);
  }
  grads.input = std::move(delta);
  return grads;
}

void accumulate(Gradients& into, const Gradients& from) {
  if (into.weights.size() != from.weights.size()) {
    throw std::invalid_argument("accumulate: gradient layer count mismatch");
  }
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    for (std::size_t i = 0; i < into.weights[l].size(); ++i) {
      into.weights[l].data[i] += from.weights[l].data[i];
    }
    for (std::size_t i = 0; i < into.bias[l].size(); ++i) {
      into.bias[l][i] += from.bias[l][i];
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    probs[j] = std::exp(logits[j] - peak);
    total += probs[j];
  }
  for (double& p : probs) p /= total;
  return probs;
}

LossResult softmax_cross_entropy(std::span<const double> logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw std::invalid_argument("softmax_cross_entropy: label out of range");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - peak);
  LossResult result;
  result.loss = -(logits[static_cast<std::size_t>(label)] - peak -
                  std::log(total));
  result.gradient.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    result.gradient[j] = std::exp(logits[j] - peak) / total;
  }
  result.gradient[static_cast<std::size_t>(label)] -= 1.0;
  return result;
}

ScalarLossResult binary_cross_entropy(double prediction, double target) {
  const double p = std::clamp(prediction, kBceClamp, 1.0 - kBceClamp);
  ScalarLossResult result;
  result.loss = -target * std::log(p) - (1.0 - target) * std::log(1.0 - p);
  result.gradient = (p - target) / (p * (1.0 - p));
  return result;
}

LossResult gaussian_reconstruction(std::span<const double> x,
                                   std::span<const double> xhat) {
  if (x.size() != xhat.size()) {
    throw std::invalid_argument("gaussian_reconstruction: dim mismatch");
  }
  LossResult result;
  result.gradient.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = xhat[k] - x[k];
    result.loss += 0.5 * diff * diff;
    result.gradient[k] = diff;
  }
  return result;
}

BatchLossResult softmax_cross_entropy_batch(const Matrix& logits,
                                            std::span<const int> labels) {
  if (labels.size() != logits.rows) {
    throw std::invalid_argument("softmax batch: label count mismatch");
  }
  BatchLossResult result;
  result.gradient = Matrix(logits.rows, logits.cols);
  const double scale = 1.0 / static_cast<double>(logits.rows);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const LossResult sample = softmax_cross_entropy(logits.row(i), labels[i]);
    result.loss += sample.loss * scale;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      result.gradient(i, j) = sample.gradient[j] * scale;
    }
  }
  return result;
}

BatchLossResult gaussian_reconstruction_batch(const Matrix& x,
                                              const Matrix& xhat) {
  if (!same_shape(x, xhat)) {
    throw std::invalid_argument("reconstruction batch: shape mismatch");
  }
  BatchLossResult result;
  result.gradient = Matrix(x.rows, x.cols);
  const double scale = 1.0 / static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      const double diff = xhat(i, j) - x(i, j);
      result.loss += 0.5 * diff * diff * scale;
      result.gradient(i, j) = diff * scale;
    }
  }
  return result;
}

Optimizer::Optimizer(const OptimizerConfig& config, const DenseNet& net)
    : config_(config) {
  if (config.learning_rate <= 0.0) {
    throw std::invalid_argument("optimizer: learning rate must be > 0");
  }
  if (config_.kind == OptimizerKind::kAdam) {
    for (const DenseLayer& layer : net.layers) {
      m_weights_.emplace_back(layer.weights.rows, layer.weights.cols);
      v_weights_.emplace_back(layer.weights.rows, layer.weights.cols);
      m_bias_.emplace_back(layer.bias.size(), 0.0);
      v_bias_.emplace_back(layer.bias.size(), 0.0);
    }
  }
}

void Optimizer::step(DenseNet& net, const Gradients& gradients) {
  if (gradients.weights.size() != net.layers.size()) {
    throw std::invalid_argument("optimizer: gradient/net layer mismatch");
  }
  ++step_;
  if (config_.kind == OptimizerKind::kSgd) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      DenseLayer& layer = net.layers[l];
      for (std::size_t i = 0; i < layer.weights.size(); ++i) {
        layer.weights.data[i] -=
            config_.learning_rate * gradients.weights[l].data[i];
      }
      for (std::size_t i = 0; i < layer.bias.size(); ++i) {
        layer.bias[i] -= config_.learning_rate * gradients.bias[l][i];
      }
    }
    return;
  }
  const double bias1 =
      1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bias2 =
      1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    DenseLayer& layer = net.layers[l];
    auto update = [&](double& param, double g, double& m, double& v) {
      m = config_.beta1 * m + (1.0 - config_.beta1) * g;
      v = config_.beta2 * v + (1.0 - config_.beta2) * g * g;
      const double m_hat = m / bias1;
      const double v_hat = v / bias2;
      param -= config_.learning_rate * m_hat /
               (std::sqrt(v_hat) + config_.epsilon);
    };
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      update(layer.weights.data[i], gradients.weights[l].data[i],
             m_weights_[l].data[i], v_weights_[l].data[i]);
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      update(layer.bias[i], gradients.bias[l][i], m_bias_[l][i],
             v_bias_[l][i]);
    }
  }
}

nlohmann::json Optimizer::to_json() const {
  nlohmann::json j;
  j["kind"] = config_.kind == OptimizerKind::kSgd ? "sgd" : "adam";
  j["learning_rate"] = config_.learning_rate;
  j["beta1"] = config_.beta1;
  j["beta2"] = config_.beta2;
  j["epsilon"] = config_.epsilon;
  j["step"] = step_;
  if (config_.kind == OptimizerKind::kAdam) {
    nlohmann::json moments = nlohmann::json::array();
    for (std::size_t l = 0; l < m_weights_.size(); ++l) {
      moments.push_back({{"m_weights", matrix_to_json(m_weights_[l])},
                         {"v_weights", matrix_to_json(v_weights_[l])},
                         {"m_bias", m_bias_[l]},
                         {"v_bias", v_bias_[l]}});
    }
    j["moments"] = std::move(moments);
  }
  return j;
}

Optimizer Optimizer::from_json(const nlohmann::json& j, const DenseNet& net) {
  OptimizerConfig config;
  config.kind = j.at("kind").get<std::string>() == "sgd" ? OptimizerKind::kSgd
                                                         : OptimizerKind::kAdam;
  config.learning_rate = j.at("learning_rate").get<double>();
  config.beta1 = j.at("beta1").get<double>();
  config.beta2 = j.at("beta2").get<double>();
  config.epsilon = j.at("epsilon").get<double>();
  Optimizer optimizer(config, net);
  optimizer.step_ = j.at("step").get<std::uint64_t>();
  if (config.kind == OptimizerKind::kAdam) {
    const nlohmann::json& moments = j.at("moments");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const nlohmann::json& entry = moments.at(l);
      entry.at("m_weights").get_to(optimizer.m_weights_[l].data);
      entry.at("v_weights").get_to(optimizer.v_weights_[l].data);
      entry.at("m_bias").get_to(optimizer.m_bias_[l]);
      entry.at("v_bias").get_to(optimizer.v_bias_[l]);
    }
  }
  return optimizer;
}

nlohmann::json net_to_json(const DenseNet& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& layer : net.layers) {
    layers.push_back({{"input_dim", layer.spec.input_dim},
                      {"output_dim", layer.spec.output_dim},
                      {"activation", activation_name(layer.spec.activation)},
                      {"weights", matrix_to_json(layer.weights)},
                      {"bias", layer.bias}});
  }
  return layers;
}

DenseNet net_from_json(const nlohmann::json& j) {
  DenseNet net;
  for (const nlohmann::json& entry : j) {
    DenseLayer layer;
    layer.spec.input_dim = entry.at("input_dim").get<std::size_t>();
    layer.spec.output_dim = entry.at("output_dim").get<std::size_t>();
    layer.spec.activation =
        activation_from_name(entry.at("activation").get<std::string>());
    layer.weights = Matrix(layer.spec.output_dim, layer.spec.input_dim);
    entry.at("weights").get_to(layer.weights.data);
    if (layer.weights.data.size() !=
        layer.spec.output_dim * layer.spec.input_dim) {
      throw std::invalid_argument("checkpoint: weight array size mismatch");
    }
    entry.at("bias").get_to(layer.bias);
    if (layer.bias.size() != layer.spec.output_dim) {
      throw std::invalid_argument("checkpoint: bias array size mismatch");
    }
    net.layers.push_back(std::move(layer));
  }
  if (net.layers.empty()) throw std::invalid_argument("checkpoint: empty net");
  return net;
}

void save_checkpoint(const DenseNet& net, const Optimizer* optimizer,
                     const std::string& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["layers"] = net_to_json(net);
  j["optimizer"] = optimizer ? optimizer->to_json() : nlohmann::json();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
}

DenseNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  if (j.at("format_version").get<int>() != 1) {
    throw std::runtime_error("checkpoint: unsupported format_version");
  }
  return net_from_json(j.at("layers"));
}

std::vector<EpochStats> train_classifier(DenseNet& net,
                                         const data::Dataset& dataset,
                                         std::span<const std::size_t> indices,
                                         const TrainConfig& config) {
  std::vector<std::size_t> order(indices.begin(), indices.end());
  if (order.empty()) {
    order.resize(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  }
  if (order.empty()) throw std::invalid_argument("train: empty dataset");
  if (config.batch_size == 0) {
    throw std::invalid_argument("train: batch_size must be >= 1");
  }

  Optimizer optimizer(config.optimizer, net);
  Rng shuffle_rng(hash_seed(config.seed, "epoch-shuffle", 0));
  std::vector<EpochStats> stats;
  stats.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle_rng.uniform() *
                                              static_cast<double>(i));
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t count =
          std::min(config.batch_size, order.size() - start);
      Matrix batch(count, dataset.feature_dim);
      std::vector<int> labels(count);
      for (std::size_t i = 0; i < count; ++i) {
        const data::LabeledSample& sample = dataset.samples[order[start + i]];
        labels[i] = sample.label;
        for (std::size_t k = 0; k < dataset.feature_dim; ++k) {
          batch(i, k) = sample.features[k];
        }
      }
      const ForwardCache cache = forward(net, batch);
      const BatchLossResult loss =
          softmax_cross_entropy_batch(cache.output(), labels);
      const Gradients grads = backward(net, cache, loss.gradient);
      optimizer.step(net, grads);
      epoch_loss += loss.loss;
      ++batches;
    }
    stats.push_back({epoch_loss / static_cast<double>(batches)});
  }
  return stats;
}

Matrix logits_for(const DenseNet& net, const Matrix& batch) {
  return forward(net, batch).output();
}

int predict_class(const DenseNet& net, std::span<const double> features) {
  Matrix batch(1, features.size());
  for (std::size_t k = 0; k < features.size(); ++k) batch(0, k) = features[k];
  const Matrix logits = logits_for(net, batch);
  int best = 0;
  for (std::size_t j = 1; j < logits.cols; ++j) {
    if (logits(0, j) > logits(0, static_cast<std::size_t>(best))) {
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace pateforge::nn
