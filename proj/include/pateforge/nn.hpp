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

#ifndef PATEFORGE_NN_HPP_
#define PATEFORGE_NN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pateforge/data.hpp"
#include "pateforge/matrix.hpp"

namespace pateforge::nn {

// Minimal dense-network engine with exact analytic gradients. Double
// precision throughout; every training step is a pure function of
// (net, batch, optimizer state, seed).

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

std::string activation_name(Activation activation);
Activation activation_from_name(const std::string& name);

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::kIdentity;
};

struct DenseLayer {
  LayerSpec spec;
  Matrix weights;            // output_dim x input_dim
  std::vector<double> bias;  // output_dim
};

struct DenseNet {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().spec.input_dim; }
  std::size_t output_dim() const { return layers.back().spec.output_dim; }
  std::size_t parameter_count() const;
};

// Glorot-uniform weights, zero biases, deterministic in the seed.
DenseNet init_net(const std::vector<LayerSpec>& specs, std::uint64_t seed);

// activations[0] is the input batch; activations[l] is layer l's output.
// Retained post-activation values are sufficient for backward for all four
// activation kinds.
struct ForwardCache {
  std::vector<Matrix> activations;
  const Matrix& output() const { return activations.back(); }
};

ForwardCache forward(const DenseNet& net, const Matrix& batch);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
  Matrix input;  // dLoss/dInput, same shape as the batch
};

// output_gradient is dLoss/dOutput (post-activation) for the whole batch.
Gradients backward(const DenseNet& net, const ForwardCache& cache,
                   const Matrix& output_gradient);

void accumulate(Gradients& into, const Gradients& from);

// --- losses (single sample) ---

std::vector<double> softmax(std::span<const double> logits);

struct LossResult {
  double loss = 0.0;
  std::vector<double> gradient;
};

// loss = -log softmax(logits)[label]; gradient = softmax - one_hot.
// Log-sum-exp stabilized.
LossResult softmax_cross_entropy(std::span<const double> logits, int label);

struct ScalarLossResult {
  double loss = 0.0;
  double gradient = 0.0;
};

// Prediction clamped to [1e-7, 1 - 1e-7] before the logs.
ScalarLossResult binary_cross_entropy(double prediction, double target);

// loss = 0.5 * ||x - xhat||^2; gradient is with respect to xhat.
LossResult gaussian_reconstruction(std::span<const double> x,
                                   std::span<const double> xhat);

// --- losses (batch means) ---

struct BatchLossResult {
  double loss = 0.0;
  Matrix gradient;  // dLoss/dOutput for the whole batch
};

BatchLossResult softmax_cross_entropy_batch(const Matrix& logits,
                                            std::span<const int> labels);
BatchLossResult gaussian_reconstruction_batch(const Matrix& x,
                                              const Matrix& xhat);

// --- optimizers ---

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, const DenseNet& net);

  void step(DenseNet& net, const Gradients& gradients);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_; }

  nlohmann::json to_json() const;
  static Optimizer from_json(const nlohmann::json& j, const DenseNet& net);

 private:
  OptimizerConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Matrix> m_weights_, v_weights_;
  std::vector<std::vector<double>> m_bias_, v_bias_;
};

// --- checkpointing ---

nlohmann::json net_to_json(const DenseNet& net);
DenseNet net_from_json(const nlohmann::json& j);

// Single JSON document {format_version, layers, optimizer}; weight arrays
// round-trip bit-faithfully.
void save_checkpoint(const DenseNet& net, const Optimizer* optimizer,
                     const std::string& path);
DenseNet load_checkpoint(const std::string& path);

// --- classifier training ---

struct TrainConfig {
  OptimizerConfig optimizer;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double mean_loss = 0.0;
};

// Minibatch softmax cross-entropy training over the listed sample indices
// (all samples when indices is empty).
std::vector<EpochStats> train_classifier(DenseNet& net,
                                         const data::Dataset& dataset,
                                         std::span<const std::size_t> indices,
                                         const TrainConfig& config);

Matrix logits_for(const DenseNet& net, const Matrix& batch);
int predict_class(const DenseNet& net, std::span<const double> features);

}  // namespace pateforge::nn

#endif  // PATEFORGE_NN_HPP_
