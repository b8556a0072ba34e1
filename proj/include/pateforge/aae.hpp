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

#ifndef PATEFORGE_AAE_HPP_
#define PATEFORGE_AAE_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pateforge/data.hpp"
#include "pateforge/matrix.hpp"
#include "pateforge/nn.hpp"
#include "pateforge/rng.hpp"

namespace pateforge::aae {

// Adversarial autoencoder: a Gaussian-reparameterized encoder, a decoder
// that doubles as the generator, and a latent discriminator that pushes the
// aggregate posterior toward the standard-normal prior. Training runs three
// phases per batch: reconstruction, discriminator, adversarial encoder.

struct AaeModel {
  nn::DenseNet encoder_trunk;       // d -> hidden
  nn::DenseNet mu_head;             // hidden -> latent, linear
  nn::DenseNet log_sigma_head;      // hidden -> latent, linear
  nn::DenseNet decoder;             // latent -> d
  nn::DenseNet discriminator;       // latent -> 1, sigmoid output
  std::size_t latent_dim = 0;
  double log_sigma_min = -6.0;
  double log_sigma_max = 2.0;

  std::size_t feature_dim() const { return encoder_trunk.input_dim(); }
};

struct AaeSpec {
  std::size_t feature_dim = 0;
  std::size_t latent_dim = 16;
  std::vector<std::size_t> trunk_hidden{64};
  std::vector<std::size_t> decoder_hidden{64};
  std::vector<std::size_t> discriminator_hidden{32};
  double log_sigma_min = -6.0;
  double log_sigma_max = 2.0;
};

AaeModel init_aae(const AaeSpec& spec, std::uint64_t seed);

struct AaeTrainConfig {
  double reconstruction_lr = 2e-3;
  double discriminator_lr = 1e-3;
  double adversarial_lr = 5e-4;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
};

// mu and the clamped log_sigma for a batch, one row per sample.
struct EncodeResult {
  Matrix mu;
  Matrix log_sigma;
};

EncodeResult encode(const AaeModel& model, const Matrix& batch);

// z = mu + exp(log_sigma) * eta, elementwise.
Matrix reparameterize(const Matrix& mu, const Matrix& log_sigma,
                      const Matrix& eta);

// KL(N(mu, diag sigma^2) || N(0, I)) = sum_i 0.5*(mu_i^2 + sigma_i^2 - 1
// - 2*log sigma_i). Always >= 0; monitored during training, never optimized.
double kl_to_standard_normal(std::span<const double> mu,
                             std::span<const double> log_sigma);
double kl_to_standard_normal_batch_mean(const Matrix& mu,
                                        const Matrix& log_sigma);

struct EpochMetrics {
  double reconstruction = 0.0;
  double discriminator = 0.0;
  double adversarial = 0.0;
  double kl = 0.0;
};

// Loss evaluations with analytic gradients, taking the noise draws as
// explicit arguments; the trainer feeds them from its RNG stream and the
// gradient checks feed fixed draws.

struct EncoderGrads {
  nn::Gradients trunk;
  nn::Gradients mu;
  nn::Gradients sigma;
};

struct ReconstructionEval {
  double loss = 0.0;
  double kl = 0.0;  // monitored closed form, not optimized
  EncoderGrads encoder;
  nn::Gradients decoder;
};

ReconstructionEval reconstruction_loss(const AaeModel& model,
                                       const Matrix& batch, const Matrix& eta);

struct DiscriminatorEval {
  double loss = 0.0;  // per sample pair
  nn::Gradients discriminator;
};

DiscriminatorEval discriminator_loss(const AaeModel& model, const Matrix& batch,
                                     const Matrix& eta_real,
                                     const Matrix& eta_fake);

struct AdversarialEval {
  double loss = 0.0;
  EncoderGrads encoder;
};

AdversarialEval adversarial_loss(const AaeModel& model, const Matrix& batch,
                                 const Matrix& eta);

// Owns the model plus per-phase optimizer states. Each phase updates
// exactly its declared parameter subset and nothing else.
class AaeTrainer {
 public:
  AaeTrainer(AaeModel model, const AaeTrainConfig& config);

  // Updates encoder (trunk + heads) and decoder on the squared
  // reconstruction error; returns the batch loss and the monitored KL.
  std::pair<double, double> reconstruction_step(const Matrix& batch, Rng& rng);

  // BCE on D(eta) -> 1 and D(z') -> 0 with the gradient stopped at z';
  // updates only the discriminator. The returned loss is per sample pair.
  double discriminator_step(const Matrix& batch, Rng& rng);

  // Non-saturating generator objective -log D(z'); updates encoder
  // parameters only.
  double adversarial_step(const Matrix& batch, Rng& rng);

  const AaeModel& model() const { return model_; }
  AaeModel take_model() { return std::move(model_); }

 private:
  AaeModel model_;
  AaeTrainConfig config_;
  nn::Optimizer recon_trunk_, recon_mu_, recon_sigma_, recon_decoder_;
  nn::Optimizer disc_;
  nn::Optimizer adv_trunk_, adv_mu_, adv_sigma_;
};

// Three-phase training over the dataset; per-batch phase order is
// reconstruction, discriminator, adversarial encoder. Deterministic in
// (dataset, config, seed). epochs = 0 returns the model unchanged.
std::pair<AaeModel, std::vector<EpochMetrics>> train(
    AaeModel model, const data::Dataset& dataset, const AaeTrainConfig& config);

// Decoder images of standard-normal latent draws, one row per sample.
Matrix synthesize(const AaeModel& model, std::size_t count, Rng& rng);

nlohmann::json aae_to_json(const AaeModel& model);
AaeModel aae_from_json(const nlohmann::json& j);

}  // namespace pateforge::aae

#endif  // PATEFORGE_AAE_HPP_
