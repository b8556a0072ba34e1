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

#include "pateforge/aae.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pateforge::aae {
namespace {

constexpr double kProbClamp = 1e-7;

Matrix standard_normals(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.normal();
  return m;
}

std::vector<nn::LayerSpec> stack_specs(std::size_t input,
                                       const std::vector<std::size_t>& hidden,
                                       std::size_t output,
                                       nn::Activation hidden_activation,
                                       nn::Activation output_activation) {
  std::vector<nn::LayerSpec> specs;
  std::size_t in = input;
  for (std::size_t h : hidden) {
    specs.push_back({in, h, hidden_activation});
    in = h;
  }
  specs.push_back({in, output, output_activation});
  return specs;
}

struct EncodeCache {
  nn::ForwardCache trunk;
  nn::ForwardCache mu;
  nn::ForwardCache sigma;
  Matrix log_sigma;   // clamped
  Matrix clamp_mask;  // 1 where the raw value was inside the clamp range
};

EncodeCache encode_cache(const AaeModel& model, const Matrix& batch) {
  EncodeCache cache;
  cache.trunk = nn::forward(model.encoder_trunk, batch);
  cache.mu = nn::forward(model.mu_head, cache.trunk.output());
  cache.sigma = nn::forward(model.log_sigma_head, cache.trunk.output());
  const Matrix& raw = cache.sigma.output();
  cache.log_sigma = Matrix(raw.rows, raw.cols);
  cache.clamp_mask = Matrix(raw.rows, raw.cols);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw.data[i];
    cache.log_sigma.data[i] =
        std::clamp(v, model.log_sigma_min, model.log_sigma_max);
    cache.clamp_mask.data[i] =
        (v >= model.log_sigma_min && v <= model.log_sigma_max) ? 1.0 : 0.0;
  }
  return cache;
}

// dLoss/dz flowing into the reparameterized sample splits into a mu part
// (identity) and a log_sigma part (eta * sigma, masked by the clamp).
Matrix log_sigma_gradient(const Matrix& dz, const Matrix& eta,
                          const EncodeCache& cache) {
  Matrix dls(dz.rows, dz.cols);
  for (std::size_t i = 0; i < dz.size(); ++i) {
    dls.data[i] = dz.data[i] * eta.data[i] *
                  std::exp(cache.log_sigma.data[i]) * cache.clamp_mask.data[i];
  }
  return dls;
}

EncoderGrads encoder_backward(const AaeModel& model, const EncodeCache& cache,
                              const Matrix& dmu, const Matrix& dls) {
  EncoderGrads grads;
  grads.mu = nn::backward(model.mu_head, cache.mu, dmu);
  grads.sigma = nn::backward(model.log_sigma_head, cache.sigma, dls);
  Matrix dh = grads.mu.input;
  for (std::size_t i = 0; i < dh.size(); ++i) {
    dh.data[i] += grads.sigma.input.data[i];
  }
  grads.trunk = nn::backward(model.encoder_trunk, cache.trunk, dh);
  return grads;
}

}  // namespace

AaeModel init_aae(const AaeSpec& spec, std::uint64_t seed) {
  if (spec.latent_dim == 0) {
    throw std::invalid_argument("aae: latent_dim must be >= 1");
  }
  if (spec.feature_dim == 0) {
    throw std::invalid_argument("aae: feature_dim must be >= 1");
  }
  if (spec.trunk_hidden.empty()) {
    throw std::invalid_argument("aae: encoder trunk needs a hidden layer");
  }
  if (!(spec.log_sigma_min < spec.log_sigma_max)) {
    throw std::invalid_argument("aae: log_sigma clamp range is empty");
  }
  AaeModel model;
  model.latent_dim = spec.latent_dim;
  model.log_sigma_min = spec.log_sigma_min;
  model.log_sigma_max = spec.log_sigma_max;

  std::vector<nn::LayerSpec> trunk_specs;
  std::size_t in = spec.feature_dim;
  for (std::size_t h : spec.trunk_hidden) {
    trunk_specs.push_back({in, h, nn::Activation::kTanh});
    in = h;
  }
  model.encoder_trunk = nn::init_net(trunk_specs, hash_seed(seed, "aae-trunk", 0));
  model.mu_head = nn::init_net({{in, spec.latent_dim, nn::Activation::kIdentity}},
                               hash_seed(seed, "aae-mu", 0));
  model.log_sigma_head =
      nn::init_net({{in, spec.latent_dim, nn::Activation::kIdentity}},
                   hash_seed(seed, "aae-log-sigma", 0));
  model.decoder = nn::init_net(
      stack_specs(spec.latent_dim, spec.decoder_hidden, spec.feature_dim,
                  nn::Activation::kTanh, nn::Activation::kIdentity),
      hash_seed(seed, "aae-decoder", 0));
  model.discriminator = nn::init_net(
      stack_specs(spec.latent_dim, spec.discriminator_hidden, 1,
                  nn::Activation::kTanh, nn::Activation::kSigmoid),
      hash_seed(seed, "aae-discriminator", 0));
  return model;
}

EncodeResult encode(const AaeModel& model, const Matrix& batch) {
  EncodeCache cache = encode_cache(model, batch);
  return {cache.mu.output(), std::move(cache.log_sigma)};
}

Matrix reparameterize(const Matrix& mu, const Matrix& log_sigma,
                      const Matrix& eta) {
  if (!same_shape(mu, log_sigma) || !same_shape(mu, eta)) {
    throw std::invalid_argument("reparameterize: shape mismatch");
  }
  Matrix z(mu.rows, mu.cols);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z.data[i] = mu.data[i] + std::exp(log_sigma.data[i]) * eta.data[i];
  }
  return z;
}

double kl_to_standard_normal(std::span<const double> mu,
                             std::span<const double> log_sigma) {
  if (mu.size() != log_sigma.size()) {
    throw std::invalid_argument("kl: dim mismatch");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double sigma_sq = std::exp(2.0 * log_sigma[i]);
    kl += 0.5 * (mu[i] * mu[i] + sigma_sq - 1.0 - 2.0 * log_sigma[i]);
  }
  return kl;
}

double kl_to_standard_normal_batch_mean(const Matrix& mu,
                                        const Matrix& log_sigma) {
  double total = 0.0;
  for (std::size_t i = 0; i < mu.rows; ++i) {
    total += kl_to_standard_normal(mu.row(i), log_sigma.row(i));
  }
  return total / static_cast<double>(mu.rows);
}

AaeTrainer::AaeTrainer(AaeModel model, const AaeTrainConfig& config)
    : model_(std::move(model)),
      config_(config),
      recon_trunk_({nn::OptimizerKind::kAdam, config.reconstruction_lr},
                   model_.encoder_trunk),
      recon_mu_({nn::OptimizerKind::kAdam, config.reconstruction_lr},
                model_.mu_head),
      recon_sigma_({nn::OptimizerKind::kAdam, config.reconstruction_lr},
                   model_.log_sigma_head),
      recon_decoder_({nn::OptimizerKind::kAdam, config.reconstruction_lr},
                     model_.decoder),
      disc_({nn::OptimizerKind::kAdam, config.discriminator_lr},
            model_.discriminator),
      adv_trunk_({nn::OptimizerKind::kAdam, config.adversarial_lr},
                 model_.encoder_trunk),
      adv_mu_({nn::OptimizerKind::kAdam, config.adversarial_lr},
              model_.mu_head),
      adv_sigma_({nn::OptimizerKind::kAdam, config.adversarial_lr},
                 model_.log_sigma_head) {}

ReconstructionEval reconstruction_loss(const AaeModel& model,
                                       const Matrix& batch, const Matrix& eta) {
  ReconstructionEval eval;
  const EncodeCache cache = encode_cache(model, batch);
  const Matrix z = reparameterize(cache.mu.output(), cache.log_sigma, eta);
  const nn::ForwardCache decoded = nn::forward(model.decoder, z);
  const nn::BatchLossResult loss =
      nn::gaussian_reconstruction_batch(batch, decoded.output());
  eval.loss = loss.loss;
  eval.kl = kl_to_standard_normal_batch_mean(cache.mu.output(), cache.log_sigma);
  eval.decoder = nn::backward(model.decoder, decoded, loss.gradient);
  const Matrix dls = log_sigma_gradient(eval.decoder.input, eta, cache);
  eval.encoder = encoder_backward(model, cache, eval.decoder.input, dls);
  return eval;
}

DiscriminatorEval discriminator_loss(const AaeModel& model, const Matrix& batch,
                                     const Matrix& eta_real,
                                     const Matrix& eta_fake) {
  DiscriminatorEval eval;
  const EncodeCache cache = encode_cache(model, batch);
  const Matrix fake = reparameterize(cache.mu.output(), cache.log_sigma, eta_fake);

  const nn::ForwardCache real_cache = nn::forward(model.discriminator, eta_real);
  const nn::ForwardCache fake_cache = nn::forward(model.discriminator, fake);
  const double scale = 1.0 / static_cast<double>(batch.rows);
  Matrix real_grad(batch.rows, 1);
  Matrix fake_grad(batch.rows, 1);
  for (std::size_t i = 0; i < batch.rows; ++i) {
    const nn::ScalarLossResult real_loss =
        nn::binary_cross_entropy(real_cache.output()(i, 0), 1.0);
    const nn::ScalarLossResult fake_loss =
        nn::binary_cross_entropy(fake_cache.output()(i, 0), 0.0);
    eval.loss += (real_loss.loss + fake_loss.loss) * scale;
    real_grad(i, 0) = real_loss.gradient * scale;
    fake_grad(i, 0) = fake_loss.gradient * scale;
  }
  eval.discriminator = nn::backward(model.discriminator, real_cache, real_grad);
  const nn::Gradients fake_grads =
      nn::backward(model.discriminator, fake_cache, fake_grad);
  nn::accumulate(eval.discriminator, fake_grads);
  return eval;
}

AdversarialEval adversarial_loss(const AaeModel& model, const Matrix& batch,
                                 const Matrix& eta) {
  AdversarialEval eval;
  const EncodeCache cache = encode_cache(model, batch);
  const Matrix z = reparameterize(cache.mu.output(), cache.log_sigma, eta);
  const nn::ForwardCache disc_cache = nn::forward(model.discriminator, z);

  const double scale = 1.0 / static_cast<double>(batch.rows);
  Matrix dprob(batch.rows, 1);
  for (std::size_t i = 0; i < batch.rows; ++i) {
    const double p =
        std::clamp(disc_cache.output()(i, 0), kProbClamp, 1.0 - kProbClamp);
    eval.loss += -std::log(p) * scale;
    dprob(i, 0) = -scale / p;
  }
  const nn::Gradients disc_grads =
      nn::backward(model.discriminator, disc_cache, dprob);
  const Matrix dls = log_sigma_gradient(disc_grads.input, eta, cache);
  eval.encoder = encoder_backward(model, cache, disc_grads.input, dls);
  return eval;
}

std::pair<double, double> AaeTrainer::reconstruction_step(const Matrix& batch,
                                                          Rng& rng) {
  const Matrix eta = standard_normals(batch.rows, model_.latent_dim, rng);
  const ReconstructionEval eval = reconstruction_loss(model_, batch, eta);
  recon_decoder_.step(model_.decoder, eval.decoder);
  recon_trunk_.step(model_.encoder_trunk, eval.encoder.trunk);
  recon_mu_.step(model_.mu_head, eval.encoder.mu);
  recon_sigma_.step(model_.log_sigma_head, eval.encoder.sigma);
  return {eval.loss, eval.kl};
}

double AaeTrainer::discriminator_step(const Matrix& batch, Rng& rng) {
  const Matrix real = standard_normals(batch.rows, model_.latent_dim, rng);
  const Matrix eta = standard_normals(batch.rows, model_.latent_dim, rng);
  const DiscriminatorEval eval = discriminator_loss(model_, batch, real, eta);
  disc_.step(model_.discriminator, eval.discriminator);
  return eval.loss;
}

double AaeTrainer::adversarial_step(const Matrix& batch, Rng& rng) {
  const Matrix eta = standard_normals(batch.rows, model_.latent_dim, rng);
  const AdversarialEval eval = adversarial_loss(model_, batch, eta);
  adv_trunk_.step(model_.encoder_trunk, eval.encoder.trunk);
  adv_mu_.step(model_.mu_head, eval.encoder.mu);
  adv_sigma_.step(model_.log_sigma_head, eval.encoder.sigma);
  return eval.loss;
}

std::pair<AaeModel, std::vector<EpochMetrics>> train(
    AaeModel model, const data::Dataset& dataset,
    const AaeTrainConfig& config) {
  if (dataset.size() == 0) throw std::invalid_argument("aae train: empty dataset");
  if (config.batch_size == 0) {
    throw std::invalid_argument("aae train: batch_size must be >= 1");
  }
  if (model.feature_dim() != dataset.feature_dim) {
    throw std::invalid_argument("aae train: feature dim mismatch");
  }
  AaeTrainer trainer(std::move(model), config);
  Rng noise_rng(hash_seed(config.seed, "aae-noise", 0));
  Rng shuffle_rng(hash_seed(config.seed, "aae-shuffle", 0));
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<EpochMetrics> metrics;
  metrics.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle_rng.uniform() *
                                              static_cast<double>(i));
      std::swap(order[i - 1], order[j]);
    }
    EpochMetrics epoch_metrics;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t count =
          std::min(config.batch_size, order.size() - start);
      Matrix batch(count, dataset.feature_dim);
      for (std::size_t i = 0; i < count; ++i) {
        const data::LabeledSample& sample = dataset.samples[order[start + i]];
        for (std::size_t k = 0; k < dataset.feature_dim; ++k) {
          batch(i, k) = sample.features[k];
        }
      }
      const auto [recon, kl] = trainer.reconstruction_step(batch, noise_rng);
      epoch_metrics.reconstruction += recon;
      epoch_metrics.kl += kl;
      epoch_metrics.discriminator += trainer.discriminator_step(batch, noise_rng);
      epoch_metrics.adversarial += trainer.adversarial_step(batch, noise_rng);
      ++batches;
    }
    const double scale = 1.0 / static_cast<double>(batches);
    epoch_metrics.reconstruction *= scale;
    epoch_metrics.discriminator *= scale;
    epoch_metrics.adversarial *= scale;
    epoch_metrics.kl *= scale;
    metrics.push_back(epoch_metrics);
  }
  return {trainer.take_model(), std::move(metrics)};
}

Matrix synthesize(const AaeModel& model, std::size_t count, Rng& rng) {
  if (count == 0) return Matrix(0, model.feature_dim());
  const Matrix eta = standard_normals(count, model.latent_dim, rng);
  return nn::forward(model.decoder, eta).output();
}

nlohmann::json aae_to_json(const AaeModel& model) {
  nlohmann::json j;
  j["latent_dim"] = model.latent_dim;
  j["log_sigma_min"] = model.log_sigma_min;
  j["log_sigma_max"] = model.log_sigma_max;
  j["encoder_trunk"] = nn::net_to_json(model.encoder_trunk);
  j["mu_head"] = nn::net_to_json(model.mu_head);
  j["log_sigma_head"] = nn::net_to_json(model.log_sigma_head);
  j["decoder"] = nn::net_to_json(model.decoder);
  j["discriminator"] = nn::net_to_json(model.discriminator);
  return j;
}

AaeModel aae_from_json(const nlohmann::json& j) {
  AaeModel model;
  model.latent_dim = j.at("latent_dim").get<std::size_t>();
  model.log_sigma_min = j.at("log_sigma_min").get<double>();
  model.log_sigma_max = j.at("log_sigma_max").get<double>();
  model.encoder_trunk = nn::net_from_json(j.at("encoder_trunk"));
  model.mu_head = nn::net_from_json(j.at("mu_head"));
  model.log_sigma_head = nn::net_from_json(j.at("log_sigma_head"));
  model.decoder = nn::net_from_json(j.at("decoder"));
  model.discriminator = nn::net_from_json(j.at("discriminator"));
  return model;
}

}  // namespace pateforge::aae
