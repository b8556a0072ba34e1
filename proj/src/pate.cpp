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

#include "pateforge/pate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

namespace pateforge::pate {
namespace {

int argmax_lowest_tie(std::span<const double> values) {
  int best = 0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(j);
    }
  }
  return best;
}

// Sum-reduction (not mean) real/fake BCE; gradients are with respect to the
// teacher's sigmoid outputs.
DiscriminatorLossGrads discriminator_loss_impl(const nn::DenseNet& teacher,
                                               const Matrix& real_latents,
                                               const Matrix& fake_latents,
                                               bool want_grads) {
  if (teacher.output_dim() != 1) {
    throw std::invalid_argument(
        "teacher_discriminator_loss: teacher must have a single output");
  }
  DiscriminatorLossGrads result;
  const nn::ForwardCache real_cache = nn::forward(teacher, real_latents);
  const nn::ForwardCache fake_cache = nn::forward(teacher, fake_latents);
  Matrix real_grad(real_latents.rows, 1);
  Matrix fake_grad(fake_latents.rows, 1);
  for (std::size_t i = 0; i < real_latents.rows; ++i) {
    const nn::ScalarLossResult term =
        nn::binary_cross_entropy(real_cache.output()(i, 0), 1.0);
    result.loss += term.loss;
    real_grad(i, 0) = term.gradient;
  }
  for (std::size_t i = 0; i < fake_latents.rows; ++i) {
    const nn::ScalarLossResult term =
        nn::binary_cross_entropy(fake_cache.output()(i, 0), 0.0);
    result.loss += term.loss;
    fake_grad(i, 0) = term.gradient;
  }
  if (want_grads) {
    result.grads = nn::backward(teacher, real_cache, real_grad);
    const nn::Gradients fake_grads =
        nn::backward(teacher, fake_cache, fake_grad);
    nn::accumulate(result.grads, fake_grads);
  }
  return result;
}

void train_discriminator_teacher(nn::DenseNet& net,
                                 const data::Dataset& dataset,
                                 std::span<const std::size_t> indices,
                                 const nn::TrainConfig& config) {
  std::vector<std::size_t> real_indices, fake_indices;
  for (std::size_t index : indices) {
    (dataset.samples[index].label == 1 ? real_indices : fake_indices)
        .push_back(index);
  }
  if (real_indices.empty() || fake_indices.empty()) {
    throw std::invalid_argument(
        "discriminator teacher: subset needs both real (1) and fake (0) "
        "samples");
  }
  auto gather = [&](std::span<const std::size_t> rows) {
    Matrix m(rows.size(), dataset.feature_dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t k = 0; k < dataset.feature_dim; ++k) {
        m(i, k) = dataset.samples[rows[i]].features[k];
      }
    }
    return m;
  };
  const Matrix real = gather(real_indices);
  const Matrix fake = gather(fake_indices);
  nn::Optimizer optimizer(config.optimizer, net);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const DiscriminatorLossGrads step =
        teacher_discriminator_loss_with_grads(net, real, fake);
    optimizer.step(net, step.grads);
  }
}

}  // namespace

int VoteHistogram::total() const {
  int sum = 0;
  for (int c : counts) sum += c;
  return sum;
}

TeacherEnsemble train_teachers(const data::Partition& partition,
                               const data::Dataset& dataset,
                               const std::vector<nn::LayerSpec>& net_spec,
                               const TeacherTrainConfig& config) {
  if (partition.subsets.empty()) {
    throw std::invalid_argument("train_teachers: empty partition");
  }
  for (const auto& subset : partition.subsets) {
    if (subset.empty()) {
      throw std::invalid_argument("train_teachers: empty subset");
    }
  }
  if (config.objective == TeacherObjective::kRealFakeDiscriminator) {
    if (net_spec.back().output_dim != 1) {
      throw std::invalid_argument(
          "train_teachers: discriminator objective needs 1-output teachers");
    }
    if (dataset.num_classes != 2) {
      throw std::invalid_argument(
          "train_teachers: discriminator objective needs binary labels");
    }
  }

  TeacherEnsemble ensemble;
  ensemble.feature_dim = dataset.feature_dim;
  ensemble.num_classes = dataset.num_classes;
  ensemble.teachers.resize(partition.subsets.size());

  const auto count = static_cast<std::ptrdiff_t>(partition.subsets.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const auto index = static_cast<std::size_t>(i);
      nn::TrainConfig teacher_config = config.base;
      teacher_config.seed =
          hash_seed(config.base.seed, "teacher", static_cast<std::uint64_t>(i));
      nn::DenseNet net = nn::init_net(net_spec, teacher_config.seed);
      if (config.objective == TeacherObjective::kSoftmaxCrossEntropy) {
        nn::train_classifier(net, dataset, partition.subsets[index],
                             teacher_config);
      } else {
        train_discriminator_teacher(net, dataset, partition.subsets[index],
                                    teacher_config);
      }
      ensemble.teachers[index] = std::move(net);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return ensemble;
}

double teacher_discriminator_loss(const nn::DenseNet& teacher,
                                  const Matrix& real_latents,
                                  const Matrix& fake_latents) {
  return discriminator_loss_impl(teacher, real_latents, fake_latents, false)
      .loss;
}

DiscriminatorLossGrads teacher_discriminator_loss_with_grads(
    const nn::DenseNet& teacher, const Matrix& real_latents,
    const Matrix& fake_latents) {
  return discriminator_loss_impl(teacher, real_latents, fake_latents, true);
}

VoteHistogram count_votes(const TeacherEnsemble& ensemble,
                          std::span<const double> features) {
  Matrix batch(1, features.size());
  for (std::size_t k = 0; k < features.size(); ++k) batch(0, k) = features[k];
  return count_votes_batch(ensemble, batch).front();
}

std::vector<VoteHistogram> count_votes_batch(const TeacherEnsemble& ensemble,
                                             const Matrix& batch) {
  if (ensemble.teachers.empty()) {
    throw std::invalid_argument("count_votes: empty ensemble");
  }
  if (batch.cols != ensemble.feature_dim) {
    throw std::invalid_argument("count_votes: feature dim mismatch");
  }
  std::vector<VoteHistogram> histograms(batch.rows);
  for (VoteHistogram& h : histograms) {
    h.counts.assign(static_cast<std::size_t>(ensemble.num_classes), 0);
  }
  for (const nn::DenseNet& teacher : ensemble.teachers) {
    const Matrix logits = nn::logits_for(teacher, batch);
    for (std::size_t i = 0; i < batch.rows; ++i) {
      const int vote = argmax_lowest_tie(logits.row(i));
      ++histograms[i].counts[static_cast<std::size_t>(vote)];
    }
  }
  return histograms;
}

double sample_laplace(double scale_b, Rng& rng) {
  if (scale_b < 0.0) {
    throw std::invalid_argument("sample_laplace: scale must be >= 0");
  }
  const double u = rng.uniform_signed();
  if (scale_b == 0.0) return 0.0;
  const double sign = u < 0.0 ? -1.0 : 1.0;
  return -scale_b * sign * std::log(1.0 - 2.0 * std::abs(u));
}

nlohmann::json LabelingLog::to_json() const {
  return {{"K", queries}, {"scale_b", scale_b}, {"seed", seed}};
}

NoisyLabel noisy_argmax(const VoteHistogram& histogram, double scale_b,
                        Rng& rng, LabelingLog& log) {
  if (histogram.counts.empty()) {
    throw std::invalid_argument("noisy_argmax: empty histogram");
  }
  if (scale_b < 0.0) {
    throw std::invalid_argument("noisy_argmax: scale must be >= 0");
  }
  NoisyLabel result;
  result.noisy_scores.resize(histogram.counts.size());
  for (std::size_t j = 0; j < histogram.counts.size(); ++j) {
    result.noisy_scores[j] =
        static_cast<double>(histogram.counts[j]) + sample_laplace(scale_b, rng);
  }
  result.label = argmax_lowest_tie(result.noisy_scores);
  ++log.queries;
  return result;
}

LabeledSyntheticSet label_synthetic_set(const TeacherEnsemble& ensemble,
                                        const Matrix& synthetic_samples,
                                        double scale_b, std::uint64_t seed) {
  LabeledSyntheticSet out;
  out.log.scale_b = scale_b;
  out.log.seed = seed;
  out.dataset.num_classes = ensemble.num_classes;
  out.dataset.feature_dim = ensemble.feature_dim;
  const std::vector<VoteHistogram> histograms =
      count_votes_batch(ensemble, synthetic_samples);
  Rng rng(seed);
  for (std::size_t i = 0; i < synthetic_samples.rows; ++i) {
    const NoisyLabel noisy = noisy_argmax(histograms[i], scale_b, rng, out.log);
    data::LabeledSample sample;
    sample.label = noisy.label;
    const auto row = synthetic_samples.row(i);
    sample.features.assign(row.begin(), row.end());
    out.dataset.samples.push_back(std::move(sample));
  }
  return out;
}

nn::DenseNet train_student(const LabeledSyntheticSet& labeled,
                           const std::vector<nn::LayerSpec>& net_spec,
                           const nn::TrainConfig& config) {
  if (labeled.dataset.size() == 0) {
    throw std::invalid_argument("train_student: empty labeled set");
  }
  for (const data::LabeledSample& sample : labeled.dataset.samples) {
    if (sample.label < 0 || sample.label >= labeled.dataset.num_classes) {
      throw std::invalid_argument("train_student: label out of range");
    }
  }
  nn::DenseNet net = nn::init_net(net_spec, config.seed);
  nn::train_classifier(net, labeled.dataset, {}, config);
  return net;
}

std::vector<std::uint64_t> noisy_argmax_outcome_counts(
    const VoteHistogram& histogram, double scale_b, std::size_t trials,
    std::uint64_t seed) {
  constexpr std::size_t kChunks = 64;
  const std::size_t classes = histogram.counts.size();
  std::vector<std::vector<std::uint64_t>> chunk_counts(
      kChunks, std::vector<std::uint64_t>(classes, 0));
  const auto chunks = static_cast<std::ptrdiff_t>(kChunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t chunk = 0; chunk < chunks; ++chunk) {
    const auto c = static_cast<std::size_t>(chunk);
    const std::size_t begin = trials * c / kChunks;
    const std::size_t end = trials * (c + 1) / kChunks;
    Rng rng(hash_seed(seed, "mc-chunk", c));
    LabelingLog log;
    for (std::size_t t = begin; t < end; ++t) {
      const NoisyLabel outcome = noisy_argmax(histogram, scale_b, rng, log);
      ++chunk_counts[c][static_cast<std::size_t>(outcome.label)];
    }
  }
  std::vector<std::uint64_t> counts(classes, 0);
  for (const auto& chunk : chunk_counts) {
    for (std::size_t j = 0; j < classes; ++j) counts[j] += chunk[j];
  }
  return counts;
}

nlohmann::json ensemble_to_json(const TeacherEnsemble& ensemble) {
  nlohmann::json j;
  j["feature_dim"] = ensemble.feature_dim;
  j["num_classes"] = ensemble.num_classes;
  nlohmann::json teachers = nlohmann::json::array();
  for (const nn::DenseNet& net : ensemble.teachers) {
    teachers.push_back(nn::net_to_json(net));
  }
  j["teachers"] = std::move(teachers);
  return j;
}

TeacherEnsemble ensemble_from_json(const nlohmann::json& j) {
  TeacherEnsemble ensemble;
  ensemble.feature_dim = j.at("feature_dim").get<std::size_t>();
  ensemble.num_classes = j.at("num_classes").get<int>();
  for (const nlohmann::json& entry : j.at("teachers")) {
    ensemble.teachers.push_back(nn::net_from_json(entry));
  }
  if (ensemble.teachers.empty()) {
    throw std::invalid_argument("ensemble: no teachers");
  }
  return ensemble;
}

}  // namespace pateforge::pate
