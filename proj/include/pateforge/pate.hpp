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

#ifndef PATEFORGE_PATE_HPP_
#define PATEFORGE_PATE_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pateforge/data.hpp"
#include "pateforge/matrix.hpp"
#include "pateforge/nn.hpp"
#include "pateforge/rng.hpp"

namespace pateforge::pate {

// Private aggregation of teacher ensembles: teachers train on disjoint
// shards, vote on each query point, and only the Laplace-noised argmax of
// the vote histogram is released. noisy_argmax is the single
// Laplace-consuming entry point, so the labeling log's query count is the
// exact number of noisy queries issued.

struct TeacherEnsemble {
  std::vector<nn::DenseNet> teachers;
  std::size_t feature_dim = 0;
  int num_classes = 0;

  std::size_t size() const { return teachers.size(); }
};

enum class TeacherObjective { kSoftmaxCrossEntropy, kRealFakeDiscriminator };

struct TeacherTrainConfig {
  nn::TrainConfig base;
  TeacherObjective objective = TeacherObjective::kSoftmaxCrossEntropy;
};

// Teacher i trains only on partition subset i; per-teacher seeds derive
// from the config seed, so teachers are independent and the ensemble is
// reproducible regardless of scheduling. Teachers train concurrently.
TeacherEnsemble train_teachers(const data::Partition& partition,
                               const data::Dataset& dataset,
                               const std::vector<nn::LayerSpec>& net_spec,
                               const TeacherTrainConfig& config);

// Binary real/fake objective for 1-output sigmoid teachers:
// loss = -(sum_real log T(z) + sum_fake log(1 - T(z'))). Sums, not means.
double teacher_discriminator_loss(const nn::DenseNet& teacher,
                                  const Matrix& real_latents,
                                  const Matrix& fake_latents);

struct DiscriminatorLossGrads {
  double loss = 0.0;
  nn::Gradients grads;
};

DiscriminatorLossGrads teacher_discriminator_loss_with_grads(
    const nn::DenseNet& teacher, const Matrix& real_latents,
    const Matrix& fake_latents);

struct VoteHistogram {
  std::vector<int> counts;

  int total() const;
};

// counts[j] = number of teachers whose argmax prediction is j; teacher
// argmax ties break toward the lowest class index.
VoteHistogram count_votes(const TeacherEnsemble& ensemble,
                          std::span<const double> features);
std::vector<VoteHistogram> count_votes_batch(const TeacherEnsemble& ensemble,
                                             const Matrix& batch);

// Inverse-CDF Laplace draw with location 0 and the given scale;
// scale 0 returns exactly 0.
double sample_laplace(double scale_b, Rng& rng);

struct LabelingLog {
  std::uint64_t queries = 0;  // K: noisy_argmax calls made through this log
  double scale_b = 0.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

struct NoisyLabel {
  int label = 0;
  // Perturbed scores, kept for diagnostics only; the labeling pipeline
  // never exports them.
  std::vector<double> noisy_scores;
};

// argmax_j(counts[j] + Lap(scale_b)); post-noise ties break toward the
// lowest index. Increments log.queries by exactly one.
NoisyLabel noisy_argmax(const VoteHistogram& histogram, double scale_b,
                        Rng& rng, LabelingLog& log);

// Labeled synthetic data plus its accounting log. Distinct from a plain
// Dataset so the student-training interface cannot take sensitive data.
struct LabeledSyntheticSet {
  data::Dataset dataset;
  LabelingLog log;
};

// One noisy_argmax query per row of synthetic samples.
LabeledSyntheticSet label_synthetic_set(const TeacherEnsemble& ensemble,
                                        const Matrix& synthetic_samples,
                                        double scale_b, std::uint64_t seed);

// Multiclass cross-entropy student trained only on teacher-labeled
// synthetic data; the interface cannot receive the sensitive dataset.
nn::DenseNet train_student(const LabeledSyntheticSet& labeled,
                           const std::vector<nn::LayerSpec>& net_spec,
                           const nn::TrainConfig& config);

// Monte Carlo outcome frequencies of the noisy-argmax mechanism, used by
// the empirical differential-privacy checks. Chunked so trials run in
// parallel with a deterministic result.
std::vector<std::uint64_t> noisy_argmax_outcome_counts(
    const VoteHistogram& histogram, double scale_b, std::size_t trials,
    std::uint64_t seed);

nlohmann::json ensemble_to_json(const TeacherEnsemble& ensemble);
TeacherEnsemble ensemble_from_json(const nlohmann::json& j);

}  // namespace pateforge::pate

#endif  // PATEFORGE_PATE_HPP_
