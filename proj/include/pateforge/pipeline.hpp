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

#ifndef PATEFORGE_PIPELINE_HPP_
#define PATEFORGE_PIPELINE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pateforge/accountant.hpp"
#include "pateforge/data.hpp"
#include "pateforge/errors.hpp"
#include "pateforge/pate.hpp"
#include "pateforge/signal.hpp"

namespace pateforge::pipeline {

// Orchestrates the full pipeline from one JSON config: data generation or
// ingestion, AAE training, teacher training, synthesis, noisy labeling,
// student training, evaluation, and the budget report. Stages read and
// write only their declared artifacts; every artifact is stamped with the
// config digest and master seed, and cross-stage mismatches are hard
// errors.

enum class DataSource { kToy, kCsv, kWaveformDir };

struct WaveformSourceConfig {
  std::string directory;
  double sample_rate = 16000.0;
  signal::SpectrogramConfig spectrogram;
  signal::FeatureKind feature_kind = signal::FeatureKind::kMfcc;
};

struct ClassifierConfig {
  std::vector<std::size_t> hidden{32};
  nn::OptimizerKind optimizer = nn::OptimizerKind::kAdam;
  double learning_rate = 5e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
};

struct AaeConfig {
  std::size_t latent_dim = 16;
  std::vector<std::size_t> trunk_hidden{64};
  std::vector<std::size_t> decoder_hidden{64};
  std::vector<std::size_t> discriminator_hidden{32};
  double reconstruction_lr = 2e-3;
  double discriminator_lr = 1e-3;
  double adversarial_lr = 5e-4;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  double log_sigma_min = -6.0;
  double log_sigma_max = 2.0;
};

struct PrivacyConfig {
  std::vector<double> epsilon_targets{0.01, 0.1, 1.0, 10.0, 100.0};
  double delta = 1e-5;
  privacy::Convention convention = privacy::Convention::kStrict;
  std::uint64_t query_budget = 0;  // 0 means synthetic_count
};

struct ExperimentConfig {
  DataSource source = DataSource::kToy;
  data::ToyDatasetConfig toy;
  std::string csv_path;
  WaveformSourceConfig waveform;
  double test_fraction = 0.25;
  std::size_t teacher_count = 10;
  ClassifierConfig teacher;
  pate::TeacherObjective teacher_objective =
      pate::TeacherObjective::kSoftmaxCrossEntropy;
  ClassifierConfig student;
  AaeConfig aae;
  std::size_t synthetic_count = 300;
  PrivacyConfig privacy;
  std::size_t trials = 20;
  std::uint64_t master_seed = 7;

  std::uint64_t effective_query_budget() const {
    return privacy.query_budget != 0 ? privacy.query_budget : synthetic_count;
  }
};

ExperimentConfig toy_profile();
ExperimentConfig paper_profile();
ExperimentConfig profile_by_name(const std::string& name);

// Overlay of a (possibly partial) JSON document onto a base config.
// Unknown keys are config errors.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const ExperimentConfig& base);
nlohmann::json config_to_json(const ExperimentConfig& config);
void validate_config(const ExperimentConfig& config);

// FNV-1a over the materialized config document (output location excluded),
// so artifacts produced under one config never feed a run under another.
std::string config_digest(const ExperimentConfig& config);

// Fixed artifact names under the output directory; MANIFEST.txt documents
// them.
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kSensitiveTrain = "sensitive_train.csv";
inline constexpr const char* kEvalTest = "eval_test.csv";
inline constexpr const char* kAaeCheckpoint = "aae.json";
inline constexpr const char* kTeachers = "teachers.json";
inline constexpr const char* kSynthetic = "synthetic.csv";
inline constexpr const char* kLabeledSynthetic = "labeled_synthetic.csv";
inline constexpr const char* kLabelingLog = "labeling_log.json";
inline constexpr const char* kStudent = "student.json";
inline constexpr const char* kResults = "results.json";
inline constexpr const char* kResultsCsv = "results.csv";
inline constexpr const char* kBudgetReport = "budget_report.json";
inline constexpr const char* kTiming = "timing.json";
inline constexpr const char* kManifest = "MANIFEST.txt";

struct StageInfo {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

// Declared stage dependency graph; the orchestrator and the privacy-hygiene
// audit both read it. The student-training stage has no edge to the
// sensitive dataset.
const std::vector<StageInfo>& stage_graph();

void cmd_gen_data(const ExperimentConfig& config, const std::string& out_dir);
void cmd_features(const ExperimentConfig& config, const std::string& out_dir);
void cmd_train_aae(const ExperimentConfig& config, const std::string& out_dir);
void cmd_train_teachers(const ExperimentConfig& config,
                        const std::string& out_dir);
void cmd_synthesize(const ExperimentConfig& config, const std::string& out_dir);
void cmd_label(const ExperimentConfig& config, const std::string& out_dir);
void cmd_train_student(const ExperimentConfig& config,
                       const std::string& out_dir);
nlohmann::json cmd_evaluate(const ExperimentConfig& config,
                            const std::string& out_dir);

// Full epsilon-sweep x trials grid; returns the results document. Throws
// BudgetError after writing reports if any budget assertion fails.
nlohmann::json cmd_run_all(const ExperimentConfig& config,
                           const std::string& out_dir);

}  // namespace pateforge::pipeline

#endif  // PATEFORGE_PIPELINE_HPP_
