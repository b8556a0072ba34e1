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

#include "pateforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>

#include "pateforge/aae.hpp"
#include "pateforge/evaluation.hpp"
#include "pateforge/kernels.hpp"
#include "pateforge/rng.hpp"

namespace fs = std::filesystem;

namespace pateforge::pipeline {
namespace {

constexpr int kFormatVersion = 1;

std::string artifact_stem(const std::string& name) {
  const std::size_t dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

fs::path artifact_path(const std::string& out_dir, const std::string& name) {
  return fs::path(out_dir) / name;
}

// --- config plumbing ---

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& value) {
  if (j.contains(key)) j.at(key).get_to(value);
}

void check_known_keys(const nlohmann::json& j,
                      const std::vector<std::string>& known,
                      const std::string& scope) {
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown config key " + scope + "." + item.key());
    }
  }
}

std::string source_name(DataSource source) {
  switch (source) {
    case DataSource::kToy: return "toy";
    case DataSource::kCsv: return "csv";
    case DataSource::kWaveformDir: return "waveform-dir";
  }
  throw ConfigError("unknown data source");
}

DataSource source_from_name(const std::string& name) {
  if (name == "toy") return DataSource::kToy;
  if (name == "csv") return DataSource::kCsv;
  if (name == "waveform-dir") return DataSource::kWaveformDir;
  throw ConfigError("unknown data source: " + name);
}

nlohmann::json classifier_to_json(const ClassifierConfig& c) {
  return {{"hidden", c.hidden},
          {"optimizer", c.optimizer == nn::OptimizerKind::kSgd ? "sgd" : "adam"},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs}};
}

void classifier_from_json(const nlohmann::json& j, const std::string& scope,
                          ClassifierConfig& c) {
  check_known_keys(
      j, {"hidden", "optimizer", "learning_rate", "batch_size", "epochs"},
      scope);
  read_field(j, "hidden", c.hidden);
  if (j.contains("optimizer")) {
    const std::string kind = j.at("optimizer").get<std::string>();
    if (kind == "sgd") {
      c.optimizer = nn::OptimizerKind::kSgd;
    } else if (kind == "adam") {
      c.optimizer = nn::OptimizerKind::kAdam;
    } else {
      throw ConfigError(scope + ".optimizer must be sgd or adam");
    }
  }
  read_field(j, "learning_rate", c.learning_rate);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "epochs", c.epochs);
}

nn::TrainConfig train_config_for(const ClassifierConfig& c,
                                 std::uint64_t seed) {
  nn::TrainConfig config;
  config.optimizer.kind = c.optimizer;
  config.optimizer.learning_rate = c.learning_rate;
  config.batch_size = c.batch_size;
  config.epochs = c.epochs;
  config.seed = seed;
  return config;
}

std::vector<nn::LayerSpec> classifier_specs(const ClassifierConfig& c,
                                            std::size_t input_dim,
                                            std::size_t output_dim) {
  std::vector<nn::LayerSpec> specs;
  std::size_t in = input_dim;
  for (std::size_t h : c.hidden) {
    specs.push_back({in, h, nn::Activation::kRelu});
    in = h;
  }
  specs.push_back({in, output_dim, nn::Activation::kIdentity});
  return specs;
}

aae::AaeSpec aae_spec_for(const AaeConfig& c, std::size_t feature_dim) {
  aae::AaeSpec spec;
  spec.feature_dim = feature_dim;
  spec.latent_dim = c.latent_dim;
  spec.trunk_hidden = c.trunk_hidden;
  spec.decoder_hidden = c.decoder_hidden;
  spec.discriminator_hidden = c.discriminator_hidden;
  spec.log_sigma_min = c.log_sigma_min;
  spec.log_sigma_max = c.log_sigma_max;
  return spec;
}

aae::AaeTrainConfig aae_train_config_for(const AaeConfig& c,
                                         std::uint64_t seed) {
  aae::AaeTrainConfig config;
  config.reconstruction_lr = c.reconstruction_lr;
  config.discriminator_lr = c.discriminator_lr;
  config.adversarial_lr = c.adversarial_lr;
  config.batch_size = c.batch_size;
  config.epochs = c.epochs;
  config.seed = seed;
  return config;
}

// --- artifact stamping ---

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
}

void write_stamped_json(const ExperimentConfig& config,
                        const std::string& out_dir, const std::string& name,
                        nlohmann::json j) {
  j["format_version"] = kFormatVersion;
  j["config_digest"] = config_digest(config);
  j["master_seed"] = config.master_seed;
  eval::write_json(j, artifact_path(out_dir, name).string());
}

void require_exists(const std::string& out_dir, const std::string& name) {
  if (!fs::exists(artifact_path(out_dir, name))) {
    throw MissingArtifactError("missing artifact: " + artifact_stem(name));
  }
}

nlohmann::json load_stamped_json(const ExperimentConfig& config,
                                 const std::string& out_dir,
                                 const std::string& name) {
  require_exists(out_dir, name);
  nlohmann::json j = eval::read_json(artifact_path(out_dir, name).string());
  if (j.value("config_digest", "") != config_digest(config) ||
      j.value("master_seed", std::uint64_t{0}) != config.master_seed) {
    throw MissingArtifactError("stale artifact: " + artifact_stem(name) +
                               " (config digest or seed mismatch)");
  }
  return j;
}

void write_sidecar(const ExperimentConfig& config, const std::string& out_dir,
                   const std::string& name) {
  nlohmann::json meta;
  meta["artifact"] = name;
  meta["config_digest"] = config_digest(config);
  meta["master_seed"] = config.master_seed;
  eval::write_json(meta, artifact_path(out_dir, name + ".meta.json").string());
}

void check_sidecar(const ExperimentConfig& config, const std::string& out_dir,
                   const std::string& name) {
  require_exists(out_dir, name);
  const fs::path meta_path = artifact_path(out_dir, name + ".meta.json");
  if (!fs::exists(meta_path)) {
    throw MissingArtifactError("missing artifact: " + artifact_stem(name));
  }
  const nlohmann::json meta = eval::read_json(meta_path.string());
  if (meta.value("config_digest", "") != config_digest(config) ||
      meta.value("master_seed", std::uint64_t{0}) != config.master_seed) {
    throw MissingArtifactError("stale artifact: " + artifact_stem(name) +
                               " (config digest or seed mismatch)");
  }
}

void save_dataset_artifact(const ExperimentConfig& config,
                           const std::string& out_dir, const std::string& name,
                           const data::Dataset& dataset) {
  data::save_features_csv(dataset, artifact_path(out_dir, name).string());
  write_sidecar(config, out_dir, name);
}

data::Dataset load_dataset_artifact(const ExperimentConfig& config,
                                    const std::string& out_dir,
                                    const std::string& name,
                                    int expected_classes = 0) {
  check_sidecar(config, out_dir, name);
  return data::load_features_csv(artifact_path(out_dir, name).string(),
                                 expected_classes);
}

void ensure_out_dir(const ExperimentConfig& config,
                    const std::string& out_dir) {
  fs::create_directories(out_dir);
  nlohmann::json j = config_to_json(config);
  j["config_digest"] = config_digest(config);
  eval::write_json(j, artifact_path(out_dir, kConfigFile).string());
}

// --- data ingestion ---

std::pair<data::Dataset, data::Dataset> split_for_pipeline(
    const ExperimentConfig& config, const data::Dataset& full) {
  return data::split_train_test(full, config.test_fraction,
                                hash_seed(config.master_seed, "split", 0));
}

data::Dataset dataset_from_waveform_dir(const ExperimentConfig& config) {
  const WaveformSourceConfig& source = config.waveform;
  if (!fs::is_directory(source.directory)) {
    throw MissingArtifactError("missing artifact: waveform directory " +
                               source.directory);
  }
  // Layout: <dir>/<class index>/<utterance>.csv, one sample value per line
  // under a "sample" header.
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& class_entry : fs::directory_iterator(source.directory)) {
    if (!class_entry.is_directory()) continue;
    int label = -1;
    try {
      label = std::stoi(class_entry.path().filename().string());
    } catch (...) {
      throw ConfigError("waveform-dir: class directory name must be an "
                        "integer index: " +
                        class_entry.path().filename().string());
    }
    for (const auto& file : fs::directory_iterator(class_entry.path())) {
      if (file.path().extension() == ".csv") files.emplace_back(label, file.path());
    }
  }
  if (files.empty()) {
    throw MissingArtifactError("missing artifact: no waveform csv files in " +
                               source.directory);
  }
  std::sort(files.begin(), files.end());

  data::Dataset dataset;
  int max_label = 0;
  for (const auto& [label, path] : files) {
    const Matrix column = data::load_matrix_csv(path.string());
    if (column.cols != 1) {
      throw ConfigError("waveform file must have a single sample column: " +
                        path.string());
    }
    signal::Waveform waveform;
    waveform.sample_rate = source.sample_rate;
    waveform.samples = column.data;
    data::LabeledSample sample;
    sample.label = label;
    sample.features = signal::feature_vector(waveform, source.spectrogram,
                                             source.feature_kind);
    if (dataset.samples.empty()) {
      dataset.feature_dim = sample.features.size();
    }
    max_label = std::max(max_label, label);
    dataset.samples.push_back(std::move(sample));
  }
  dataset.num_classes = max_label + 1;
  return dataset;
}

// --- shared training steps (library-level, used by stages and run-all) ---

data::ToyDatasetConfig toy_config_with_seed(const ExperimentConfig& config) {
  data::ToyDatasetConfig toy = config.toy;
  toy.seed = hash_seed(config.master_seed, "toy-data", 0);
  return toy;
}

aae::AaeModel train_aae_model(const ExperimentConfig& config,
                              const data::Dataset& train,
                              std::uint64_t seed) {
  aae::AaeModel model =
      aae::init_aae(aae_spec_for(config.aae, train.feature_dim), seed);
  auto [trained, metrics] =
      aae::train(std::move(model), train, aae_train_config_for(config.aae, seed));
  (void)metrics;
  return std::move(trained);
}

pate::TeacherEnsemble train_teacher_ensemble(const ExperimentConfig& config,
                                             const data::Dataset& train,
                                             const data::Partition& partition,
                                             std::uint64_t seed) {
  pate::TeacherTrainConfig teacher_config;
  teacher_config.base = train_config_for(config.teacher, seed);
  teacher_config.objective = config.teacher_objective;
  const std::vector<nn::LayerSpec> specs = classifier_specs(
      config.teacher, train.feature_dim,
      config.teacher_objective == pate::TeacherObjective::kRealFakeDiscriminator
          ? 1
          : static_cast<std::size_t>(train.num_classes));
  return pate::train_teachers(partition, train, specs, teacher_config);
}

int argmax_int_lowest_tie(std::span<const int> counts) {
  int best = 0;
  for (std::size_t j = 1; j < counts.size(); ++j) {
    if (counts[j] > counts[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(j);
    }
  }
  return best;
}

struct TrialOutcome {
  double fid = 0.0;
  // Indexed by epsilon position.
  std::vector<double> accuracy;
  std::vector<double> agreement;
  std::vector<std::uint64_t> queries_used;
  std::vector<bool> budget_pass;
};

TrialOutcome run_single_trial(const ExperimentConfig& config,
                              const data::Dataset& train,
                              const data::Dataset& test,
                              const data::Partition& partition,
                              const eval::GaussianStats& real_stats,
                              std::uint64_t trial_index) {
  const std::uint64_t master = config.master_seed;
  const aae::AaeModel model = train_aae_model(
      config, train, hash_seed(master, "trial-aae", trial_index));
  const pate::TeacherEnsemble ensemble = train_teacher_ensemble(
      config, train, partition, hash_seed(master, "trial-teachers", trial_index));

  Rng synth_rng(hash_seed(master, "trial-synth", trial_index));
  const Matrix synthetic =
      aae::synthesize(model, config.synthetic_count, synth_rng);
  const std::vector<pate::VoteHistogram> clean_votes =
      pate::count_votes_batch(ensemble, synthetic);
  std::vector<int> clean_majority(clean_votes.size());
  for (std::size_t i = 0; i < clean_votes.size(); ++i) {
    clean_majority[i] = argmax_int_lowest_tie(clean_votes[i].counts);
  }

  TrialOutcome outcome;
  outcome.fid =
      eval::frechet_distance(eval::fit_gaussian(synthetic), real_stats).fid;

  const std::uint64_t query_budget = config.effective_query_budget();
  // The labeling seed is shared across epsilon levels, so the same
  // underlying draws are rescaled by each level's noise scale.
  const std::uint64_t label_seed = hash_seed(master, "trial-label", trial_index);
  const std::uint64_t student_seed =
      hash_seed(master, "trial-student", trial_index);
  for (double epsilon : config.privacy.epsilon_targets) {
    const privacy::PrivacyBudget budget = privacy::make_budget(
        epsilon, query_budget, config.privacy.convention, config.privacy.delta);
    const pate::LabeledSyntheticSet labeled =
        pate::label_synthetic_set(ensemble, synthetic, budget.scale_b,
                                  label_seed);
    double agreement = 0.0;
    for (std::size_t i = 0; i < labeled.dataset.size(); ++i) {
      if (labeled.dataset.samples[i].label == clean_majority[i]) {
        agreement += 1.0;
      }
    }
    agreement /= static_cast<double>(labeled.dataset.size());

    const nn::DenseNet student = pate::train_student(
        labeled,
        classifier_specs(config.student, train.feature_dim,
                         static_cast<std::size_t>(train.num_classes)),
        train_config_for(config.student, student_seed));

    const privacy::BudgetReport report =
        privacy::assert_budget(labeled.log, budget);
    outcome.accuracy.push_back(eval::accuracy(student, test));
    outcome.agreement.push_back(agreement);
    outcome.queries_used.push_back(labeled.log.queries);
    outcome.budget_pass.push_back(report.pass);
  }
  return outcome;
}

std::string manifest_text(const ExperimentConfig& config) {
  std::string text;
  text += "pate-forge output directory\n";
  text += "config digest: " + config_digest(config) + "\n\n";
  text += "artifacts (fixed names):\n";
  text += "  config.json             materialized experiment config\n";
  text += "  sensitive_train.csv     sensitive training split (CSV + .meta.json stamp)\n";
  text += "  eval_test.csv           held-out evaluation split\n";
  text += "  aae.json                adversarial autoencoder checkpoint\n";
  text += "  teachers.json           teacher ensemble checkpoint\n";
  text += "  synthetic.csv           unlabeled synthetic samples\n";
  text += "  labeled_synthetic.csv   noisy-labeled synthetic samples\n";
  text += "  labeling_log.json       query count and noise scale for labeling\n";
  text += "  student.json            student classifier checkpoint\n";
  text += "  results.json            evaluation results (per epsilon, per trial)\n";
  text += "  results.csv             epsilon,mean_accuracy,std,fid_mean,fid_std\n";
  text += "  budget_report.json      accountant verdict per epsilon\n";
  text += "  timing.json             wall-clock of the last run-all\n";
  text += "CSV artifacts carry a <name>.meta.json stamp with the config digest\n";
  text += "and master seed; stale artifacts are rejected.\n";
  return text;
}

}  // namespace

ExperimentConfig toy_profile() { return ExperimentConfig{}; }

ExperimentConfig paper_profile() {
  ExperimentConfig config;
  config.toy.num_classes = 35;
  config.toy.samples_per_class = 3023;
  config.toy.feature_dim = 80;
  config.teacher_count = 200;
  config.teacher.hidden = {64};
  config.student.hidden = {64};
  config.aae.latent_dim = 128;
  config.aae.trunk_hidden = {256};
  config.aae.decoder_hidden = {256};
  config.aae.discriminator_hidden = {64};
  config.synthetic_count = 1000;
  config.privacy.convention = privacy::Convention::kPaper;
  config.waveform.spectrogram.dft_size = 1024;
  config.waveform.spectrogram.hop_length = 160;  // 100 Hz frame rate at 16 kHz
  config.waveform.spectrogram.mel_bands = 80;
  config.waveform.spectrogram.mfcc_count = 13;
  return config;
}

ExperimentConfig profile_by_name(const std::string& name) {
  if (name == "toy") return toy_profile();
  if (name == "paper") return paper_profile();
  throw ConfigError("unknown profile: " + name);
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["source"] = source_name(config.source);
  j["toy"] = {{"num_classes", config.toy.num_classes},
              {"samples_per_class", config.toy.samples_per_class},
              {"feature_dim", config.toy.feature_dim},
              {"separation", config.toy.separation},
              {"noise_scale", config.toy.noise_scale}};
  j["csv_path"] = config.csv_path;
  j["waveform"] = {
      {"directory", config.waveform.directory},
      {"sample_rate", config.waveform.sample_rate},
      {"feature_kind",
       config.waveform.feature_kind == signal::FeatureKind::kMfcc ? "mfcc"
                                                                  : "log-mel"},
      {"spectrogram",
       {{"dft_size", config.waveform.spectrogram.dft_size},
        {"hop_length", config.waveform.spectrogram.hop_length},
        {"window", config.waveform.spectrogram.window ==
                           signal::WindowKind::kHann
                       ? "hann"
                       : "rectangular"},
        {"mel_bands", config.waveform.spectrogram.mel_bands},
        {"mfcc_count", config.waveform.spectrogram.mfcc_count},
        {"fmin", config.waveform.spectrogram.fmin},
        {"fmax", config.waveform.spectrogram.fmax}}}};
  j["test_fraction"] = config.test_fraction;
  j["teacher_count"] = config.teacher_count;
  j["teacher"] = classifier_to_json(config.teacher);
  j["teacher_objective"] =
      config.teacher_objective == pate::TeacherObjective::kSoftmaxCrossEntropy
          ? "multiclass"
          : "real-fake-discriminator";
  j["student"] = classifier_to_json(config.student);
  j["aae"] = {{"latent_dim", config.aae.latent_dim},
              {"trunk_hidden", config.aae.trunk_hidden},
              {"decoder_hidden", config.aae.decoder_hidden},
              {"discriminator_hidden", config.aae.discriminator_hidden},
              {"reconstruction_lr", config.aae.reconstruction_lr},
              {"discriminator_lr", config.aae.discriminator_lr},
              {"adversarial_lr", config.aae.adversarial_lr},
              {"batch_size", config.aae.batch_size},
              {"epochs", config.aae.epochs},
              {"log_sigma_min", config.aae.log_sigma_min},
              {"log_sigma_max", config.aae.log_sigma_max}};
  j["synthetic_count"] = config.synthetic_count;
  j["privacy"] = {{"epsilon_targets", config.privacy.epsilon_targets},
                  {"delta", config.privacy.delta},
                  {"convention", privacy::convention_name(config.privacy.convention)},
                  {"query_budget", config.privacy.query_budget}};
  j["trials"] = config.trials;
  j["master_seed"] = config.master_seed;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const ExperimentConfig& base) {
  ExperimentConfig config = base;
  check_known_keys(
      j,
      {"source", "toy", "csv_path", "waveform", "test_fraction",
       "teacher_count", "teacher", "teacher_objective", "student", "aae",
       "synthetic_count", "privacy", "trials", "master_seed",
       "config_digest"},
      "config");
  if (j.contains("source")) {
    config.source = source_from_name(j.at("source").get<std::string>());
  }
  if (j.contains("toy")) {
    const nlohmann::json& t = j.at("toy");
    check_known_keys(t,
                     {"num_classes", "samples_per_class", "feature_dim",
                      "separation", "noise_scale"},
                     "toy");
    read_field(t, "num_classes", config.toy.num_classes);
    read_field(t, "samples_per_class", config.toy.samples_per_class);
    read_field(t, "feature_dim", config.toy.feature_dim);
    read_field(t, "separation", config.toy.separation);
    read_field(t, "noise_scale", config.toy.noise_scale);
  }
  read_field(j, "csv_path", config.csv_path);
  if (j.contains("waveform")) {
    const nlohmann::json& w = j.at("waveform");
    check_known_keys(
        w, {"directory", "sample_rate", "feature_kind", "spectrogram"},
        "waveform");
    read_field(w, "directory", config.waveform.directory);
    read_field(w, "sample_rate", config.waveform.sample_rate);
    if (w.contains("feature_kind")) {
      const std::string kind = w.at("feature_kind").get<std::string>();
      if (kind == "mfcc") {
        config.waveform.feature_kind = signal::FeatureKind::kMfcc;
      } else if (kind == "log-mel") {
        config.waveform.feature_kind = signal::FeatureKind::kLogMel;
      } else {
        throw ConfigError("waveform.feature_kind must be mfcc or log-mel");
      }
    }
    if (w.contains("spectrogram")) {
      const nlohmann::json& s = w.at("spectrogram");
      check_known_keys(s,
                       {"dft_size", "hop_length", "window", "mel_bands",
                        "mfcc_count", "fmin", "fmax"},
                       "waveform.spectrogram");
      read_field(s, "dft_size", config.waveform.spectrogram.dft_size);
      read_field(s, "hop_length", config.waveform.spectrogram.hop_length);
      if (s.contains("window")) {
        const std::string window = s.at("window").get<std::string>();
        if (window == "hann") {
          config.waveform.spectrogram.window = signal::WindowKind::kHann;
        } else if (window == "rectangular") {
          config.waveform.spectrogram.window = signal::WindowKind::kRectangular;
        } else {
          throw ConfigError("spectrogram.window must be hann or rectangular");
        }
      }
      read_field(s, "mel_bands", config.waveform.spectrogram.mel_bands);
      read_field(s, "mfcc_count", config.waveform.spectrogram.mfcc_count);
      read_field(s, "fmin", config.waveform.spectrogram.fmin);
      read_field(s, "fmax", config.waveform.spectrogram.fmax);
    }
  }
  read_field(j, "test_fraction", config.test_fraction);
  read_field(j, "teacher_count", config.teacher_count);
  if (j.contains("teacher")) {
    classifier_from_json(j.at("teacher"), "teacher", config.teacher);
  }
  if (j.contains("teacher_objective")) {
    const std::string objective = j.at("teacher_objective").get<std::string>();
    if (objective == "multiclass") {
      config.teacher_objective = pate::TeacherObjective::kSoftmaxCrossEntropy;
    } else if (objective == "real-fake-discriminator") {
      config.teacher_objective = pate::TeacherObjective::kRealFakeDiscriminator;
    } else {
      throw ConfigError(
          "teacher_objective must be multiclass or real-fake-discriminator");
    }
  }
  if (j.contains("student")) {
    classifier_from_json(j.at("student"), "student", config.student);
  }
  if (j.contains("aae")) {
    const nlohmann::json& a = j.at("aae");
    check_known_keys(a,
                     {"latent_dim", "trunk_hidden", "decoder_hidden",
                      "discriminator_hidden", "reconstruction_lr",
                      "discriminator_lr", "adversarial_lr", "batch_size",
                      "epochs", "log_sigma_min", "log_sigma_max"},
                     "aae");
    read_field(a, "latent_dim", config.aae.latent_dim);
    read_field(a, "trunk_hidden", config.aae.trunk_hidden);
    read_field(a, "decoder_hidden", config.aae.decoder_hidden);
    read_field(a, "discriminator_hidden", config.aae.discriminator_hidden);
    read_field(a, "reconstruction_lr", config.aae.reconstruction_lr);
    read_field(a, "discriminator_lr", config.aae.discriminator_lr);
    read_field(a, "adversarial_lr", config.aae.adversarial_lr);
    read_field(a, "batch_size", config.aae.batch_size);
    read_field(a, "epochs", config.aae.epochs);
    read_field(a, "log_sigma_min", config.aae.log_sigma_min);
    read_field(a, "log_sigma_max", config.aae.log_sigma_max);
  }
  read_field(j, "synthetic_count", config.synthetic_count);
  if (j.contains("privacy")) {
    const nlohmann::json& p = j.at("privacy");
    check_known_keys(
        p, {"epsilon_targets", "delta", "convention", "query_budget"},
        "privacy");
    read_field(p, "epsilon_targets", config.privacy.epsilon_targets);
    read_field(p, "delta", config.privacy.delta);
    if (p.contains("convention")) {
      config.privacy.convention = privacy::convention_from_name(
          p.at("convention").get<std::string>());
    }
    read_field(p, "query_budget", config.privacy.query_budget);
  }
  read_field(j, "trials", config.trials);
  read_field(j, "master_seed", config.master_seed);
  validate_config(config);
  return config;
}

void validate_config(const ExperimentConfig& config) {
  if (config.source == DataSource::kToy) {
    if (config.toy.num_classes < 2) {
      throw ConfigError("toy.num_classes must be >= 2");
    }
    if (config.toy.samples_per_class < 1) {
      throw ConfigError("toy.samples_per_class must be >= 1");
    }
    if (config.toy.feature_dim == 0) {
      throw ConfigError("toy.feature_dim must be >= 1");
    }
    if (config.toy.separation <= 0.0) {
      throw ConfigError("toy.separation must be > 0");
    }
  }
  if (config.source == DataSource::kCsv && config.csv_path.empty()) {
    throw ConfigError("csv source needs csv_path");
  }
  if (config.source == DataSource::kWaveformDir &&
      config.waveform.directory.empty()) {
    throw ConfigError("waveform-dir source needs waveform.directory");
  }
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (config.teacher_count == 0) throw ConfigError("teacher_count must be >= 1");
  if (config.synthetic_count == 0) {
    throw ConfigError("synthetic_count must be >= 1");
  }
  if (config.privacy.epsilon_targets.empty()) {
    throw ConfigError("privacy.epsilon_targets must be non-empty");
  }
  for (double epsilon : config.privacy.epsilon_targets) {
    if (!(epsilon > 0.0)) {
      throw ConfigError("privacy.epsilon_targets must be positive");
    }
  }
  if (config.privacy.delta <= 0.0) throw ConfigError("privacy.delta must be > 0");
  if (config.trials == 0) throw ConfigError("trials must be >= 1");
  if (config.aae.latent_dim == 0) throw ConfigError("aae.latent_dim must be >= 1");
}

std::string config_digest(const ExperimentConfig& config) {
  const std::string dump = config_to_json(config).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h = (h ^ c) * 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(h));
  return buffer;
}

const std::vector<StageInfo>& stage_graph() {
  static const std::vector<StageInfo> graph = {
      {"gen-data", {}, {kSensitiveTrain, kEvalTest}},
      {"features", {}, {kSensitiveTrain, kEvalTest}},
      {"train-aae", {kSensitiveTrain}, {kAaeCheckpoint}},
      {"train-teachers", {kSensitiveTrain}, {kTeachers}},
      {"synthesize", {kAaeCheckpoint}, {kSynthetic}},
      {"label", {kTeachers, kSynthetic}, {kLabeledSynthetic, kLabelingLog}},
      {"train-student", {kLabeledSynthetic, kLabelingLog}, {kStudent}},
      {"evaluate",
       {kStudent, kEvalTest, kSynthetic, kLabelingLog},
       {kResults, kResultsCsv, kBudgetReport}},
  };
  return graph;
}

void cmd_gen_data(const ExperimentConfig& config, const std::string& out_dir) {
  validate_config(config);
  if (config.source != DataSource::kToy) {
    throw ConfigError("gen-data requires the toy source; use features for "
                      "csv or waveform-dir input");
  }
  ensure_out_dir(config, out_dir);
  const data::Dataset full = data::generate_toy_dataset(toy_config_with_seed(config));
  auto [train, test] = split_for_pipeline(config, full);
  save_dataset_artifact(config, out_dir, kSensitiveTrain, train);
  save_dataset_artifact(config, out_dir, kEvalTest, test);
}

void cmd_features(const ExperimentConfig& config, const std::string& out_dir) {
  validate_config(config);
  data::Dataset full;
  if (config.source == DataSource::kCsv) {
    full = data::load_features_csv(config.csv_path);
  } else if (config.source == DataSource::kWaveformDir) {
    full = dataset_from_waveform_dir(config);
  } else {
    throw ConfigError("features requires the csv or waveform-dir source; use "
                      "gen-data for toy data");
  }
  ensure_out_dir(config, out_dir);
  auto [train, test] = split_for_pipeline(config, full);
  save_dataset_artifact(config, out_dir, kSensitiveTrain, train);
  save_dataset_artifact(config, out_dir, kEvalTest, test);
}

void cmd_train_aae(const ExperimentConfig& config, const std::string& out_dir) {
  validate_config(config);
  ensure_out_dir(config, out_dir);
  const data::Dataset train =
      load_dataset_artifact(config, out_dir, kSensitiveTrain);
  const std::uint64_t seed = hash_seed(config.master_seed, "aae", 0);
  aae::AaeModel model =
      aae::init_aae(aae_spec_for(config.aae, train.feature_dim), seed);
  auto [trained, metrics] =
      aae::train(std::move(model), train, aae_train_config_for(config.aae, seed));
  nlohmann::json j;
  j["model"] = aae::aae_to_json(trained);
  nlohmann::json history = nlohmann::json::array();
  for (const aae::EpochMetrics& epoch : metrics) {
    history.push_back({{"reconstruction", epoch.reconstruction},
                       {"discriminator", epoch.discriminator},
                       {"adversarial", epoch.adversarial},
                       {"kl", epoch.kl}});
  }
  j["epochs"] = std::move(history);
  write_stamped_json(config, out_dir, kAaeCheckpoint, std::move(j));
}

void cmd_train_teachers(const ExperimentConfig& config,
                        const std::string& out_dir) {
  validate_config(config);
  ensure_out_dir(config, out_dir);
  const data::Dataset train =
      load_dataset_artifact(config, out_dir, kSensitiveTrain);
  const data::Partition partition = data::make_partition(
      train, config.teacher_count, hash_seed(config.master_seed, "partition", 0));
  const pate::TeacherEnsemble ensemble = train_teacher_ensemble(
      config, train, partition, hash_seed(config.master_seed, "teachers", 0));
  nlohmann::json j;
  j["ensemble"] = pate::ensemble_to_json(ensemble);
  write_stamped_json(config, out_dir, kTeachers, std::move(j));
}

void cmd_synthesize(const ExperimentConfig& config, const std::string& out_dir) {
  validate_config(config);
  ensure_out_dir(config, out_dir);
  const nlohmann::json j = load_stamped_json(config, out_dir, kAaeCheckpoint);
  const aae::AaeModel model = aae::aae_from_json(j.at("model"));
  Rng rng(hash_seed(config.master_seed, "synth", 0));
  const Matrix samples = aae::synthesize(model, config.synthetic_count, rng);
  data::save_matrix_csv(samples,
                        artifact_path(out_dir, kSynthetic).string());
  write_sidecar(config, out_dir, kSynthetic);
}

void cmd_label(const ExperimentConfig& config, const std::string& out_dir) {
  validate_config(config);
  ensure_out_dir(config, out_dir);
  const nlohmann::json teachers_json =
      load_stamped_json(config, out_dir, kTeachers);
  const pate::TeacherEnsemble ensemble =
      pate::ensemble_from_json(teachers_json.at("ensemble"));
  check_sidecar(config, out_dir, kSynthetic);
  const Matrix synthetic =
      data::load_matrix_csv(artifact_path(out_dir, kSynthetic).string());

  const std::uint64_t query_budget = config.effective_query_budget();
  if (synthetic.rows > query_budget) {
    throw BudgetError("labeling " + std::to_string(synthetic.rows) +
                      " samples would exceed the query budget K=" +
                      std::to_string(query_budget));
  }
  const double epsilon = config.privacy.epsilon_targets.front();
  const privacy::PrivacyBudget budget = privacy::make_budget(
      epsilon, query_budget, config.privacy.convention, config.privacy.delta);
  const pate::LabeledSyntheticSet labeled = pate::label_synthetic_set(
      ensemble, synthetic, budget.scale_b,
      hash_seed(config.master_seed, "label", 0));
  save_dataset_artifact(config, out_dir, kLabeledSynthetic, labeled.dataset);
  nlohmann::json log = labeled.log.to_json();
  log["convention"] = privacy::convention_name(config.privacy.convention);
  log["epsilon_target"] = epsilon;
  log["num_classes"] = ensemble.num_classes;
  write_stamped_json(config, out_dir, kLabelingLog, std::move(log));
}

void cmd_train_student(const ExperimentConfig& config,
                       const std::string& out_dir) {
  validate_config(config);
  ensure_out_dir(config, out_dir);
  const nlohmann::json log_json = load_stamped_json(config, out_dir, kLabelingLog);
  const int num_classes = log_json.at("num_classes").get<int>();
  pate::LabeledSyntheticSet labeled;
  labeled.dataset = load_dataset_artifact(config, out_dir, kLabeledSynthetic,
                                          num_classes);
  labeled.log.queries = log_json.at("K").get<std::uint64_t>();
  labeled.log.scale_b = log_json.at("scale_b").get<double>();
  labeled.log.seed = log_json.at("seed").get<std::uint64_t>();

  const nn::DenseNet student = pate::train_student(
      labeled,
      classifier_specs(config.student, labeled.dataset.feature_dim,
                       static_cast<std::size_t>(num_classes)),
      train_config_for(config.student,
                       hash_seed(config.master_seed, "student", 0)));
  nlohmann::json j;
  j["num_classes"] = num_classes;
  j["net"] = nn::net_to_json(student);
  write_stamped_json(config, out_dir, kStudent, std::move(j));
}

nlohmann::json cmd_evaluate(const ExperimentConfig& config,
                            const std::string& out_dir) {
  validate_config(config);
  ensure_out_dir(config, out_dir);
  const nlohmann::json student_json = load_stamped_json(config, out_dir, kStudent);
  const nn::DenseNet student = nn::net_from_json(student_json.at("net"));
  const data::Dataset test = load_dataset_artifact(config, out_dir, kEvalTest);
  check_sidecar(config, out_dir, kSynthetic);
  const Matrix synthetic =
      data::load_matrix_csv(artifact_path(out_dir, kSynthetic).string());
  const nlohmann::json log_json = load_stamped_json(config, out_dir, kLabelingLog);

  pate::LabelingLog log;
  log.queries = log_json.at("K").get<std::uint64_t>();
  log.scale_b = log_json.at("scale_b").get<double>();
  log.seed = log_json.at("seed").get<std::uint64_t>();
  const double epsilon = log_json.at("epsilon_target").get<double>();
  const privacy::PrivacyBudget budget = privacy::make_budget(
      epsilon, config.effective_query_budget(), config.privacy.convention,
      config.privacy.delta);
  const privacy::BudgetReport report = privacy::assert_budget(log, budget);

  const double acc = eval::accuracy(student, test);
  const eval::FidReport fid = eval::frechet_distance(
      eval::fit_gaussian(synthetic),
      eval::fit_gaussian(data::features_as_matrix(test)));

  nlohmann::json results;
  results["format_version"] = kFormatVersion;
  results["config_digest"] = config_digest(config);
  results["master_seed"] = config.master_seed;
  results["convention"] = privacy::convention_name(config.privacy.convention);
  results["results"] = nlohmann::json::array(
      {{{"epsilon", epsilon},
        {"scale_b", budget.scale_b},
        {"mean_accuracy", acc},
        {"std_accuracy", 0.0},
        {"fid_mean", fid.fid},
        {"fid_std", 0.0},
        {"budget", report.to_json()},
        {"trials", nlohmann::json::array({{{"trial", 0},
                                           {"accuracy", acc},
                                           {"fid", fid.fid},
                                           {"K_used", log.queries}}})}}});
  eval::write_json(results, artifact_path(out_dir, kResults).string());
  eval::write_summary_csv({{epsilon, acc, 0.0, fid.fid, 0.0}},
                          artifact_path(out_dir, kResultsCsv).string());
  eval::write_json(nlohmann::json::array({report.to_json()}),
                   artifact_path(out_dir, kBudgetReport).string());
  if (!report.pass) throw BudgetError(report.reason);
  return results;
}

nlohmann::json cmd_run_all(const ExperimentConfig& config,
                           const std::string& out_dir) {
  validate_config(config);
  const auto started = std::chrono::steady_clock::now();
  ensure_out_dir(config, out_dir);
  if (config.source == DataSource::kToy) {
    cmd_gen_data(config, out_dir);
  } else {
    cmd_features(config, out_dir);
  }
  const data::Dataset train =
      load_dataset_artifact(config, out_dir, kSensitiveTrain);
  const data::Dataset test = load_dataset_artifact(config, out_dir, kEvalTest);
  const data::Partition partition = data::make_partition(
      train, config.teacher_count, hash_seed(config.master_seed, "partition", 0));
  const eval::GaussianStats real_stats =
      eval::fit_gaussian(data::features_as_matrix(test));

  std::vector<TrialOutcome> outcomes(config.trials);
  std::exception_ptr failure;
  const auto trial_count = static_cast<std::ptrdiff_t>(config.trials);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < trial_count; ++t) {
    try {
      outcomes[static_cast<std::size_t>(t)] =
          run_single_trial(config, train, test, partition, real_stats,
                           static_cast<std::uint64_t>(t));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  const std::uint64_t query_budget = config.effective_query_budget();
  std::vector<double> fids(config.trials);
  for (std::size_t t = 0; t < config.trials; ++t) fids[t] = outcomes[t].fid;
  const eval::AccuracyReport fid_report = eval::summarize(fids);

  nlohmann::json results;
  results["format_version"] = kFormatVersion;
  results["config_digest"] = config_digest(config);
  results["master_seed"] = config.master_seed;
  results["convention"] = privacy::convention_name(config.privacy.convention);
  results["trials"] = config.trials;
  results["synthetic_count"] = config.synthetic_count;
  nlohmann::json per_epsilon = nlohmann::json::array();
  nlohmann::json budget_reports = nlohmann::json::array();
  std::vector<eval::SummaryRow> summary_rows;
  bool all_pass = true;
  for (std::size_t e = 0; e < config.privacy.epsilon_targets.size(); ++e) {
    const double epsilon = config.privacy.epsilon_targets[e];
    const privacy::PrivacyBudget budget = privacy::make_budget(
        epsilon, query_budget, config.privacy.convention, config.privacy.delta);
    std::vector<double> accs(config.trials), agreements(config.trials);
    nlohmann::json trials = nlohmann::json::array();
    bool pass = true;
    for (std::size_t t = 0; t < config.trials; ++t) {
      accs[t] = outcomes[t].accuracy[e];
      agreements[t] = outcomes[t].agreement[e];
      pass = pass && outcomes[t].budget_pass[e];
      trials.push_back({{"trial", t},
                        {"accuracy", outcomes[t].accuracy[e]},
                        {"agreement", outcomes[t].agreement[e]},
                        {"fid", outcomes[t].fid},
                        {"K_used", outcomes[t].queries_used[e]}});
    }
    all_pass = all_pass && pass;
    const eval::AccuracyReport acc_report = eval::summarize(accs);
    const eval::AccuracyReport agreement_report = eval::summarize(agreements);
    pate::LabelingLog representative;
    representative.queries = outcomes[0].queries_used[e];
    representative.scale_b = budget.scale_b;
    const privacy::BudgetReport budget_report =
        privacy::assert_budget(representative, budget);
    per_epsilon.push_back({{"epsilon", epsilon},
                           {"scale_b", budget.scale_b},
                           {"mean_accuracy", acc_report.mean},
                           {"std_accuracy", acc_report.stddev},
                           {"mean_agreement", agreement_report.mean},
                           {"std_agreement", agreement_report.stddev},
                           {"fid_mean", fid_report.mean},
                           {"fid_std", fid_report.stddev},
                           {"budget", budget_report.to_json()},
                           {"trials", trials}});
    budget_reports.push_back(budget_report.to_json());
    summary_rows.push_back({epsilon, acc_report.mean, acc_report.stddev,
                            fid_report.mean, fid_report.stddev});
  }
  results["results"] = std::move(per_epsilon);

  eval::write_json(results, artifact_path(out_dir, kResults).string());
  eval::write_summary_csv(summary_rows,
                          artifact_path(out_dir, kResultsCsv).string());
  eval::write_json(budget_reports,
                   artifact_path(out_dir, kBudgetReport).string());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  eval::write_json({{"wall_clock_seconds", seconds}},
                   artifact_path(out_dir, kTiming).string());
  write_text(artifact_path(out_dir, kManifest), manifest_text(config));
  if (!all_pass) {
    throw BudgetError("budget assertion failed for at least one epsilon");
  }
  return results;
}

}  // namespace pateforge::pipeline
