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

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pateforge/errors.hpp"
#include "pateforge/pipeline.hpp"

namespace {

// Exit codes: 0 success, 2 config error, 3 missing artifact, 4 budget
// violation, 5 numerical failure.
constexpr int kOk = 0;
constexpr int kGenericError = 1;
constexpr int kConfigError = 2;
constexpr int kMissingArtifact = 3;
constexpr int kBudgetViolation = 4;
constexpr int kNumericalFailure = 5;

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::string profile = "toy";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

pateforge::pipeline::ExperimentConfig resolve_config(const CliOptions& options) {
  using pateforge::pipeline::ExperimentConfig;
  ExperimentConfig config = pateforge::pipeline::profile_by_name(options.profile);
  if (!options.config_path.empty()) {
    std::ifstream in(options.config_path);
    if (!in) {
      throw pateforge::ConfigError("cannot open config file: " +
                                   options.config_path);
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw pateforge::ConfigError(std::string("config parse error: ") +
                                   e.what());
    }
    config = pateforge::pipeline::config_from_json(j, config);
  }
  if (options.seed_set) config.master_seed = options.seed;
  pateforge::pipeline::validate_config(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pate-forge: privacy-preserving teacher-ensemble pipeline"};
  app.require_subcommand(1);

  CliOptions options;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", options.config_path,
                    "JSON config overlaid on the selected profile");
    cmd->add_option("--out", options.out_dir, "output directory");
    cmd->add_option("--seed", options.seed, "master seed override")
        ->each([&](const std::string&) { options.seed_set = true; });
    cmd->add_option("--profile", options.profile, "base profile (toy|paper)")
        ->check(CLI::IsMember({"toy", "paper"}));
  };

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"gen-data", "generate the toy dataset and write the train/test splits"},
      {"features", "ingest csv or waveform-dir data and write the splits"},
      {"train-aae", "train the adversarial autoencoder"},
      {"train-teachers", "train the partitioned teacher ensemble"},
      {"synthesize", "sample synthetic data from the trained decoder"},
      {"label", "noisy-label the synthetic set via the teacher votes"},
      {"train-student", "train the student on the labeled synthetic set"},
      {"evaluate", "evaluate accuracy and FID, write the budget report"},
      {"run-all", "run the full epsilon-sweep pipeline"},
  };
  for (const auto& [name, description] : stages) {
    add_common(app.add_subcommand(name, description));
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const pateforge::pipeline::ExperimentConfig config = resolve_config(options);
    const std::string stage = app.get_subcommands().front()->get_name();
    using namespace pateforge::pipeline;
    if (stage == "gen-data") {
      cmd_gen_data(config, options.out_dir);
    } else if (stage == "features") {
      cmd_features(config, options.out_dir);
    } else if (stage == "train-aae") {
      cmd_train_aae(config, options.out_dir);
    } else if (stage == "train-teachers") {
      cmd_train_teachers(config, options.out_dir);
    } else if (stage == "synthesize") {
      cmd_synthesize(config, options.out_dir);
    } else if (stage == "label") {
      cmd_label(config, options.out_dir);
    } else if (stage == "train-student") {
      cmd_train_student(config, options.out_dir);
    } else if (stage == "evaluate") {
      cmd_evaluate(config, options.out_dir);
    } else if (stage == "run-all") {
      cmd_run_all(config, options.out_dir);
    }
    std::cerr << stage << ": ok\n";
    return kOk;
  } catch (const pateforge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const pateforge::MissingArtifactError& e) {
    std::cerr << e.what() << "\n";
    return kMissingArtifact;
  } catch (const pateforge::BudgetError& e) {
    std::cerr << "budget violation: " << e.what() << "\n";
    return kBudgetViolation;
  } catch (const pateforge::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kGenericError;
  }
}
