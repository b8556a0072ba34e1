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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <doctest.h>

#include "pateforge/data.hpp"
#include "pateforge/rng.hpp"

using namespace pateforge;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "pateforge-data-tests";
  fs::create_directories(dir);
  return dir / name;
}

// Nearest-class-mean classifier against the generating means.
int nearest_mean_class(const data::ToyDatasetConfig& config,
                       std::span<const double> features) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int c = 0; c < config.num_classes; ++c) {
    const std::vector<double> mean = data::toy_class_mean(config, c);
    double dist = 0.0;
    for (std::size_t k = 0; k < features.size(); ++k) {
      dist += (features[k] - mean[k]) * (features[k] - mean[k]);
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("toy dataset generation is bit-deterministic") {
  data::ToyDatasetConfig config;
  config.num_classes = 3;
  config.samples_per_class = 1;
  config.feature_dim = 2;
  config.seed = 7;
  const data::Dataset a = data::generate_toy_dataset(config);
  const data::Dataset b = data::generate_toy_dataset(config);
  CHECK(data::dataset_to_csv(a) == data::dataset_to_csv(b));
}

TEST_CASE("toy dataset has balanced class counts") {
  data::ToyDatasetConfig config;
  config.num_classes = 3;
  config.samples_per_class = 800;
  config.feature_dim = 64;
  config.seed = 1;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  CHECK(dataset.size() == 2400);
  std::vector<int> counts(3, 0);
  for (const auto& sample : dataset.samples) ++counts[sample.label];
  CHECK(counts == std::vector<int>{800, 800, 800});
}

TEST_CASE("well-separated blobs are nearest-mean classifiable") {
  // Class means sit separation*sqrt(2) apart, so the Bayes error
  // Phi(-separation*sqrt(2)/2) is about 1e-5 at separation 6 and unit
  // noise; 99% accuracy leaves a wide margin.
  data::ToyDatasetConfig config;
  config.num_classes = 2;
  config.samples_per_class = 500;
  config.feature_dim = 8;
  config.separation = 6.0;
  config.noise_scale = 1.0;
  config.seed = 3;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  data::ToyDatasetConfig held_out = config;
  held_out.seed = 4;
  const data::Dataset fresh = data::generate_toy_dataset(held_out);
  std::size_t correct = 0;
  for (const auto& sample : fresh.samples) {
    if (nearest_mean_class(config, sample.features) == sample.label) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(fresh.size()) >=
        0.99);
  CHECK(dataset.size() == 1000);
}

TEST_CASE("toy dataset rejects invalid configs") {
  data::ToyDatasetConfig config;
  config.feature_dim = 0;
  CHECK_THROWS_AS(data::generate_toy_dataset(config), std::invalid_argument);
  config.feature_dim = 4;
  config.num_classes = 1;
  CHECK_THROWS_AS(data::generate_toy_dataset(config), std::invalid_argument);
}

TEST_CASE("partition splits 100 into ten subsets of ten") {
  data::ToyDatasetConfig config;
  config.num_classes = 2;
  config.samples_per_class = 50;
  config.feature_dim = 2;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  const data::Partition partition = data::make_partition(dataset, 10, 5);
  REQUIRE(partition.subsets.size() == 10);
  for (const auto& subset : partition.subsets) CHECK(subset.size() == 10);
}

TEST_CASE("partition with one subset is the identity partition") {
  data::ToyDatasetConfig config;
  config.num_classes = 2;
  config.samples_per_class = 10;
  config.feature_dim = 2;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  const data::Partition partition = data::make_partition(dataset, 1, 5);
  REQUIRE(partition.subsets.size() == 1);
  std::set<std::size_t> seen(partition.subsets[0].begin(),
                             partition.subsets[0].end());
  CHECK(seen.size() == dataset.size());
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == dataset.size() - 1);
}

TEST_CASE("partition remainder yields sizes {4,3,3}") {
  data::ToyDatasetConfig config;
  config.num_classes = 2;
  config.samples_per_class = 5;
  config.feature_dim = 2;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  const data::Partition partition = data::make_partition(dataset, 3, 9);
  std::multiset<std::size_t> sizes;
  for (const auto& subset : partition.subsets) sizes.insert(subset.size());
  CHECK(sizes == std::multiset<std::size_t>{3, 3, 4});
}

TEST_CASE("partition rejects out-of-range subset counts") {
  data::ToyDatasetConfig config;
  config.num_classes = 2;
  config.samples_per_class = 5;
  config.feature_dim = 2;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  CHECK_THROWS_AS(data::make_partition(dataset, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(data::make_partition(dataset, dataset.size() + 1, 1),
                  std::invalid_argument);
}

TEST_CASE("partitions are disjoint, covering, and balanced for every count") {
  data::ToyDatasetConfig config;
  config.num_classes = 2;
  config.samples_per_class = 25;  // 50 samples
  config.feature_dim = 2;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  for (std::size_t count = 1; count <= dataset.size(); ++count) {
    const data::Partition partition = data::make_partition(dataset, count, 17);
    REQUIRE(partition.subsets.size() == count);
    std::set<std::size_t> seen;
    std::size_t smallest = dataset.size(), largest = 0;
    for (const auto& subset : partition.subsets) {
      smallest = std::min(smallest, subset.size());
      largest = std::max(largest, subset.size());
      for (std::size_t index : subset) {
        CHECK(seen.insert(index).second);  // disjoint
        CHECK(index < dataset.size());
      }
    }
    CHECK(seen.size() == dataset.size());  // covering
    CHECK(largest - smallest <= 1);        // balanced
  }
}

TEST_CASE("stratified split produces the expected counts") {
  data::ToyDatasetConfig config;
  config.num_classes = 3;
  config.samples_per_class = 800;
  config.feature_dim = 4;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  const auto [train, test] = data::split_train_test(dataset, 0.25, 21);
  CHECK(train.size() == 1800);
  CHECK(test.size() == 600);
  std::vector<int> counts(3, 0);
  for (const auto& sample : test.samples) ++counts[sample.label];
  CHECK(counts == std::vector<int>{200, 200, 200});

  const auto [train2, test2] = data::split_train_test(dataset, 0.25, 21);
  CHECK(data::dataset_to_csv(train) == data::dataset_to_csv(train2));
  CHECK(data::dataset_to_csv(test) == data::dataset_to_csv(test2));
}

TEST_CASE("split rejects fractions outside (0,1)") {
  data::ToyDatasetConfig config;
  config.num_classes = 2;
  config.samples_per_class = 4;
  config.feature_dim = 2;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  CHECK_THROWS_AS(data::split_train_test(dataset, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(data::split_train_test(dataset, 1.0, 1), std::invalid_argument);
}

TEST_CASE("csv round trip preserves the dataset bit-for-bit") {
  data::ToyDatasetConfig config;
  config.num_classes = 3;
  config.samples_per_class = 2;
  config.feature_dim = 5;
  config.seed = 99;
  const data::Dataset dataset = data::generate_toy_dataset(config);
  const fs::path path = temp_file("roundtrip.csv");
  data::save_features_csv(dataset, path.string());
  const data::Dataset loaded = data::load_features_csv(path.string());
  CHECK(loaded.num_classes == dataset.num_classes);
  CHECK(loaded.feature_dim == dataset.feature_dim);
  REQUIRE(loaded.size() == dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    CHECK(loaded.samples[i].label == dataset.samples[i].label);
    CHECK(loaded.samples[i].features == dataset.samples[i].features);
  }
}

TEST_CASE("csv loader reports the offending row") {
  const fs::path path = temp_file("ragged.csv");
  std::ofstream(path) << "label,f1,f2\n0,1.5,2.5\n1,3.5\n";
  CHECK_THROWS_WITH_AS(data::load_features_csv(path.string()),
                       doctest::Contains("row 2"), std::runtime_error);

  const fs::path bad = temp_file("nonnumeric.csv");
  std::ofstream(bad) << "label,f1\n0,x\n";
  CHECK_THROWS_WITH_AS(data::load_features_csv(bad.string()),
                       doctest::Contains("row 1"), std::runtime_error);

  const fs::path out_of_range = temp_file("label_range.csv");
  std::ofstream(out_of_range) << "label,f1\n0,1.0\n5,2.0\n";
  CHECK_THROWS_WITH_AS(data::load_features_csv(out_of_range.string(), 3),
                       doctest::Contains("row 2"), std::runtime_error);
}

TEST_CASE("empty csv reports no samples") {
  const fs::path path = temp_file("empty.csv");
  std::ofstream(path) << "";
  CHECK_THROWS_WITH_AS(data::load_features_csv(path.string()),
                       doctest::Contains("no samples"), std::runtime_error);
  const fs::path header_only = temp_file("header_only.csv");
  std::ofstream(header_only) << "label,f1\n";
  CHECK_THROWS_WITH_AS(data::load_features_csv(header_only.string()),
                       doctest::Contains("no samples"), std::runtime_error);
}
