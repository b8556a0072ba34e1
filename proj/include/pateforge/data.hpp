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

#ifndef PATEFORGE_DATA_HPP_
#define PATEFORGE_DATA_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pateforge/matrix.hpp"

namespace pateforge::data {

struct LabeledSample {
  std::vector<double> features;
  int label = 0;
};

// Immutable after construction; safe to share read-only across threads.
struct Dataset {
  std::vector<LabeledSample> samples;
  int num_classes = 0;
  std::size_t feature_dim = 0;

  std::size_t size() const { return samples.size(); }
};

// Index lists into a parent Dataset. Subsets are pairwise disjoint, cover
// the full index set, and differ in size by at most one.
struct Partition {
  std::vector<std::vector<std::size_t>> subsets;
};

struct ToyDatasetConfig {
  int num_classes = 3;
  int samples_per_class = 800;
  std::size_t feature_dim = 64;
  double separation = 6.0;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
};

// Mean of class c in the synthetic mixture; exposed so tests can evaluate
// the nearest-mean oracle against the generating distribution.
std::vector<double> toy_class_mean(const ToyDatasetConfig& config, int c);

// Isotropic Gaussian blobs, one per class, bit-deterministic in the seed.
Dataset generate_toy_dataset(const ToyDatasetConfig& config);

// Seeded shuffle followed by round-robin assignment into subset_count
// subsets. Subset sizes differ by at most one.
Partition make_partition(const Dataset& dataset, std::size_t subset_count,
                         std::uint64_t seed);

// Stratified split; returns (train, test). test_fraction must lie in (0,1).
std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset,
                                             double test_fraction,
                                             std::uint64_t seed);

// CSV with header "label,f1,...,fd", UTF-8, LF line endings. Values are
// written with 17 significant digits so a round trip is bit-faithful.
std::string dataset_to_csv(const Dataset& dataset);
void save_features_csv(const Dataset& dataset, const std::string& path);

// expected_classes = 0 infers the class count as max(label)+1.
Dataset load_features_csv(const std::string& path, int expected_classes = 0);

// Unlabeled feature rows with header "f1,...,fd"; used for synthetic
// samples before labeling.
void save_matrix_csv(const Matrix& rows, const std::string& path);
Matrix load_matrix_csv(const std::string& path);

Matrix features_as_matrix(const Dataset& dataset);

std::string format_double(double value);

}  // namespace pateforge::data

#endif  // PATEFORGE_DATA_HPP_
