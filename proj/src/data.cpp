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

#include "pateforge/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "pateforge/rng.hpp"

namespace pateforge::data {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double_field(const std::string& field, std::size_t row) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw std::runtime_error("row " + std::to_string(row) + ": field '" +
                             field + "' is not numeric");
  }
  if (!std::isfinite(value)) {
    throw std::runtime_error("row " + std::to_string(row) +
                             ": non-finite feature value");
  }
  return value;
}

int parse_label_field(const std::string& field, std::size_t row) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw std::runtime_error("row " + std::to_string(row) + ": label '" +
                             field + "' is not an integer");
  }
  return value;
}

// Seeded Fisher-Yates.
void shuffle_indices(std::vector<std::size_t>& indices, Rng& rng) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(indices[i - 1], indices[j]);
  }
}

std::string feature_header(std::size_t dim) {
  std::string header;
  for (std::size_t k = 0; k < dim; ++k) {
    if (k > 0) header += ',';
    header += "f" + std::to_string(k + 1);
  }
  return header;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A trailing empty line from the final LF is not a data row.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                    std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

std::vector<double> toy_class_mean(const ToyDatasetConfig& config, int c) {
  std::vector<double> mean(config.feature_dim, 0.0);
  const auto dim = static_cast<int>(config.feature_dim);
  const int direction = c % dim;
  const int block = c / dim;
  mean[static_cast<std::size_t>(direction)] =
      config.separation * static_cast<double>(block + 1);
  return mean;
}

Dataset generate_toy_dataset(const ToyDatasetConfig& config) {
  if (config.num_classes < 2) {
    throw std::invalid_argument("toy dataset: num_classes must be >= 2");
  }
  if (config.feature_dim == 0) {
    throw std::invalid_argument("toy dataset: feature_dim must be >= 1");
  }
  if (config.samples_per_class < 1) {
    throw std::invalid_argument("toy dataset: samples_per_class must be >= 1");
  }
  if (config.separation <= 0.0) {
    throw std::invalid_argument("toy dataset: separation must be > 0");
  }
  Dataset dataset;
  dataset.num_classes = config.num_classes;
  dataset.feature_dim = config.feature_dim;
  dataset.samples.reserve(static_cast<std::size_t>(config.num_classes) *
                          static_cast<std::size_t>(config.samples_per_class));
  for (int c = 0; c < config.num_classes; ++c) {
    Rng rng(hash_seed(config.seed, "toy-class", static_cast<std::uint64_t>(c)));
    const std::vector<double> mean = toy_class_mean(config, c);
    for (int s = 0; s < config.samples_per_class; ++s) {
      LabeledSample sample;
      sample.label = c;
      sample.features.resize(config.feature_dim);
      for (std::size_t k = 0; k < config.feature_dim; ++k) {
        sample.features[k] = mean[k] + config.noise_scale * rng.normal();
      }
      dataset.samples.push_back(std::move(sample));
    }
  }
  return dataset;
}

Partition make_partition(const Dataset& dataset, std::size_t subset_count,
                         std::uint64_t seed) {
  if (subset_count == 0 || subset_count > dataset.size()) {
    throw std::invalid_argument(
        "partition: subset count must lie in [1, dataset size]");
  }
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(hash_seed(seed, "partition", 0));
  shuffle_indices(order, rng);
  Partition partition;
  partition.subsets.resize(subset_count);
  for (std::size_t i = 0; i < order.size(); ++i) {
    partition.subsets[i % subset_count].push_back(order[i]);
  }
  return partition;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset,
                                             double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split: test_fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(
      static_cast<std::size_t>(dataset.num_classes));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.samples[i].label)].push_back(i);
  }
  std::vector<bool> in_test(dataset.size(), false);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& indices = by_class[c];
    Rng rng(hash_seed(seed, "split-class", c));
    shuffle_indices(indices, rng);
    const auto take = static_cast<std::size_t>(std::llround(
        test_fraction * static_cast<double>(indices.size())));
    for (std::size_t i = 0; i < take && i < indices.size(); ++i) {
      in_test[indices[i]] = true;
    }
  }
  Dataset train, test;
  train.num_classes = test.num_classes = dataset.num_classes;
  train.feature_dim = test.feature_dim = dataset.feature_dim;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (in_test[i] ? test : train).samples.push_back(dataset.samples[i]);
  }
  return {std::move(train), std::move(test)};
}

std::string dataset_to_csv(const Dataset& dataset) {
  std::string out = "label," + feature_header(dataset.feature_dim) + "\n";
  for (const LabeledSample& sample : dataset.samples) {
    out += std::to_string(sample.label);
    for (double v : sample.features) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void save_features_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << dataset_to_csv(dataset);
}

Dataset load_features_csv(const std::string& path, int expected_classes) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": no samples");
  const std::vector<std::string> header = split_fields(lines[0]);
  if (header.size() < 2 || header[0] != "label") {
    throw std::runtime_error(path + ": expected header 'label,f1,...,fd'");
  }
  const std::size_t dim = header.size() - 1;
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[k + 1] != "f" + std::to_string(k + 1)) {
      throw std::runtime_error(path + ": expected header 'label,f1,...,fd'");
    }
  }
  if (lines.size() == 1) throw std::runtime_error(path + ": no samples");

  Dataset dataset;
  dataset.feature_dim = dim;
  int max_label = -1;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const std::vector<std::string> fields = split_fields(lines[row]);
    if (fields.size() != dim + 1) {
      throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                               std::to_string(dim + 1) + " fields, got " +
                               std::to_string(fields.size()));
    }
    LabeledSample sample;
    sample.label = parse_label_field(fields[0], row);
    if (sample.label < 0) {
      throw std::runtime_error("row " + std::to_string(row) +
                               ": negative label");
    }
    if (expected_classes > 0 && sample.label >= expected_classes) {
      throw std::runtime_error("row " + std::to_string(row) + ": label " +
                               std::to_string(sample.label) +
                               " out of range [0, " +
                               std::to_string(expected_classes) + ")");
    }
    sample.features.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      sample.features[k] = parse_double_field(fields[k + 1], row);
    }
    max_label = std::max(max_label, sample.label);
    dataset.samples.push_back(std::move(sample));
  }
  dataset.num_classes =
      expected_classes > 0 ? expected_classes : max_label + 1;
  return dataset;
}

void save_matrix_csv(const Matrix& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << feature_header(rows.cols) << "\n";
  for (std::size_t i = 0; i < rows.rows; ++i) {
    for (std::size_t k = 0; k < rows.cols; ++k) {
      if (k > 0) out << ',';
      out << format_double(rows(i, k));
    }
    out << "\n";
  }
}

Matrix load_matrix_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": no samples");
  const std::vector<std::string> header = split_fields(lines[0]);
  const std::size_t dim = header.size();
  if (lines.size() == 1) throw std::runtime_error(path + ": no samples");
  Matrix rows(lines.size() - 1, dim);
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const std::vector<std::string> fields = split_fields(lines[row]);
    if (fields.size() != dim) {
      throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                               std::to_string(dim) + " fields, got " +
                               std::to_string(fields.size()));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      rows(row - 1, k) = parse_double_field(fields[k], row);
    }
  }
  return rows;
}

Matrix features_as_matrix(const Dataset& dataset) {
  Matrix m(dataset.size(), dataset.feature_dim);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t k = 0; k < dataset.feature_dim; ++k) {
      m(i, k) = dataset.samples[i].features[k];
    }
  }
  return m;
}

}  // namespace pateforge::data
