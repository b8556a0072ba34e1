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

#include "pateforge/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include "pateforge/errors.hpp"
#include "pateforge/kernels.hpp"
#include "pateforge/rng.hpp"

namespace pateforge::eval {
namespace {

// Cyclic Jacobi eigendecomposition for symmetric matrices. Deterministic;
// plenty accurate for the covariance sizes used here.
void jacobi_eigen_symmetric(const Matrix& input, std::vector<double>& values,
                            Matrix& vectors) {
  const std::size_t n = input.rows;
  Matrix a = input;
  vectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) vectors(i, i) = 1.0;

  double norm = 0.0;
  for (double v : a.data) norm += v * v;
  norm = std::sqrt(norm);
  const double stop = 1e-14 * std::max(norm, 1.0);

  constexpr int kMaxSweeps = 64;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    off = std::sqrt(2.0 * off);
    if (off <= stop) break;
    if (sweep == kMaxSweeps - 1) {
      throw NumericalError("jacobi eigendecomposition did not converge");
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= stop / static_cast<double>(n * n)) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors(k, p);
          const double vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
}

double trace(const Matrix& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) t += m(i, i);
  return t;
}

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

double parse_double(const std::string& field, const std::string& path) {
  double value = 0.0;
  const auto result =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc() || result.ptr != field.data() + field.size()) {
    throw std::runtime_error(path + ": field '" + field + "' is not numeric");
  }
  return value;
}

}  // namespace

GaussianStats fit_gaussian(const Matrix& samples) {
  if (samples.rows < 2) {
    throw std::invalid_argument("fit_gaussian: need at least 2 samples");
  }
  GaussianStats stats;
  stats.sample_count = samples.rows;
  stats.mean.assign(samples.cols, 0.0);
  for (std::size_t i = 0; i < samples.rows; ++i) {
    for (std::size_t k = 0; k < samples.cols; ++k) {
      stats.mean[k] += samples(i, k);
    }
  }
  for (double& v : stats.mean) v /= static_cast<double>(samples.rows);
  kernels::covariance(samples, stats.mean, stats.covariance);
  // Enforce exact symmetry.
  for (std::size_t i = 0; i < samples.cols; ++i) {
    for (std::size_t j = i + 1; j < samples.cols; ++j) {
      const double v = 0.5 * (stats.covariance(i, j) + stats.covariance(j, i));
      stats.covariance(i, j) = v;
      stats.covariance(j, i) = v;
    }
  }
  return stats;
}

Matrix matrix_sqrt_psd(const Matrix& a, double symmetry_tol) {
  if (a.rows != a.cols) {
    throw std::invalid_argument("matrix_sqrt_psd: matrix must be square");
  }
  double scale = 0.0;
  for (double v : a.data) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = i + 1; j < a.cols; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > symmetry_tol * std::max(1.0, scale)) {
        throw std::invalid_argument("matrix_sqrt_psd: input is not symmetric");
      }
    }
  }
  Matrix sym(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      sym(i, j) = 0.5 * (a(i, j) + a(j, i));
    }
  }
  std::vector<double> values;
  Matrix vectors;
  jacobi_eigen_symmetric(sym, values, vectors);
  double max_value = 0.0;
  for (double v : values) max_value = std::max(max_value, v);
  std::vector<double> roots(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    // Clip numerical negatives relative to the spectrum scale.
    const double clipped =
        values[i] < 0.0 && values[i] > -1e-10 * std::max(max_value, 1.0)
            ? 0.0
            : values[i];
    roots[i] = clipped > 0.0 ? std::sqrt(clipped) : 0.0;
  }
  Matrix result(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.rows; ++k) {
        acc += vectors(i, k) * roots[k] * vectors(j, k);
      }
      result(i, j) = acc;
    }
  }
  return result;
}

FidReport frechet_distance(const GaussianStats& s1, const GaussianStats& s2) {
  if (s1.mean.size() != s2.mean.size()) {
    throw std::invalid_argument("frechet_distance: dimension mismatch");
  }
  FidReport report;
  report.count1 = s1.sample_count;
  report.count2 = s2.sample_count;
  for (std::size_t k = 0; k < s1.mean.size(); ++k) {
    const double diff = s1.mean[k] - s2.mean[k];
    report.mean_term += diff * diff;
  }
  const Matrix root1 = matrix_sqrt_psd(s1.covariance);
  Matrix inner, product;
  kernels::matmul_nn(root1, s2.covariance, inner);
  kernels::matmul_nn(inner, root1, product);
  const Matrix cross = matrix_sqrt_psd(product);
  report.trace_term =
      trace(s1.covariance) + trace(s2.covariance) - 2.0 * trace(cross);
  const double fid = report.mean_term + report.trace_term;
  if (fid < -1e-8) {
    throw NumericalError("frechet_distance: strongly negative value " +
                         std::to_string(fid));
  }
  report.fid = std::max(fid, 0.0);
  return report;
}

double accuracy(const nn::DenseNet& model, const data::Dataset& dataset) {
  if (dataset.size() == 0) {
    throw std::invalid_argument("accuracy: empty dataset");
  }
  const Matrix logits =
      nn::logits_for(model, data::features_as_matrix(dataset));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    int best = 0;
    for (std::size_t j = 1; j < logits.cols; ++j) {
      if (logits(i, j) > logits(i, static_cast<std::size_t>(best))) {
        best = static_cast<int>(j);
      }
    }
    if (best == dataset.samples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

AccuracyReport summarize(std::vector<double> values) {
  AccuracyReport report;
  report.per_trial = std::move(values);
  if (report.per_trial.empty()) return report;
  for (double v : report.per_trial) report.mean += v;
  report.mean /= static_cast<double>(report.per_trial.size());
  if (report.per_trial.size() > 1) {
    double ss = 0.0;
    for (double v : report.per_trial) {
      ss += (v - report.mean) * (v - report.mean);
    }
    report.stddev =
        std::sqrt(ss / static_cast<double>(report.per_trial.size() - 1));
  }
  return report;
}

AccuracyReport run_trials(
    std::uint64_t master_seed, std::size_t trials,
    const std::function<double(std::uint64_t)>& trial_fn) {
  std::vector<double> values(trials, 0.0);
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    try {
      values[static_cast<std::size_t>(t)] =
          trial_fn(hash_seed(master_seed, "trial", static_cast<std::uint64_t>(t)));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return summarize(std::move(values));
}

std::string format_mean_std(double mean, double stddev) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.1f±%.1f", mean, stddev);
  return buffer;
}

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "epsilon,mean_accuracy,std,fid_mean,fid_std\n";
  for (const SummaryRow& row : rows) {
    out << data::format_double(row.epsilon) << ','
        << data::format_double(row.mean_accuracy) << ','
        << data::format_double(row.std_accuracy) << ','
        << data::format_double(row.fid_mean) << ','
        << data::format_double(row.fid_std) << "\n";
  }
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": missing header");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 5) {
      throw std::runtime_error(path + ": malformed summary row");
    }
    SummaryRow row;
    row.epsilon = parse_double(fields[0], path);
    row.mean_accuracy = parse_double(fields[1], path);
    row.std_accuracy = parse_double(fields[2], path);
    row.fid_mean = parse_double(fields[3], path);
    row.fid_std = parse_double(fields[4], path);
    rows.push_back(row);
  }
  return rows;
}

void write_json(const nlohmann::json& document, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << document.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace pateforge::eval
