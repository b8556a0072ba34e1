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

#ifndef PATEFORGE_EVALUATION_HPP_
#define PATEFORGE_EVALUATION_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pateforge/data.hpp"
#include "pateforge/matrix.hpp"
#include "pateforge/nn.hpp"

namespace pateforge::eval {

// Frechet distance between fitted Gaussians, classification accuracy, and
// multi-trial experiment statistics.

struct GaussianStats {
  std::vector<double> mean;
  Matrix covariance;  // symmetric PSD up to clipping
  std::size_t sample_count = 0;
};

// Sample mean and unbiased (n-1) covariance; symmetry enforced by averaging
// with the transpose. Needs at least two sample rows.
GaussianStats fit_gaussian(const Matrix& samples);

// Symmetric PSD square root via Jacobi eigendecomposition, with small
// negative eigenvalues clipped to zero.
Matrix matrix_sqrt_psd(const Matrix& a, double symmetry_tol = 1e-8);

struct FidReport {
  double fid = 0.0;
  double mean_term = 0.0;
  double trace_term = 0.0;
  std::size_t count1 = 0;
  std::size_t count2 = 0;
};

// ||mu1 - mu2||^2 + tr(S1 + S2 - 2*(S1 S2)^(1/2)); the cross term is
// computed as the PSD root of S1^(1/2) S2 S1^(1/2) for numerical symmetry.
FidReport frechet_distance(const GaussianStats& s1, const GaussianStats& s2);

// Fraction of argmax predictions equal to the labels; ties toward the
// lowest class index.
double accuracy(const nn::DenseNet& model, const data::Dataset& dataset);

struct AccuracyReport {
  std::vector<double> per_trial;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single trial
};

AccuracyReport summarize(std::vector<double> values);

// Runs trial_fn once per trial with a seed derived from
// (master_seed, "trial", t); trials are independent and the report does not
// depend on execution order.
AccuracyReport run_trials(std::uint64_t master_seed, std::size_t trials,
                          const std::function<double(std::uint64_t)>& trial_fn);

// "35.2±0.5" style cell used in report tables.
std::string format_mean_std(double mean, double stddev);

struct SummaryRow {
  double epsilon = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double fid_mean = 0.0;
  double fid_std = 0.0;
};

// CSV with header "epsilon,mean_accuracy,std,fid_mean,fid_std"; values
// round-trip at 17 significant digits.
void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path);
std::vector<SummaryRow> read_summary_csv(const std::string& path);

void write_json(const nlohmann::json& document, const std::string& path);
nlohmann::json read_json(const std::string& path);

}  // namespace pateforge::eval

#endif  // PATEFORGE_EVALUATION_HPP_
