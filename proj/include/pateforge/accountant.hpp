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

#ifndef PATEFORGE_ACCOUNTANT_HPP_
#define PATEFORGE_ACCOUNTANT_HPP_

#include <cstdint>
#include <string>

#include <json.hpp>

#include "pateforge/pate.hpp"

namespace pateforge::privacy {

// Maps privacy targets to Laplace scales and back. Two conventions are
// exposed:
//   paper:  b = K / (2*epsilon); the classic PATE parameterization, read
//           with the lambda value as the noise scale. Composed over K
//           queries it overshoots the target by a factor of 4.
//   strict: b = 2*K / epsilon; K compositions of the (2/b)-DP noisy argmax
//           then sum to exactly epsilon.
// strict is the default anywhere a guarantee is claimed.

enum class Convention { kPaper, kStrict };

std::string convention_name(Convention convention);
Convention convention_from_name(const std::string& name);

struct PrivacyBudget {
  double epsilon_target = 0.0;
  double delta = 1e-5;  // carried for reporting; unused by the pure-Laplace analysis
  std::uint64_t query_budget = 0;  // K
  double scale_b = 0.0;
  Convention convention = Convention::kStrict;
};

double scale_for_budget(double epsilon, std::uint64_t queries,
                        Convention convention);

// 2/b per noisy-argmax query (vote sensitivity: one moved vote changes two
// counts by one each). Infinite for b = 0, i.e. non-private.
double per_query_epsilon(double scale_b);

// Naive composition: queries * per_query_epsilon(scale_b). Exactly additive
// by construction.
double spent_epsilon(double scale_b, std::uint64_t queries);

PrivacyBudget make_budget(double epsilon, std::uint64_t queries,
                          Convention convention, double delta = 1e-5);

struct BudgetReport {
  Convention convention = Convention::kStrict;
  double epsilon_target = 0.0;
  double delta = 1e-5;
  std::uint64_t query_budget = 0;
  std::uint64_t queries_used = 0;
  double scale_budget = 0.0;
  double scale_used = 0.0;
  double epsilon_spent = 0.0;
  bool pass = false;
  std::string reason;

  nlohmann::json to_json() const;
};

// Fails when the log shows more queries than budgeted or less noise than
// budgeted. Every pipeline run ends with this assertion.
BudgetReport assert_budget(const pate::LabelingLog& log,
                           const PrivacyBudget& budget);

}  // namespace pateforge::privacy

#endif  // PATEFORGE_ACCOUNTANT_HPP_
