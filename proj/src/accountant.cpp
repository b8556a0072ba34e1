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

#include "pateforge/accountant.hpp"

#include <limits>
#include <stdexcept>

namespace pateforge::privacy {

std::string convention_name(Convention convention) {
  return convention == Convention::kPaper ? "paper" : "strict";
}

Convention convention_from_name(const std::string& name) {
  if (name == "paper") return Convention::kPaper;
  if (name == "strict") return Convention::kStrict;
  throw std::invalid_argument("unknown privacy convention: " + name);
}

double scale_for_budget(double epsilon, std::uint64_t queries,
                        Convention convention) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("scale_for_budget: epsilon must be > 0");
  }
  if (queries == 0) {
    throw std::invalid_argument("scale_for_budget: need at least one query");
  }
  const double k = static_cast<double>(queries);
  return convention == Convention::kPaper ? k / (2.0 * epsilon)
                                          : 2.0 * k / epsilon;
}

double per_query_epsilon(double scale_b) {
  if (scale_b < 0.0) {
    throw std::invalid_argument("per_query_epsilon: scale must be >= 0");
  }
  if (scale_b == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 / scale_b;
}

double spent_epsilon(double scale_b, std::uint64_t queries) {
  if (queries == 0) return 0.0;
  return per_query_epsilon(scale_b) * static_cast<double>(queries);
}

PrivacyBudget make_budget(double epsilon, std::uint64_t queries,
                          Convention convention, double delta) {
  PrivacyBudget budget;
  budget.epsilon_target = epsilon;
  budget.delta = delta;
  budget.query_budget = queries;
  budget.convention = convention;
  budget.scale_b = scale_for_budget(epsilon, queries, convention);
  return budget;
}

nlohmann::json BudgetReport::to_json() const {
  nlohmann::json j;
  j["convention"] = convention_name(convention);
  j["epsilon_target"] = epsilon_target;
  j["delta"] = delta;
  j["K_budget"] = query_budget;
  j["K_used"] = queries_used;
  j["scale_b"] = scale_budget;
  j["scale_b_used"] = scale_used;
  j["epsilon_spent"] =
      std::isinf(epsilon_spent) ? nlohmann::json("non-private")
                                : nlohmann::json(epsilon_spent);
  j["verdict"] = pass ? "pass" : "fail";
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

BudgetReport assert_budget(const pate::LabelingLog& log,
                           const PrivacyBudget& budget) {
  BudgetReport report;
  report.convention = budget.convention;
  report.epsilon_target = budget.epsilon_target;
  report.delta = budget.delta;
  report.query_budget = budget.query_budget;
  report.queries_used = log.queries;
  report.scale_budget = budget.scale_b;
  report.scale_used = log.scale_b;
  report.epsilon_spent = spent_epsilon(log.scale_b, log.queries);
  if (log.queries > budget.query_budget) {
    report.pass = false;
    report.reason = "query budget exceeded by " +
                    std::to_string(log.queries - budget.query_budget);
  } else if (log.scale_b < budget.scale_b) {
    report.pass = false;
    report.reason = "insufficient noise: used scale " +
                    std::to_string(log.scale_b) + " below budgeted " +
                    std::to_string(budget.scale_b);
  } else {
    report.pass = true;
  }
  return report;
}

}  // namespace pateforge::privacy
