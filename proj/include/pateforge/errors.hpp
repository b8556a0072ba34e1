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

#ifndef PATEFORGE_ERRORS_HPP_
#define PATEFORGE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pateforge {

// Error categories the CLI maps onto exit codes (config 2, missing or stale
// artifact 3, budget violation 4, numerical failure 5).

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct MissingArtifactError : std::runtime_error {
  explicit MissingArtifactError(const std::string& what)
      : std::runtime_error(what) {}
};

struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pateforge

#endif  // PATEFORGE_ERRORS_HPP_
