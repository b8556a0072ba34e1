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

#ifndef PATEFORGE_RNG_HPP_
#define PATEFORGE_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace pateforge {

// Stable 64-bit seed for a named stochastic entity. Derived streams are
// independent of execution order, so parallel code seeded this way stays
// bit-reproducible.
std::uint64_t hash_seed(std::uint64_t master_seed, std::string_view kind,
                        std::uint64_t index);

// Deterministic double-precision RNG. All floating-point draws are built
// from the top 53 bits of mt19937_64 output, so the stream does not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (-1/2, 1/2).
  double uniform_signed() {
    double u;
    do {
      u = uniform() - 0.5;
    } while (u == -0.5);
    return u;
  }

  // Standard normal via Box-Muller (cosine branch, two uniforms per draw).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace pateforge

#endif  // PATEFORGE_RNG_HPP_
