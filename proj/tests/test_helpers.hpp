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

#ifndef PATEFORGE_TESTS_TEST_HELPERS_HPP_
#define PATEFORGE_TESTS_TEST_HELPERS_HPP_

#include <algorithm>
#include <cmath>
#include <functional>

#include "pateforge/matrix.hpp"
#include "pateforge/nn.hpp"
#include "pateforge/rng.hpp"

namespace pateforge::testing {

// Central finite differences over every parameter of the net; returns the
// worst relative disagreement against the supplied analytic gradients. The
// loss closure must be a pure function of the net.
inline double max_fd_rel_error(nn::DenseNet& net, const nn::Gradients& analytic,
                               const std::function<double(const nn::DenseNet&)>& loss_fn,
                               double h = 1e-5) {
  double worst = 0.0;
  auto probe = [&](double& param, double grad) {
    const double saved = param;
    param = saved + h;
    const double up = loss_fn(net);
    param = saved - h;
    const double down = loss_fn(net);
    param = saved;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({1e-6, std::abs(fd), std::abs(grad)});
    worst = std::max(worst, std::abs(fd - grad) / denom);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t i = 0; i < net.layers[l].weights.size(); ++i) {
      probe(net.layers[l].weights.data[i], analytic.weights[l].data[i]);
    }
    for (std::size_t i = 0; i < net.layers[l].bias.size(); ++i) {
      probe(net.layers[l].bias[i], analytic.bias[l][i]);
    }
  }
  return worst;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

inline bool nets_bit_equal(const nn::DenseNet& a, const nn::DenseNet& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].weights.data != b.layers[l].weights.data) return false;
    if (a.layers[l].bias != b.layers[l].bias) return false;
  }
  return true;
}

inline bool matrices_bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

}  // namespace pateforge::testing

#endif  // PATEFORGE_TESTS_TEST_HELPERS_HPP_
