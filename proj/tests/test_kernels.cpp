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

#include <complex>
#include <vector>

#include <doctest.h>
#include <omp.h>

#include "pateforge/kernels.hpp"
#include "test_helpers.hpp"

using namespace pateforge;
using testing::matrices_bit_equal;
using testing::random_matrix;

TEST_CASE("openmp kernels are bit-identical to the serial references") {
  Rng rng(11);
  // Sizes straddling the parallelization threshold.
  const std::vector<std::pair<std::size_t, std::size_t>> sizes = {
      {3, 5}, {17, 9}, {64, 64}, {130, 70}};
  for (const auto& [m, k] : sizes) {
    const Matrix a = random_matrix(m, k, rng);
    const Matrix b = random_matrix(m + 3, k, rng);
    Matrix serial_out, parallel_out;
    kernels::serial::matmul_nt(a, b, serial_out);
    kernels::matmul_nt(a, b, parallel_out);
    CHECK(matrices_bit_equal(serial_out, parallel_out));

    const Matrix c = random_matrix(k, m + 1, rng);
    kernels::serial::matmul_nn(a, c, serial_out);
    kernels::matmul_nn(a, c, parallel_out);
    CHECK(matrices_bit_equal(serial_out, parallel_out));

    const Matrix d = random_matrix(m, k + 2, rng);
    kernels::serial::matmul_tn(a, d, serial_out);
    kernels::matmul_tn(a, d, parallel_out);
    CHECK(matrices_bit_equal(serial_out, parallel_out));
  }
}

TEST_CASE("covariance kernel matches the serial reference bitwise") {
  Rng rng(12);
  const Matrix samples = random_matrix(200, 24, rng);
  std::vector<double> mean(samples.cols, 0.0);
  for (std::size_t i = 0; i < samples.rows; ++i) {
    for (std::size_t k = 0; k < samples.cols; ++k) mean[k] += samples(i, k);
  }
  for (double& v : mean) v /= static_cast<double>(samples.rows);
  Matrix serial_out, parallel_out;
  kernels::serial::covariance(samples, mean, serial_out);
  kernels::covariance(samples, mean, parallel_out);
  CHECK(matrices_bit_equal(serial_out, parallel_out));
  // Bitwise symmetric by construction.
  for (std::size_t i = 0; i < parallel_out.rows; ++i) {
    for (std::size_t j = 0; j < parallel_out.cols; ++j) {
      CHECK(parallel_out(i, j) == parallel_out(j, i));
    }
  }
}

TEST_CASE("kernel results do not depend on the thread count") {
  Rng rng(13);
  const Matrix a = random_matrix(96, 80, rng);
  const Matrix b = random_matrix(72, 80, rng);
  const int saved = omp_get_max_threads();
  Matrix single, multi;
  omp_set_num_threads(1);
  kernels::matmul_nt(a, b, single);
  omp_set_num_threads(saved > 1 ? saved : 4);
  kernels::matmul_nt(a, b, multi);
  omp_set_num_threads(saved);
  CHECK(matrices_bit_equal(single, multi));
}

TEST_CASE("radix-2 fft rejects non-power-of-two lengths") {
  std::vector<std::complex<double>> values(12, {1.0, 0.0});
  CHECK_THROWS_AS(kernels::fft_radix2(values), std::invalid_argument);
  std::vector<std::complex<double>> empty;
  CHECK_THROWS_AS(kernels::fft_radix2(empty), std::invalid_argument);
}

TEST_CASE("radix-2 fft matches the naive dft across sizes") {
  Rng rng(14);
  for (std::size_t n = 2; n <= 256; n *= 2) {
    std::vector<std::complex<double>> input(n);
    for (auto& v : input) v = {2.0 * rng.uniform() - 1.0, 0.0};
    std::vector<std::complex<double>> fast = input;
    kernels::fft_radix2(fast);
    const std::vector<std::complex<double>> slow =
        kernels::serial::dft_naive(input);
    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_err = std::max(max_err, std::abs(fast[i] - slow[i]));
    }
    CHECK(max_err < 1e-9);
  }
}
