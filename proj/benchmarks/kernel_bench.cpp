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

// Compares the OpenMP kernels against their serial references. The two
// paths must agree bit-for-bit; this binary reports the wall-clock gap.

#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include "pateforge/kernels.hpp"
#include "pateforge/rng.hpp"

namespace {

using pateforge::Matrix;
using pateforge::Rng;
namespace kernels = pateforge::kernels;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = 2.0 * rng.uniform() - 1.0;
  return m;
}

double time_best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const double elapsed =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed < best) best = elapsed;
  }
  return best;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.data[i] != b.data[i]) return false;
  }
  return true;
}

void report(const char* name, const char* size, double serial_ms,
            double parallel_ms, bool identical) {
  std::printf("%-14s %-16s serial %9.3f ms   openmp %9.3f ms   x%5.2f   %s\n",
              name, size, serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n\n", omp_get_max_threads());
  Rng rng(42);
  constexpr int kRepeats = 5;

  {
    const Matrix a = random_matrix(512, 512, rng);
    const Matrix b = random_matrix(512, 512, rng);
    Matrix serial_out, parallel_out;
    const double serial_ms = time_best_of(
        kRepeats, [&] { kernels::serial::matmul_nt(a, b, serial_out); });
    const double parallel_ms =
        time_best_of(kRepeats, [&] { kernels::matmul_nt(a, b, parallel_out); });
    report("matmul_nt", "512x512x512", serial_ms, parallel_ms,
           bit_equal(serial_out, parallel_out));
  }
  {
    const Matrix a = random_matrix(256, 1024, rng);
    const Matrix b = random_matrix(1024, 256, rng);
    Matrix serial_out, parallel_out;
    const double serial_ms = time_best_of(
        kRepeats, [&] { kernels::serial::matmul_nn(a, b, serial_out); });
    const double parallel_ms =
        time_best_of(kRepeats, [&] { kernels::matmul_nn(a, b, parallel_out); });
    report("matmul_nn", "256x1024x256", serial_ms, parallel_ms,
           bit_equal(serial_out, parallel_out));
  }
  {
    const Matrix a = random_matrix(2048, 128, rng);
    const Matrix b = random_matrix(2048, 128, rng);
    Matrix serial_out, parallel_out;
    const double serial_ms = time_best_of(
        kRepeats, [&] { kernels::serial::matmul_tn(a, b, serial_out); });
    const double parallel_ms =
        time_best_of(kRepeats, [&] { kernels::matmul_tn(a, b, parallel_out); });
    report("matmul_tn", "128x128 of 2048", serial_ms, parallel_ms,
           bit_equal(serial_out, parallel_out));
  }
  {
    const Matrix samples = random_matrix(4096, 128, rng);
    std::vector<double> mean(samples.cols, 0.0);
    for (std::size_t i = 0; i < samples.rows; ++i) {
      for (std::size_t k = 0; k < samples.cols; ++k) mean[k] += samples(i, k);
    }
    for (double& v : mean) v /= static_cast<double>(samples.rows);
    Matrix serial_out, parallel_out;
    const double serial_ms = time_best_of(kRepeats, [&] {
      kernels::serial::covariance(samples, mean, serial_out);
    });
    const double parallel_ms = time_best_of(
        kRepeats, [&] { kernels::covariance(samples, mean, parallel_out); });
    report("covariance", "4096x128", serial_ms, parallel_ms,
           bit_equal(serial_out, parallel_out));
  }
  {
    // Radix-2 FFT against the O(N^2) reference at a size the reference can
    // still manage.
    constexpr std::size_t kN = 4096;
    std::vector<std::complex<double>> input(kN);
    for (auto& v : input) v = {2.0 * rng.uniform() - 1.0, 0.0};
    std::vector<std::complex<double>> fast;
    std::vector<std::complex<double>> slow;
    const double serial_ms =
        time_best_of(1, [&] { slow = kernels::serial::dft_naive(input); });
    const double parallel_ms = time_best_of(kRepeats, [&] {
      fast = input;
      kernels::fft_radix2(fast);
    });
    double max_err = 0.0;
    for (std::size_t i = 0; i < kN; ++i) {
      max_err = std::max(max_err, std::abs(fast[i] - slow[i]));
    }
    std::printf("%-14s %-16s naive  %9.3f ms   radix2 %9.3f ms   x%5.0f   max |err| %.2e\n",
                "fft", "N=4096", serial_ms, parallel_ms,
                serial_ms / parallel_ms, max_err);
  }
  return 0;
}
