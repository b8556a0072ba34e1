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

#include "pateforge/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace pateforge::kernels {
namespace {

// Below this many multiply-adds the OpenMP fork/join overhead dominates.
constexpr std::size_t kParallelGrain = 1 << 15;

void check_matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: inner dims");
}

void check_matmul_nn(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul_nn: inner dims");
}

void check_matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: inner dims");
}

}  // namespace

namespace serial {

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul_nt(a, b);
  out = Matrix(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(j, k);
      out(i, j) = acc;
    }
  }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul_nn(a, b);
  out = Matrix(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul_tn(a, b);
  out = Matrix(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.rows; ++k) acc += a(k, i) * b(k, j);
      out(i, j) = acc;
    }
  }
}

void covariance(const Matrix& samples, std::span<const double> mean,
                Matrix& out) {
  if (samples.rows < 2) throw std::invalid_argument("covariance: need >= 2 samples");
  if (mean.size() != samples.cols) throw std::invalid_argument("covariance: mean dim");
  const std::size_t d = samples.cols;
  const double scale = 1.0 / static_cast<double>(samples.rows - 1);
  out = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t s = 0; s < samples.rows; ++s) {
        acc += (samples(s, i) - mean[i]) * (samples(s, j) - mean[j]);
      }
      out(i, j) = acc * scale;
    }
  }
}

std::vector<std::complex<double>> dft_naive(
    std::span<const std::complex<double>> input) {
  const std::size_t n = input.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi *
                           static_cast<double>(k) * static_cast<double>(t) /
                           static_cast<double>(n);
      acc += input[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace serial

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul_nt(a, b);
  out = Matrix(a.rows, b.rows);
  const std::size_t work = a.rows * b.rows * a.cols;
  const auto rows = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for if (work >= kParallelGrain) schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k)
        acc += a(static_cast<std::size_t>(i), k) * b(j, k);
      out(static_cast<std::size_t>(i), j) = acc;
    }
  }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul_nn(a, b);
  out = Matrix(a.rows, b.cols);
  const std::size_t work = a.rows * b.cols * a.cols;
  const auto rows = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for if (work >= kParallelGrain) schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k)
        acc += a(static_cast<std::size_t>(i), k) * b(k, j);
      out(static_cast<std::size_t>(i), j) = acc;
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul_tn(a, b);
  out = Matrix(a.cols, b.cols);
  const std::size_t work = a.cols * b.cols * a.rows;
  const auto out_rows = static_cast<std::ptrdiff_t>(a.cols);
#pragma omp parallel for if (work >= kParallelGrain) schedule(static)
  for (std::ptrdiff_t i = 0; i < out_rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.rows; ++k)
        acc += a(k, static_cast<std::size_t>(i)) * b(k, j);
      out(static_cast<std::size_t>(i), j) = acc;
    }
  }
}

void covariance(const Matrix& samples, std::span<const double> mean,
                Matrix& out) {
  if (samples.rows < 2) throw std::invalid_argument("covariance: need >= 2 samples");
  if (mean.size() != samples.cols) throw std::invalid_argument("covariance: mean dim");
  const std::size_t d = samples.cols;
  const double scale = 1.0 / static_cast<double>(samples.rows - 1);
  out = Matrix(d, d);
  const std::size_t work = d * d * samples.rows;
  const auto dim = static_cast<std::ptrdiff_t>(d);
#pragma omp parallel for if (work >= kParallelGrain) schedule(static)
  for (std::ptrdiff_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t s = 0; s < samples.rows; ++s) {
        acc += (samples(s, static_cast<std::size_t>(i)) - mean[i]) *
               (samples(s, j) - mean[j]);
      }
      out(static_cast<std::size_t>(i), j) = acc * scale;
    }
  }
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& values) {
  const std::size_t n = values.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft_radix2: length must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(values[i], values[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                     std::sin(angle * static_cast<double>(k)));
        const std::complex<double> u = values[base + k];
        const std::complex<double> v = values[base + k + len / 2] * w;
        values[base + k] = u + v;
        values[base + k + len / 2] = u - v;
      }
    }
  }
}

}  // namespace pateforge::kernels
