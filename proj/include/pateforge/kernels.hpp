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

#ifndef PATEFORGE_KERNELS_HPP_
#define PATEFORGE_KERNELS_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pateforge/matrix.hpp"

namespace pateforge::kernels {

// Compute kernels used by the network engine, the feature pipeline, and the
// evaluator. Every OpenMP kernel parallelizes over independent output
// elements and keeps the inner accumulation order fixed, so results are
// bit-identical to the serial references regardless of thread count.

namespace serial {

// out = a * b^T, a is m x k, b is n x k, out becomes m x n.
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);

// out = a * b, a is m x k, b is k x n, out becomes m x n.
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);

// out = a^T * b, a is k x m, b is k x n, out becomes m x n.
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);

// Unbiased covariance of row samples around the given mean: out becomes
// d x d with out(i,j) = sum_s (x(s,i)-mean_i)(x(s,j)-mean_j) / (n-1).
void covariance(const Matrix& samples, std::span<const double> mean,
                Matrix& out);

// Textbook O(N^2) DFT, X_k = sum_n x_n exp(-2*pi*i*k*n/N). Reference used
// by tests and the benchmark to check the radix-2 path.
std::vector<std::complex<double>> dft_naive(
    std::span<const std::complex<double>> input);

}  // namespace serial

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
void covariance(const Matrix& samples, std::span<const double> mean,
                Matrix& out);

bool is_power_of_two(std::size_t n);

// In-place iterative radix-2 FFT. Throws std::invalid_argument unless the
// length is a nonzero power of two.
void fft_radix2(std::vector<std::complex<double>>& values);

}  // namespace pateforge::kernels

#endif  // PATEFORGE_KERNELS_HPP_
