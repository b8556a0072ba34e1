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

#include <cmath>
#include <complex>

#include <doctest.h>

#include "pateforge/kernels.hpp"
#include "pateforge/rng.hpp"
#include "pateforge/signal.hpp"
#include "test_helpers.hpp"

using namespace pateforge;

namespace {

signal::Waveform sine_wave(std::size_t length, double cycles_per_window,
                           std::size_t window) {
  signal::Waveform waveform;
  waveform.sample_rate = 16000.0;
  waveform.samples.resize(length);
  for (std::size_t n = 0; n < length; ++n) {
    waveform.samples[n] = std::sin(2.0 * std::numbers::pi * cycles_per_window *
                                   static_cast<double>(n) /
                                   static_cast<double>(window));
  }
  return waveform;
}

}  // namespace

TEST_CASE("framing produces the expected frame counts") {
  signal::SpectrogramConfig config;
  config.dft_size = 1024;
  config.hop_length = 512;
  signal::Waveform waveform;
  waveform.samples.assign(1024, 0.5);
  CHECK(signal::frame_and_window(waveform, config).size() == 1);
  waveform.samples.assign(2048, 0.5);
  CHECK(signal::frame_and_window(waveform, config).size() == 3);
  waveform.samples.assign(1023, 0.5);
  CHECK_THROWS_AS(signal::frame_and_window(waveform, config),
                  std::invalid_argument);
}

TEST_CASE("hann window zeroes the frame edges") {
  signal::SpectrogramConfig config;
  config.dft_size = 64;
  config.hop_length = 64;
  signal::Waveform waveform;
  waveform.samples.assign(64, 1.0);
  const auto frames = signal::frame_and_window(waveform, config);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].front() == 0.0);
  CHECK(frames[0].back() == 0.0);
  CHECK(frames[0][32] > 0.9);
}

TEST_CASE("dft of a unit impulse is all ones") {
  std::vector<double> impulse(16, 0.0);
  impulse[0] = 1.0;
  const auto spectrum = signal::dft(impulse);
  for (const auto& bin : spectrum) {
    CHECK(std::abs(bin - std::complex<double>(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("dft of constant ones concentrates at dc") {
  const std::vector<double> ones(8, 1.0);
  const auto spectrum = signal::dft(ones);
  CHECK(std::abs(spectrum[0] - std::complex<double>(8.0, 0.0)) < 1e-12);
  for (std::size_t k = 1; k < 8; ++k) {
    CHECK(std::abs(spectrum[k]) < 1e-12);
  }
}

TEST_CASE("parseval holds against the naive reference at N=64") {
  Rng rng(3);
  std::vector<double> values(64);
  for (double& v : values) v = 2.0 * rng.uniform() - 1.0;
  const auto spectrum = signal::dft(values);
  double time_energy = 0.0;
  for (double v : values) time_energy += v * v;
  double freq_energy = 0.0;
  for (const auto& bin : spectrum) freq_energy += std::norm(bin);
  freq_energy /= 64.0;
  CHECK(std::abs(time_energy - freq_energy) / time_energy < 1e-10);

  std::vector<std::complex<double>> complex_input(values.begin(), values.end());
  const auto naive = kernels::serial::dft_naive(complex_input);
  for (std::size_t k = 0; k < 64; ++k) {
    CHECK(std::abs(naive[k] - spectrum[k]) < 1e-9);
  }
}

TEST_CASE("two mel bands center at the one-third and two-third mel points") {
  signal::SpectrogramConfig config;
  config.dft_size = 1024;
  config.hop_length = 512;
  config.mel_bands = 2;
  config.mfcc_count = 2;
  const double sample_rate = 16000.0;
  const auto bank = signal::mel_filterbank_build(config, sample_rate);
  const double mel_hi = signal::hz_to_mel(sample_rate / 2.0);
  CHECK(bank.center_hz[0] ==
        doctest::Approx(signal::mel_to_hz(mel_hi / 3.0)).epsilon(1e-12));
  CHECK(bank.center_hz[1] ==
        doctest::Approx(signal::mel_to_hz(2.0 * mel_hi / 3.0)).epsilon(1e-12));
}

TEST_CASE("mel filterbank weights lie in [0,1] and every band peaks at 1") {
  signal::SpectrogramConfig config;
  config.dft_size = 1024;
  config.hop_length = 512;
  config.mel_bands = 80;
  config.mfcc_count = 13;
  const auto bank = signal::mel_filterbank_build(config, 16000.0);
  CHECK(bank.weights.rows == 80);
  CHECK(bank.weights.cols == 513);
  for (std::size_t b = 0; b < bank.weights.rows; ++b) {
    double peak = 0.0;
    for (std::size_t k = 0; k < bank.weights.cols; ++k) {
      const double w = bank.weights(b, k);
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
      peak = std::max(peak, w);
    }
    CHECK(peak == 1.0);
  }
}

TEST_CASE("interior bins between fmin and fmax get positive weight") {
  signal::SpectrogramConfig config;
  config.dft_size = 256;
  config.hop_length = 128;
  config.mel_bands = 12;
  config.mfcc_count = 12;
  const double sample_rate = 8000.0;
  const auto bank = signal::mel_filterbank_build(config, sample_rate);
  for (std::size_t k = 1; k + 1 < bank.weights.cols; ++k) {
    double total = 0.0;
    for (std::size_t b = 0; b < bank.weights.rows; ++b) {
      total += bank.weights(b, k);
    }
    CHECK(total > 0.0);
  }
}

TEST_CASE("overly fine filterbanks are rejected") {
  signal::SpectrogramConfig config;
  config.dft_size = 64;  // 33 bins cannot host 80 bands
  config.hop_length = 32;
  config.mel_bands = 80;
  config.mfcc_count = 13;
  CHECK_THROWS_AS(signal::mel_filterbank_build(config, 16000.0),
                  std::invalid_argument);
}

TEST_CASE("log-mel floors zero energy and shifts under power scaling") {
  signal::SpectrogramConfig config;
  config.dft_size = 256;
  config.hop_length = 128;
  config.mel_bands = 10;
  config.mfcc_count = 10;
  const auto bank = signal::mel_filterbank_build(config, 16000.0);

  Matrix zero_power(2, 129, 0.0);
  const auto floored = signal::log_mel(zero_power, bank);
  for (double v : floored.values.data) {
    CHECK(v == doctest::Approx(std::log(1e-10)).epsilon(1e-12));
  }

  Rng rng(5);
  Matrix power = testing::random_matrix(3, 129, rng);
  for (double& v : power.data) v = std::abs(v) + 0.1;
  Matrix scaled = power;
  for (double& v : scaled.data) v *= 10.0;
  const auto base = signal::log_mel(power, bank);
  const auto shifted = signal::log_mel(scaled, bank);
  for (std::size_t i = 0; i < base.values.size(); ++i) {
    CHECK(shifted.values.data[i] - base.values.data[i] ==
          doctest::Approx(std::log(10.0)).epsilon(1e-10));
  }
}

TEST_CASE("a tone at a band center dominates that band's row") {
  signal::SpectrogramConfig config;
  config.dft_size = 512;
  config.hop_length = 256;
  config.mel_bands = 8;
  config.mfcc_count = 8;
  const double sample_rate = 16000.0;
  const auto bank = signal::mel_filterbank_build(config, sample_rate);
  // Synthetic single-bin power spike at band 3's peak bin.
  const std::size_t band = 3;
  std::size_t peak_bin = 0;
  for (std::size_t k = 0; k < bank.weights.cols; ++k) {
    if (bank.weights(band, k) == 1.0) peak_bin = k;
  }
  Matrix power(1, bank.weights.cols, 0.0);
  power(0, peak_bin) = 100.0;
  const auto features = signal::log_mel(power, bank);
  for (std::size_t b = 0; b < 8; ++b) {
    if (b != band) CHECK(features.values(0, band) > features.values(0, b));
  }
}

TEST_CASE("dct-ii of a constant row collapses to the dc coefficient") {
  Matrix log_mel_row(1, 80, 2.5);
  const signal::FeatureMatrix features{log_mel_row, signal::FeatureKind::kLogMel};
  const auto coefficients = signal::mfcc(features, 13);
  CHECK(coefficients.values.cols == 13);
  CHECK(coefficients.values(0, 0) ==
        doctest::Approx(2.5 * std::sqrt(80.0)).epsilon(1e-12));
  for (std::size_t k = 1; k < 13; ++k) {
    CHECK(std::abs(coefficients.values(0, k)) < 1e-10);
  }
}

TEST_CASE("orthonormal dct satisfies M M^T = I") {
  const Matrix basis = signal::dct2_orthonormal(80, 80);
  Matrix gram;
  kernels::matmul_nt(basis, basis, gram);
  for (std::size_t i = 0; i < 80; ++i) {
    for (std::size_t j = 0; j < 80; ++j) {
      CHECK(std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("square dct is invertible") {
  Rng rng(6);
  const Matrix basis = signal::dct2_orthonormal(16, 16);
  const Matrix row = testing::random_matrix(1, 16, rng);
  Matrix forward_coeffs, reconstructed;
  kernels::matmul_nt(row, basis, forward_coeffs);
  kernels::matmul_nn(forward_coeffs, basis, reconstructed);
  for (std::size_t k = 0; k < 16; ++k) {
    CHECK(std::abs(reconstructed(0, k) - row(0, k)) < 1e-10);
  }
}

TEST_CASE("mfcc rejects more coefficients than bands") {
  Matrix log_mel_rows(1, 8, 1.0);
  const signal::FeatureMatrix features{log_mel_rows,
                                       signal::FeatureKind::kLogMel};
  CHECK_THROWS_AS(signal::mfcc(features, 9), std::invalid_argument);
}

TEST_CASE("the feature pipeline is a pure function of its inputs") {
  signal::SpectrogramConfig config;
  config.dft_size = 256;
  config.hop_length = 128;
  config.mel_bands = 20;
  config.mfcc_count = 13;
  const signal::Waveform waveform = sine_wave(1024, 8.0, 256);
  const auto a =
      signal::feature_vector(waveform, config, signal::FeatureKind::kMfcc);
  const auto b =
      signal::feature_vector(waveform, config, signal::FeatureKind::kMfcc);
  CHECK(a == b);
  CHECK(a.size() == 13);
  const auto mel =
      signal::feature_vector(waveform, config, signal::FeatureKind::kLogMel);
  CHECK(mel.size() == 20);
}
