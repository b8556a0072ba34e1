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

#include "pateforge/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pateforge/kernels.hpp"

namespace pateforge::signal {
namespace {

void validate_config(const SpectrogramConfig& config) {
  if (!kernels::is_power_of_two(config.dft_size)) {
    throw std::invalid_argument("spectrogram: dft_size must be a power of two");
  }
  if (config.hop_length == 0 || config.hop_length > config.dft_size) {
    throw std::invalid_argument("spectrogram: hop must lie in (0, dft_size]");
  }
  if (config.mfcc_count > config.mel_bands) {
    throw std::invalid_argument("spectrogram: mfcc_count must be <= mel_bands");
  }
}

std::vector<double> make_window(const SpectrogramConfig& config) {
  std::vector<double> w(config.dft_size, 1.0);
  if (config.window == WindowKind::kHann && config.dft_size > 1) {
    const double denom = static_cast<double>(config.dft_size - 1);
    for (std::size_t n = 0; n < config.dft_size; ++n) {
      w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                  static_cast<double>(n) / denom);
    }
  }
  return w;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<std::vector<double>> frame_and_window(
    const Waveform& waveform, const SpectrogramConfig& config) {
  validate_config(config);
  if (waveform.sample_rate <= 0.0) {
    throw std::invalid_argument("waveform: sample_rate must be > 0");
  }
  if (waveform.samples.size() < config.dft_size) {
    throw std::invalid_argument("waveform shorter than one frame");
  }
  const std::size_t count =
      (waveform.samples.size() - config.dft_size) / config.hop_length + 1;
  const std::vector<double> window = make_window(config);
  std::vector<std::vector<double>> frames(count);
  for (std::size_t f = 0; f < count; ++f) {
    frames[f].resize(config.dft_size);
    const std::size_t offset = f * config.hop_length;
    for (std::size_t n = 0; n < config.dft_size; ++n) {
      frames[f][n] = waveform.samples[offset + n] * window[n];
    }
  }
  return frames;
}

std::vector<std::complex<double>> dft(const std::vector<double>& frame) {
  std::vector<std::complex<double>> spectrum(frame.begin(), frame.end());
  kernels::fft_radix2(spectrum);
  return spectrum;
}

std::vector<double> power_spectrum(
    const std::vector<std::complex<double>>& spectrum) {
  const std::size_t bins = spectrum.size() / 2 + 1;
  std::vector<double> power(bins);
  for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(spectrum[k]);
  return power;
}

Matrix power_frames(const Waveform& waveform, const SpectrogramConfig& config) {
  const std::vector<std::vector<double>> frames =
      frame_and_window(waveform, config);
  const std::size_t bins = config.dft_size / 2 + 1;
  Matrix out(frames.size(), bins);
  const auto count = static_cast<std::ptrdiff_t>(frames.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t f = 0; f < count; ++f) {
    const std::vector<double> power =
        power_spectrum(dft(frames[static_cast<std::size_t>(f)]));
    for (std::size_t k = 0; k < bins; ++k) {
      out(static_cast<std::size_t>(f), k) = power[k];
    }
  }
  return out;
}

MelFilterbank mel_filterbank_build(const SpectrogramConfig& config,
                                   double sample_rate) {
  validate_config(config);
  if (sample_rate <= 0.0) {
    throw std::invalid_argument("filterbank: sample_rate must be > 0");
  }
  const double nyquist = sample_rate / 2.0;
  const double fmax = config.fmax > 0.0 ? config.fmax : nyquist;
  if (!(config.fmin >= 0.0 && config.fmin < fmax && fmax <= nyquist)) {
    throw std::invalid_argument(
        "filterbank: need 0 <= fmin < fmax <= sample_rate/2");
  }
  if (config.mel_bands == 0) {
    throw std::invalid_argument("filterbank: mel_bands must be >= 1");
  }
  const std::size_t bins = config.dft_size / 2 + 1;
  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(fmax);
  // Band i is a triangle over (point[i], point[i+2]) peaking at point[i+1].
  std::vector<double> points_hz(config.mel_bands + 2);
  for (std::size_t i = 0; i < points_hz.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(config.mel_bands + 1);
    points_hz[i] = mel_to_hz(mel);
  }
  MelFilterbank bank;
  bank.weights = Matrix(config.mel_bands, bins);
  bank.center_hz.resize(config.mel_bands);
  for (std::size_t b = 0; b < config.mel_bands; ++b) {
    const double left = points_hz[b];
    const double center = points_hz[b + 1];
    const double right = points_hz[b + 2];
    bank.center_hz[b] = center;
    double peak = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate /
                       static_cast<double>(config.dft_size);
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      bank.weights(b, k) = w;
      peak = std::max(peak, w);
    }
    if (peak <= 0.0) {
      throw std::invalid_argument(
          "filterbank: band " + std::to_string(b) +
          " covers zero FFT bins; reduce mel_bands or raise dft_size");
    }
    for (std::size_t k = 0; k < bins; ++k) bank.weights(b, k) /= peak;
  }
  return bank;
}

FeatureMatrix log_mel(const Matrix& power_frames, const MelFilterbank& bank,
                      double floor_value) {
  if (power_frames.cols != bank.weights.cols) {
    throw std::invalid_argument("log_mel: spectrum bins do not match filterbank");
  }
  Matrix energies;
  kernels::matmul_nt(power_frames, bank.weights, energies);
  for (double& v : energies.data) v = std::log(std::max(v, floor_value));
  return {std::move(energies), FeatureKind::kLogMel};
}

Matrix dct2_orthonormal(std::size_t count, std::size_t n) {
  Matrix m(count, n);
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      m(k, j) = (k == 0 ? s0 : sk) *
                std::cos(std::numbers::pi * (2.0 * static_cast<double>(j) + 1.0) *
                         static_cast<double>(k) /
                         (2.0 * static_cast<double>(n)));
    }
  }
  return m;
}

FeatureMatrix mfcc(const FeatureMatrix& log_mel_features,
                   std::size_t mfcc_count) {
  const std::size_t bands = log_mel_features.values.cols;
  if (mfcc_count > bands) {
    throw std::invalid_argument("mfcc: mfcc_count must be <= mel band count");
  }
  const Matrix basis = dct2_orthonormal(mfcc_count, bands);
  Matrix out;
  kernels::matmul_nt(log_mel_features.values, basis, out);
  return {std::move(out), FeatureKind::kMfcc};
}

std::vector<double> feature_vector(const Waveform& waveform,
                                   const SpectrogramConfig& config,
                                   FeatureKind kind) {
  const Matrix power = power_frames(waveform, config);
  const MelFilterbank bank = mel_filterbank_build(config, waveform.sample_rate);
  FeatureMatrix features = log_mel(power, bank);
  if (kind == FeatureKind::kMfcc) {
    features = mfcc(features, config.mfcc_count);
  }
  std::vector<double> pooled(features.values.cols, 0.0);
  for (std::size_t f = 0; f < features.values.rows; ++f) {
    for (std::size_t k = 0; k < features.values.cols; ++k) {
      pooled[k] += features.values(f, k);
    }
  }
  for (double& v : pooled) v /= static_cast<double>(features.values.rows);
  return pooled;
}

}  // namespace pateforge::signal
