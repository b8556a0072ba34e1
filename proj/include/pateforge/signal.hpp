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

#ifndef PATEFORGE_SIGNAL_HPP_
#define PATEFORGE_SIGNAL_HPP_

#include <complex>
#include <cstddef>
#include <vector>

#include "pateforge/matrix.hpp"

namespace pateforge::signal {

// Spectral front end: framing, radix-2 DFT, mel filterbank, log-mel, and
// DCT-based cepstral coefficients. Everything here is a pure function of
// its inputs; identical waveform and config give bit-identical features.

struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;
};

enum class WindowKind { kRectangular, kHann };

struct SpectrogramConfig {
  std::size_t dft_size = 1024;
  std::size_t hop_length = 512;
  WindowKind window = WindowKind::kHann;
  std::size_t mel_bands = 80;
  std::size_t mfcc_count = 13;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 resolves to Nyquist when the filterbank is built.
};

struct MelFilterbank {
  Matrix weights;  // mel_bands x (dft_size/2 + 1), values in [0, 1].
  std::vector<double> center_hz;
};

enum class FeatureKind { kLogMel, kMfcc };

struct FeatureMatrix {
  Matrix values;  // frames x coefficients
  FeatureKind kind = FeatureKind::kLogMel;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Frame count is floor((len - dft_size)/hop) + 1; the window is applied
// elementwise. Throws if the waveform is shorter than one frame.
std::vector<std::vector<double>> frame_and_window(
    const Waveform& waveform, const SpectrogramConfig& config);

// Full complex spectrum, X_k = sum_n x_n exp(-2*pi*i*k*n/N). Length must
// be a power of two.
std::vector<std::complex<double>> dft(const std::vector<double>& frame);

// |X_k|^2 for k = 0..N/2.
std::vector<double> power_spectrum(
    const std::vector<std::complex<double>>& spectrum);

// frames x (dft_size/2 + 1) power spectrogram; frames are independent and
// processed in parallel.
Matrix power_frames(const Waveform& waveform, const SpectrogramConfig& config);

// Triangular bands with centers uniformly spaced on the mel scale between
// fmin and fmax; every band row is normalized to peak at exactly 1.
MelFilterbank mel_filterbank_build(const SpectrogramConfig& config,
                                   double sample_rate);

FeatureMatrix log_mel(const Matrix& power_frames, const MelFilterbank& bank,
                      double floor_value = 1e-10);

// Orthonormal DCT-II per frame, keeping the first mfcc_count coefficients.
FeatureMatrix mfcc(const FeatureMatrix& log_mel_features,
                   std::size_t mfcc_count);

// k x n orthonormal DCT-II matrix (rows are basis vectors).
Matrix dct2_orthonormal(std::size_t count, std::size_t n);

// Whole pipeline collapsed to one vector per waveform by averaging each
// coefficient over frames; used for file ingestion.
std::vector<double> feature_vector(const Waveform& waveform,
                                   const SpectrogramConfig& config,
                                   FeatureKind kind);

}  // namespace pateforge::signal

#endif  // PATEFORGE_SIGNAL_HPP_
