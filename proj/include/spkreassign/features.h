// Copyright 2026 The spkreassign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPKREASSIGN_FEATURES_H_
#define SPKREASSIGN_FEATURES_H_

#include <cstddef>
#include <span>
#include <vector>

namespace spkr {

constexpr int kDefaultBands = 24;
constexpr double kLogFloor = 1e-10;
constexpr double kFeatureFrameMs = 32.0;
constexpr double kFeatureHopMs = 16.0;
constexpr double kGateRangeDb = 50.0;

// Log triangular-band energies, row-major [frame][band].
struct FeatureFrameSeq {
  int num_bands = kDefaultBands;
  std::size_t num_frames = 0;
  std::vector<double> values;
  // Total windowed energy per frame, used for activity gating.
  std::vector<double> frame_energy;

  std::span<const double> frame(std::size_t f) const {
    return std::span<const double>(values).subspan(f * num_bands, num_bands);
  }
};

// Triangular filters on a mel-spaced grid between 50 Hz and Nyquist.
class Filterbank {
 public:
  Filterbank(int sample_rate, std::size_t fft_size, int num_bands);

  int num_bands() const { return num_bands_; }
  std::size_t fft_size() const { return fft_size_; }
  double center_hz(int band) const { return centers_hz_[band]; }
  // Weight of FFT bin `bin` in `band`.
  double Weight(int band, std::size_t bin) const {
    return weights_[band * (fft_size_ / 2 + 1) + bin];
  }

 private:
  int num_bands_;
  std::size_t fft_size_;
  std::vector<double> centers_hz_;
  std::vector<double> weights_;
};

const Filterbank& SharedFilterbank(int sample_rate, int num_bands);

// 32 ms Hann frames, 16 ms hop. Throws std::invalid_argument for input shorter
// than one frame.
FeatureFrameSeq ComputeFeatures(std::span<const double> mono, int sample_rate,
                                int num_bands = kDefaultBands);

// Per-band mean followed by per-band population standard deviation (2F).
// Throws std::invalid_argument with fewer than two frames.
std::vector<double> StatsPool(const FeatureFrameSeq& features);
// Pooling over the listed frames only.
std::vector<double> StatsPool(const FeatureFrameSeq& features,
                              std::span<const std::size_t> frames);

// Activity rule: energy in dB above the 20th-percentile energy + 6 dB.
// Energies are first clamped to at most kGateRangeDb below the loudest frame.
std::vector<bool> EnergyGate(std::span<const double> energies);

// Per 32 ms non-overlapping frame.
std::vector<bool> VadMask(std::span<const double> mono, int sample_rate);

// Features -> energy gate -> stats pooling; falls back to all frames when the
// gate keeps fewer than two. This is the front end shared by every extractor.
// Frames that enter pooled statistics: the activity rule applied to the
// frames within kGateRangeDb of the loudest one, so stretches of digital
// silence do not pull the floor down. All frames when fewer than two pass.
std::vector<std::size_t> PoolingFrames(std::span<const double> energies);

// StatsPool over PoolingFrames().
std::vector<double> GatedPooledStats(std::span<const double> mono,
                                     int sample_rate,
                                     int num_bands = kDefaultBands);

}  // namespace spkr

#endif  // SPKREASSIGN_FEATURES_H_
