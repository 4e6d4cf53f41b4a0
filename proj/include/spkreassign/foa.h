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

#ifndef SPKREASSIGN_FOA_H_
#define SPKREASSIGN_FOA_H_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "spkreassign/direction.h"

namespace spkr {

constexpr int kDefaultSampleRate = 16000;
constexpr double kDefaultFrameMs = 32.0;

// Channel index of the in-memory layout. Files use ACN order (W, Y, Z, X).
enum FoaChannel : int { kW = 0, kX = 1, kY = 2, kZ = 3 };

// First-order ambisonics buffer, SN3D normalization. Immutable once built.
class FoaSignal {
 public:
  FoaSignal() = default;
  // Zero signal of `num_samples` samples.
  FoaSignal(std::size_t num_samples, int sample_rate);
  // Throws std::invalid_argument on unequal lengths, non-finite samples or a
  // non-positive sample rate.
  FoaSignal(std::array<std::vector<double>, 4> channels, int sample_rate);

  int sample_rate() const { return sample_rate_; }
  std::size_t num_samples() const { return channels_[0].size(); }

  std::span<const double> channel(int c) const { return channels_.at(c); }
  std::span<const double> w() const { return channels_[kW]; }
  std::span<const double> x() const { return channels_[kX]; }
  std::span<const double> y() const { return channels_[kY]; }
  std::span<const double> z() const { return channels_[kZ]; }

  // Samples [begin, end). Throws std::out_of_range if outside the signal.
  FoaSignal Slice(std::size_t begin, std::size_t end) const;
  FoaSignal Scaled(double gain) const;

  bool operator==(const FoaSignal&) const = default;

 private:
  std::array<std::vector<double>, 4> channels_;
  int sample_rate_ = kDefaultSampleRate;
};

// Non-overlapping analysis frames; hop equals frame length.
class FrameGrid {
 public:
  explicit FrameGrid(int sample_rate = kDefaultSampleRate,
                     double frame_ms = kDefaultFrameMs);

  int sample_rate() const { return sample_rate_; }
  double frame_ms() const { return frame_ms_; }
  std::size_t frame_samples() const { return frame_samples_; }

  std::size_t FrameCount(std::size_t num_samples) const {
    return num_samples / frame_samples_;
  }
  std::size_t FrameStart(std::size_t frame) const {
    return frame * frame_samples_;
  }
  // Frame index owning a sample; samples past the last full frame map to the
  // (partial) frame after it.
  std::size_t FrameOf(std::size_t sample) const {
    return sample / frame_samples_;
  }
  double FrameCenterSeconds(std::size_t frame) const;
  std::size_t MsToSamples(double ms) const;

 private:
  int sample_rate_;
  double frame_ms_;
  std::size_t frame_samples_;
};

// Plane wave from `d`: W=s, X=s cos(az)cos(el), Y=s sin(az)cos(el), Z=s sin(el).
FoaSignal EncodePlaneWave(std::span<const double> mono, const Direction& d,
                          int sample_rate = kDefaultSampleRate);

// Per-sample, per-channel sum. Throws on rate or length mismatch.
FoaSignal Mix(std::span<const FoaSignal> signals);

}  // namespace spkr

#endif  // SPKREASSIGN_FOA_H_
