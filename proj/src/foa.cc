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

#include "spkreassign/foa.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spkr {

FoaSignal::FoaSignal(std::size_t num_samples, int sample_rate)
    : sample_rate_(sample_rate) {
  if (sample_rate <= 0) {
    throw std::invalid_argument("FoaSignal: sample rate must be positive");
  }
  for (auto& c : channels_) c.assign(num_samples, 0.0);
}

FoaSignal::FoaSignal(std::array<std::vector<double>, 4> channels,
                     int sample_rate)
    : channels_(std::move(channels)), sample_rate_(sample_rate) {
  if (sample_rate <= 0) {
    throw std::invalid_argument("FoaSignal: sample rate must be positive");
  }
  for (const auto& c : channels_) {
    if (c.size() != channels_[0].size()) {
      throw std::invalid_argument("FoaSignal: channel lengths differ");
    }
    for (double v : c) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("FoaSignal: non-finite sample");
      }
    }
  }
}

FoaSignal FoaSignal::Slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > num_samples()) {
    throw std::out_of_range("FoaSignal::Slice: [" + std::to_string(begin) +
                            ", " + std::to_string(end) + ") outside signal of " +
                            std::to_string(num_samples()) + " samples");
  }
  FoaSignal out;
  out.sample_rate_ = sample_rate_;
  for (int c = 0; c < 4; ++c) {
    out.channels_[c].assign(channels_[c].begin() + begin,
                            channels_[c].begin() + end);
  }
  return out;
}

FoaSignal FoaSignal::Scaled(double gain) const {
  FoaSignal out = *this;
  for (auto& c : out.channels_) {
    for (double& v : c) v *= gain;
  }
  return out;
}

FrameGrid::FrameGrid(int sample_rate, double frame_ms)
    : sample_rate_(sample_rate), frame_ms_(frame_ms) {
  if (sample_rate <= 0 || !(frame_ms > 0.0)) {
    throw std::invalid_argument("FrameGrid: invalid rate or frame length");
  }
  frame_samples_ =
      static_cast<std::size_t>(std::lround(sample_rate * frame_ms / 1000.0));
  if (frame_samples_ == 0) {
    throw std::invalid_argument("FrameGrid: frame shorter than one sample");
  }
}

double FrameGrid::FrameCenterSeconds(std::size_t frame) const {
  return (static_cast<double>(frame) + 0.5) * frame_samples_ / sample_rate_;
}

std::size_t FrameGrid::MsToSamples(double ms) const {
  return static_cast<std::size_t>(std::llround(ms * sample_rate_ / 1000.0));
}

FoaSignal EncodePlaneWave(std::span<const double> mono, const Direction& d,
                          int sample_rate) {
  const Vec3 u = d.UnitVector();
  std::array<std::vector<double>, 4> ch;
  for (auto& c : ch) c.resize(mono.size());
  for (std::size_t t = 0; t < mono.size(); ++t) {
    double s = mono[t];
    if (!std::isfinite(s)) {
      throw std::invalid_argument("EncodePlaneWave: non-finite input sample " +
                                  std::to_string(t));
    }
    ch[kW][t] = s;
    ch[kX][t] = s * u[0];
    ch[kY][t] = s * u[1];
    ch[kZ][t] = s * u[2];
  }
  return FoaSignal(std::move(ch), sample_rate);
}

FoaSignal Mix(std::span<const FoaSignal> signals) {
  if (signals.empty()) {
    throw std::invalid_argument("Mix: no signals");
  }
  const std::size_t n = signals[0].num_samples();
  const int rate = signals[0].sample_rate();
  std::array<std::vector<double>, 4> ch;
  for (auto& c : ch) c.assign(n, 0.0);
  for (const FoaSignal& s : signals) {
    if (s.num_samples() != n) {
      throw std::invalid_argument("Mix: length mismatch");
    }
    if (s.sample_rate() != rate) {
      throw std::invalid_argument("Mix: sample rate mismatch");
    }
    for (int c = 0; c < 4; ++c) {
      auto src = s.channel(c);
      for (std::size_t t = 0; t < n; ++t) ch[c][t] += src[t];
    }
  }
  return FoaSignal(std::move(ch), rate);
}

}  // namespace spkr
