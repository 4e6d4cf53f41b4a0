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

#include "spkreassign/features.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "spkreassign/foa.h"

namespace spkr {

namespace {

constexpr double kLowEdgeHz = 50.0;

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// FFTW planning is not thread-safe; execution with new arrays is.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (plan_ == nullptr) throw std::runtime_error("FFTW planning failed");
  }
  ~RealFft() { fftw_destroy_plan(plan_); }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Power spectrum of `frame` (n samples) into `power` (n/2+1 bins).
  void Power(const double* frame, std::vector<double>& power) const {
    struct Buffers {
      std::size_t n = 0;
      double* in = nullptr;
      fftw_complex* out = nullptr;
      ~Buffers() {
        fftw_free(in);
        fftw_free(out);
      }
    };
    thread_local Buffers buf;
    if (buf.n != n_) {
      fftw_free(buf.in);
      fftw_free(buf.out);
      buf.in = fftw_alloc_real(n_);
      buf.out = fftw_alloc_complex(n_ / 2 + 1);
      buf.n = n_;
    }
    std::copy(frame, frame + n_, buf.in);
    fftw_execute_dft_r2c(plan_, buf.in, buf.out);
    power.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      power[k] = buf.out[k][0] * buf.out[k][0] + buf.out[k][1] * buf.out[k][1];
    }
  }

 private:
  std::size_t n_;
  fftw_plan plan_;
};

std::mutex& PlanMutex() {
  static std::mutex m;
  return m;
}

const RealFft& SharedFft(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace

Filterbank::Filterbank(int sample_rate, std::size_t fft_size, int num_bands)
    : num_bands_(num_bands), fft_size_(fft_size) {
  if (num_bands < 1 || fft_size < 4 || sample_rate <= 0) {
    throw std::invalid_argument("Filterbank: bad configuration");
  }
  const double nyquist = sample_rate / 2.0;
  const double lo = HzToMel(kLowEdgeHz);
  const double hi = HzToMel(nyquist);
  std::vector<double> edges(num_bands + 2);
  for (int i = 0; i < num_bands + 2; ++i) {
    edges[i] = MelToHz(lo + (hi - lo) * i / (num_bands + 1));
  }
  const std::size_t bins = fft_size / 2 + 1;
  weights_.assign(static_cast<std::size_t>(num_bands) * bins, 0.0);
  centers_hz_.resize(num_bands);
  for (int b = 0; b < num_bands; ++b) {
    const double left = edges[b], center = edges[b + 1], right = edges[b + 2];
    centers_hz_[b] = center;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      weights_[b * bins + k] = w;
    }
  }
}

const Filterbank& SharedFilterbank(int sample_rate, int num_bands) {
  static std::map<std::pair<int, int>, std::unique_ptr<Filterbank>> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[{sample_rate, num_bands}];
  if (!slot) {
    const FrameGrid grid(sample_rate, kFeatureFrameMs);
    slot = std::make_unique<Filterbank>(sample_rate, grid.frame_samples(),
                                        num_bands);
  }
  return *slot;
}

FeatureFrameSeq ComputeFeatures(std::span<const double> mono, int sample_rate,
                                int num_bands) {
  const FrameGrid grid(sample_rate, kFeatureFrameMs);
  const std::size_t frame = grid.frame_samples();
  const std::size_t hop = grid.MsToSamples(kFeatureHopMs);
  if (mono.size() < frame) {
    throw std::invalid_argument("ComputeFeatures: signal shorter than one frame (" +
                                std::to_string(mono.size()) + " < " +
                                std::to_string(frame) + " samples)");
  }
  const Filterbank& fb = SharedFilterbank(sample_rate, num_bands);
  const RealFft& fft = SharedFft(frame);

  std::vector<double> window(frame);
  for (std::size_t i = 0; i < frame; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / frame);
  }

  FeatureFrameSeq out;
  out.num_bands = num_bands;
  out.num_frames = (mono.size() - frame) / hop + 1;
  out.values.resize(out.num_frames * num_bands);
  out.frame_energy.resize(out.num_frames);
  std::vector<double> buf(frame), power;
  const std::size_t bins = frame / 2 + 1;
  for (std::size_t f = 0; f < out.num_frames; ++f) {
    const double* src = mono.data() + f * hop;
    double energy = 0.0;
    for (std::size_t i = 0; i < frame; ++i) {
      buf[i] = src[i] * window[i];
      energy += buf[i] * buf[i];
    }
    out.frame_energy[f] = energy;
    fft.Power(buf.data(), power);
    for (int b = 0; b < num_bands; ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += fb.Weight(b, k) * power[k];
      out.values[f * num_bands + b] = std::log(std::max(e, kLogFloor));
    }
  }
  return out;
}

std::vector<double> StatsPool(const FeatureFrameSeq& features,
                              std::span<const std::size_t> frames) {
  if (frames.size() < 2) {
    throw std::invalid_argument("StatsPool: need at least 2 frames, got " +
                                std::to_string(frames.size()));
  }
  const int nb = features.num_bands;
  std::vector<double> out(2 * nb, 0.0);
  for (std::size_t f : frames) {
    auto row = features.frame(f);
    for (int b = 0; b < nb; ++b) out[b] += row[b];
  }
  const double n = static_cast<double>(frames.size());
  for (int b = 0; b < nb; ++b) out[b] /= n;
  for (std::size_t f : frames) {
    auto row = features.frame(f);
    for (int b = 0; b < nb; ++b) {
      const double d = row[b] - out[b];
      out[nb + b] += d * d;
    }
  }
  for (int b = 0; b < nb; ++b) out[nb + b] = std::sqrt(out[nb + b] / n);
  return out;
}

std::vector<double> StatsPool(const FeatureFrameSeq& features) {
  std::vector<std::size_t> all(features.num_frames);
  for (std::size_t f = 0; f < all.size(); ++f) all[f] = f;
  return StatsPool(features, all);
}

std::vector<bool> EnergyGate(std::span<const double> energies) {
  std::vector<bool> active(energies.size(), false);
  if (energies.empty()) return active;
  std::vector<double> db(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i) {
    db[i] = 10.0 * std::log10(std::max(energies[i], 1e-30));
  }
  // Energies are clamped to a fixed range below the loudest frame, so digital
  // silence reads as a finite noise floor.
  const double floor_db = *std::max_element(db.begin(), db.end()) - kGateRangeDb;
  for (double& v : db) v = std::max(v, floor_db);
  std::vector<double> sorted = db;
  const std::size_t rank =
      static_cast<std::size_t>(std::floor(0.2 * (sorted.size() - 1)));
  std::nth_element(sorted.begin(), sorted.begin() + rank, sorted.end());
  const double threshold = sorted[rank] + 6.0;
  for (std::size_t i = 0; i < db.size(); ++i) active[i] = db[i] > threshold;
  return active;
}

std::vector<bool> VadMask(std::span<const double> mono, int sample_rate) {
  const FrameGrid grid(sample_rate);
  const std::size_t frames = grid.FrameCount(mono.size());
  std::vector<double> energy(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t t = grid.FrameStart(f); t < grid.FrameStart(f + 1); ++t) {
      energy[f] += mono[t] * mono[t];
    }
  }
  return EnergyGate(energy);
}

std::vector<std::size_t> PoolingFrames(std::span<const double> energies) {
  std::vector<std::size_t> kept;
  if (energies.empty()) return kept;
  double peak = 0.0;
  for (double e : energies) peak = std::max(peak, e);
  const double silence = peak * std::pow(10.0, -kGateRangeDb / 10.0);
  std::vector<std::size_t> sounding;
  std::vector<double> sounding_energy;
  for (std::size_t f = 0; f < energies.size(); ++f) {
    if (energies[f] > silence) {
      sounding.push_back(f);
      sounding_energy.push_back(energies[f]);
    }
  }
  const std::vector<bool> gate = EnergyGate(sounding_energy);
  for (std::size_t i = 0; i < gate.size(); ++i) {
    if (gate[i]) kept.push_back(sounding[i]);
  }
  if (kept.size() < 2) {
    kept.resize(energies.size());
    std::iota(kept.begin(), kept.end(), std::size_t{0});
  }
  return kept;
}

std::vector<double> GatedPooledStats(std::span<const double> mono,
                                     int sample_rate, int num_bands) {
  FeatureFrameSeq features = ComputeFeatures(mono, sample_rate, num_bands);
  const std::vector<std::size_t> kept = PoolingFrames(features.frame_energy);
  return StatsPool(features, kept);
}

}  // namespace spkr
