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

#include "spkreassign/teacher.h"

#include <cmath>
#include <stdexcept>

#include "spkreassign/rng.h"
#include "spkreassign/scene.h"

namespace spkr {

TeacherExtractor::TeacherExtractor(const TeacherConfig& config)
    : config_(config) {
  const int in = 2 * config.num_bands;
  const int d = config.dim;
  if (d < 2 || d > in) {
    throw std::invalid_argument("TeacherExtractor: dim must be in [2, 2F]");
  }

  // Standardization from a fixed synthetic population.
  std::vector<std::vector<double>> pooled;
  for (int i = 0; i < config.reference_voices; ++i) {
    SpeakerSpec spk = SampleSpeakerSpec(
        DeriveSeed(config.seed, {1, static_cast<std::uint64_t>(i)}), i);
    const Interval iv{0.1, config.reference_voice_s - 0.1};
    std::vector<double> mono =
        SynthVoice(spk, std::span<const Interval>(&iv, 1), config.reference_voice_s,
                   DeriveSeed(config.seed, {2, static_cast<std::uint64_t>(i)}));
    if (i % 2 == 1 && std::isfinite(config.reference_snr_low_db)) {
      Rng rng(DeriveSeed(config.seed, {4, static_cast<std::uint64_t>(i)}));
      const double snr = std::uniform_real_distribution<double>(
          config.reference_snr_low_db,
          std::max(config.reference_snr_low_db, config.reference_snr_high_db))(rng);
      double power = 0.0;
      for (double v : mono) power += v * v;
      power /= static_cast<double>(mono.size());
      const double sigma = std::sqrt(power * std::pow(10.0, -snr / 10.0));
      std::normal_distribution<double> noise(0.0, sigma);
      for (double& v : mono) v += noise(rng);
    }
    pooled.push_back(GatedPooledStats(mono, kDefaultSampleRate, config.num_bands));
  }
  mean_.assign(in, 0.0);
  scale_.assign(in, 0.0);
  for (const auto& p : pooled) {
    for (int k = 0; k < in; ++k) mean_[k] += p[k] / pooled.size();
  }
  for (const auto& p : pooled) {
    for (int k = 0; k < in; ++k) {
      scale_[k] += (p[k] - mean_[k]) * (p[k] - mean_[k]) / pooled.size();
    }
  }
  for (double& s : scale_) s = std::max(std::sqrt(s), 1e-3);

  // Direction of a uniform log-level shift after standardization.
  std::vector<double> level(in, 0.0);
  double level_norm = 0.0;
  for (int b = 0; b < config.num_bands; ++b) {
    level[b] = 1.0 / scale_[b];
    level_norm += level[b] * level[b];
  }
  level_norm = std::sqrt(level_norm);
  for (double& v : level) v /= level_norm;

  // Random Gaussian columns, Gram-Schmidt against `level` and each other.
  Rng rng(DeriveSeed(config.seed, {3}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> cols;
  while (static_cast<int>(cols.size()) < d) {
    std::vector<double> c(in);
    for (double& v : c) v = normal(rng);
    for (int pass = 0; pass < 2; ++pass) {
      double a = 0.0;
      for (int k = 0; k < in; ++k) a += c[k] * level[k];
      for (int k = 0; k < in; ++k) c[k] -= a * level[k];
      for (const auto& q : cols) {
        double b = 0.0;
        for (int k = 0; k < in; ++k) b += c[k] * q[k];
        for (int k = 0; k < in; ++k) c[k] -= b * q[k];
      }
    }
    double n = 0.0;
    for (double v : c) n += v * v;
    n = std::sqrt(n);
    if (n < 1e-6) continue;
    for (double& v : c) v /= n;
    cols.push_back(std::move(c));
  }
  projection_.assign(static_cast<std::size_t>(in) * d, 0.0);
  for (int k = 0; k < in; ++k) {
    for (int j = 0; j < d; ++j) projection_[k * d + j] = cols[j][k];
  }
}

Embedding TeacherExtractor::EmbedPooled(std::span<const double> pooled) const {
  const int in = 2 * config_.num_bands;
  const int d = config_.dim;
  if (static_cast<int>(pooled.size()) != in) {
    throw std::invalid_argument("TeacherExtractor: pooled statistics size mismatch");
  }
  std::vector<double> out(d, 0.0);
  for (int k = 0; k < in; ++k) {
    const double z = (pooled[k] - mean_[k]) / scale_[k];
    for (int j = 0; j < d; ++j) out[j] += z * projection_[k * d + j];
  }
  return Embedding::Normalize(std::move(out));
}

Embedding TeacherExtractor::Embed(std::span<const double> mono,
                                  int sample_rate) const {
  RequireDuration(mono.size(), sample_rate, min_duration_ms(), "teacher");
  return EmbedPooled(GatedPooledStats(mono, sample_rate, config_.num_bands));
}

Embedding TeacherExtractor::Extract(const ExtractionRequest& request) const {
  return Embed(request.mono, request.sample_rate);
}

const TeacherExtractor& DefaultTeacher() {
  static const TeacherExtractor teacher;
  return teacher;
}

}  // namespace spkr
