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

#ifndef SPKREASSIGN_TEACHER_H_
#define SPKREASSIGN_TEACHER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "spkreassign/embedding.h"
#include "spkreassign/features.h"

namespace spkr {

struct TeacherConfig {
  std::uint64_t seed = 20240917;
  int num_bands = kDefaultBands;
  int dim = kDefaultEmbeddingDim;
  // Size of the synthetic voice population used to fix the input
  // standardization.
  int reference_voices = 64;
  double reference_voice_s = 4.0;
  // Every other reference voice gets white noise at an SNR drawn from this
  // range; <= 0 width with a +inf low end keeps the population clean.
  double reference_snr_low_db = 5.0;
  double reference_snr_high_db = 25.0;
};

// Frozen long-context extractor:
//   gated pooled stats -> standardize -> fixed projection -> L2 normalize.
// The projection has orthonormal columns, all orthogonal to the direction a
// uniform log-level shift takes in standardized space, so a gain change of
// the input only moves the embedding through the activity gate.
class TeacherExtractor : public Extractor {
 public:
  explicit TeacherExtractor(const TeacherConfig& config = TeacherConfig());

  Embedding Embed(std::span<const double> mono, int sample_rate) const;
  // Projection of already pooled statistics.
  Embedding EmbedPooled(std::span<const double> pooled) const;

  Embedding Extract(const ExtractionRequest& request) const override;
  std::string name() const override { return "teacher"; }

  const TeacherConfig& config() const { return config_; }
  std::span<const double> input_mean() const { return mean_; }
  std::span<const double> input_scale() const { return scale_; }
  // Row-major (2F x D).
  std::span<const double> projection() const { return projection_; }

 private:
  TeacherConfig config_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> projection_;
};

// Process-wide instance with the default configuration.
const TeacherExtractor& DefaultTeacher();

}  // namespace spkr

#endif  // SPKREASSIGN_TEACHER_H_
