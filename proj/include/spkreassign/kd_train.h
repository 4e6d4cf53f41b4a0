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

#ifndef SPKREASSIGN_KD_TRAIN_H_
#define SPKREASSIGN_KD_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spkreassign/features.h"
#include "spkreassign/rng.h"
#include "spkreassign/scene.h"
#include "spkreassign/student.h"
#include "spkreassign/teacher.h"

namespace spkr {

inline const std::vector<double> kDefaultCropDurationsMs = {
    250, 500, 750, 1000, 1500, 2000, 8000};

struct CropOptions {
  std::vector<double> durations_ms = kDefaultCropDurationsMs;
  double min_active_fraction = 0.5;
  int max_attempts = 100;
  // Crop starts are multiples of this, so crops line up with feature hops.
  double start_step_ms = kFeatureHopMs;
};

struct CropSpec {
  double start_ms = 0.0;
  double duration_ms = 0.0;
  int attempts = 0;
  double active_fraction = 0.0;
};

// Fraction of the samples in [start, start + len) whose 32 ms grid frame is
// marked active. Samples past the end of `activity` count as inactive.
double ActiveFraction(const std::vector<bool>& activity, int sample_rate,
                      std::size_t start, std::size_t len);

// Rejection-samples a duration from the list and a start uniformly over the
// feasible starts until the crop's active fraction reaches the minimum.
// Throws std::runtime_error when no duration fits or after max_attempts.
CropSpec SampleCrop(std::size_t num_samples, int sample_rate,
                    const std::vector<bool>& activity, Rng& rng,
                    const CropOptions& options = CropOptions());
CropSpec SampleCrop(std::span<const double> mono, int sample_rate,
                    const std::vector<bool>& activity, Rng& rng,
                    const CropOptions& options = CropOptions());

// One (scene, target speaker) pair: features of the mixture beamformed along
// the speaker's ground-truth trajectory and the teacher's embedding of the
// speaker's own W channel.
struct TrainingItem {
  FeatureFrameSeq features;
  std::vector<bool> activity;
  std::size_t num_samples = 0;
  int sample_rate = kDefaultSampleRate;
  std::vector<double> target;
};

std::vector<TrainingItem> PrepareTrainingItems(const RenderedScene& scene,
                                               const TeacherExtractor& teacher);

// Pooled statistics of a crop, bit-identical to GatedPooledStats() on the
// cropped beamformed audio.
std::vector<double> CropPooledStats(const TrainingItem& item,
                                    const CropSpec& crop);

struct TrainConfig {
  int epochs = 40;
  double learning_rate = 1e-3;
  int batch_size = 16;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int hidden = kDefaultHidden;
  CropOptions crops;
  // Crops per item in the fixed evaluation set behind initial/final loss.
  int eval_crops_per_item = 4;
};

struct LossRecord {
  int epoch = 0;
  int step = 0;
  double loss = 0.0;
};

struct TrainResult {
  StudentModel model;
  std::vector<LossRecord> log;
  std::vector<double> epoch_mean_loss;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const StudentModel& model, double lr, double beta1,
                double beta2, double epsilon);
  void Step(StudentModel& model, const StudentGradients& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  StudentGradients m_, v_;
};

// Throws std::invalid_argument for an empty item list.
TrainResult TrainStudent(std::span<const TrainingItem> items,
                         const TrainConfig& config,
                         const StudentModel& initial);
TrainResult TrainStudent(std::span<const TrainingItem> items,
                         const TrainConfig& config,
                         const TeacherExtractor& teacher);

StudentModel InitialStudent(const TrainConfig& config,
                            const TeacherExtractor& teacher);

std::string LossLogToCsv(std::span<const LossRecord> log);

}  // namespace spkr

#endif  // SPKREASSIGN_KD_TRAIN_H_
