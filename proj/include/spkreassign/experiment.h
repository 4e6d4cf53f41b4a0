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

#ifndef SPKREASSIGN_EXPERIMENT_H_
#define SPKREASSIGN_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spkreassign/kd_train.h"
#include "spkreassign/metrics.h"
#include "spkreassign/reassign.h"
#include "spkreassign/scene.h"
#include "spkreassign/tracker_sim.h"

namespace spkr {

// Bad configuration or usage; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitRuntime = 2,
  kExitTrainingFailed = 3,
};

struct SceneBatchConfig {
  int count = 50;
  double duration_s = 20.0;
  int n_speakers = 2;
  double overlap = 0.3;
  double snr_db = 15.0;  // +inf disables noise
};

enum class ExtractorKind { kTeacher, kStudent, kOracle };
enum class ReassignMode { kFragment, kBlockwise };

struct ReassignConfig {
  ReassignMode mode = ReassignMode::kBlockwise;
  double context_ms = 250.0;  // fragment mode; 0 = whole fragment
  StartPolicy start_policy = StartPolicy::kBeginning;
  int block_frames = 25;
  double min_active_fraction = kDefaultPortionActiveFraction;
  int gap_tolerance_frames = kDefaultGapToleranceFrames;
  bool exclusive = false;
  double enroll_min_ms = kDefaultEnrollmentMs;
  // Scenes with fewer speakers get enrollments of unrelated voices.
  int pool_size = 2;
  double pattern = kCardioidPattern;
};

struct SweepConfig {
  std::string axis = "block_frames";
  std::vector<double> values = {8, 25, 50, 100, 200};
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int workers = 1;
  std::filesystem::path out = "out";
  std::filesystem::path scenes_dir;  // resolved to <out>/scenes when empty
  SceneBatchConfig scenes;
  ErrorModel tracker;
  ExtractorKind extractor = ExtractorKind::kTeacher;
  std::filesystem::path model_path;  // resolved to <out>/student.json when empty
  ReassignConfig reassign;
  MatchConfig metrics;
  int bootstrap_iterations = 100;
  double bootstrap_fraction = 0.8;
  TrainConfig train;
  SweepConfig sweep;
};

nlohmann::ordered_json DefaultConfigJson();
// Strict: unknown keys and wrong types throw ConfigError. Empty paths are
// resolved against `out`.
ExperimentConfig ConfigFromJson(const nlohmann::json& j);
nlohmann::ordered_json ConfigToJson(const ExperimentConfig& cfg);
// Sets a dotted key ("reassign.block_frames") from its text form. The value is
// parsed as JSON when possible and taken as a string otherwise.
void ApplyOverride(nlohmann::json& j, const std::string& dotted_key,
                   const std::string& value);
// Defaults, then the file (if any), then the overrides in order.
ExperimentConfig LoadConfig(
    const std::filesystem::path& file,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// Runs fn(0..n-1) on up to `workers` threads; the exception of the lowest
// failing index is rethrown after all workers join.
void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn);

std::string SceneId(std::size_t index);
SceneSpec BatchSceneSpec(const ExperimentConfig& cfg, std::size_t index);

// mixture.wav, wet.wav, gt.csv and spec.json, written into a temporary
// directory that is renamed into place.
void WriteSceneDir(const std::filesystem::path& dir, const SceneSpec& spec,
                   const RenderedScene& scene);

struct LoadedScene {
  std::string id;
  SceneSpec spec;
  RenderedScene scene;
};

LoadedScene LoadSceneDir(const std::filesystem::path& dir, bool with_wet);
// Sorted scene directories; throws std::runtime_error for a missing or empty
// batch.
std::vector<std::filesystem::path> ListSceneDirs(const std::filesystem::path& dir);

// Extractor selected by the configuration. Oracle extractors are per scene,
// so this returns null for ExtractorKind::kOracle.
std::unique_ptr<Extractor> MakeContentExtractor(const ExperimentConfig& cfg);

// Enrollments of the scene's speakers, padded to pool_size with unrelated
// voices (labels 1000, 1001, ...).
EnrollmentPool BuildScenePool(const RenderedScene& scene, std::size_t index,
                              const ExperimentConfig& cfg,
                              const Extractor& extractor);

std::string ConditionName(const ReassignConfig& r);
double ConditionMs(const ReassignConfig& r);

struct SceneOutcome {
  std::vector<Track> tracker;
  ReassignedTimeline timeline;
  ReassignedTimeline baseline;
  ReportRow row;
  ReportRow baseline_row;
};

// Tracker simulation, enrollment, reassignment and scoring for one scene.
// `content` is used unless the configuration asks for the oracle.
SceneOutcome ProcessScene(const std::string& id, std::size_t index,
                          const RenderedScene& scene, const ExperimentConfig& cfg,
                          const Extractor* content);

ReportRow ScoreTimeline(const std::string& id, const std::string& condition,
                        double ms, const ReassignedTimeline& timeline,
                        const GroundTruth& gt, const MatchConfig& cfg);

// summary.json: bootstrap mean/std per condition plus the configuration.
nlohmann::ordered_json Summarize(const std::vector<ReportRow>& rows,
                                 const ExperimentConfig& cfg);

int CmdGen(const ExperimentConfig& cfg);
int CmdTrain(const ExperimentConfig& cfg);
int CmdRun(const ExperimentConfig& cfg);
int CmdSweep(const ExperimentConfig& cfg);
int CmdEval(const ExperimentConfig& cfg);
int CmdBeamform(const ExperimentConfig& cfg, const std::string& scene_id,
                int track, const std::filesystem::path& wav_out);

}  // namespace spkr

#endif  // SPKREASSIGN_EXPERIMENT_H_
