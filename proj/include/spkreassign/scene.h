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

#ifndef SPKREASSIGN_SCENE_H_
#define SPKREASSIGN_SCENE_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spkreassign/direction.h"
#include "spkreassign/foa.h"
#include "spkreassign/track.h"

namespace spkr {

struct Formant {
  double center_hz = 500.0;
  double bandwidth_hz = 100.0;
  double gain = 1.0;
  bool operator==(const Formant&) const = default;
};

// Parametric voice: glottal pulse train at f0 through parallel formant
// resonators, amplitude modulated at a syllabic rate. Each syllable perturbs
// formants and pitch around the speaker's profile.
struct SpeakerSpec {
  int speaker_id = 0;
  double f0_hz = 120.0;
  std::vector<Formant> formants;
  double am_rate_hz = 4.0;

  // Throws std::invalid_argument: f0 outside [80, 320], fewer than two
  // formants, non-positive gains.
  void Validate() const;
  bool operator==(const SpeakerSpec&) const = default;
};

struct Interval {
  double on_s = 0.0;
  double off_s = 0.0;
  bool operator==(const Interval&) const = default;
};

struct SceneSpec {
  double duration_s = 20.0;
  int n_speakers = 1;
  // +infinity disables noise.
  double snr_db = 15.0;
  std::vector<SpeakerSpec> speakers;
  // Per speaker: sorted, disjoint activity intervals.
  std::vector<std::vector<Interval>> activity;
  // Per speaker: one direction per activity interval.
  std::vector<std::vector<Direction>> positions;
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const SceneSpec&) const = default;
};

struct GroundTruth {
  std::vector<Track> tracks;
  std::vector<int> speaker_ids;  // aligned with tracks
  std::size_t num_frames() const {
    return tracks.empty() ? 0 : tracks[0].num_frames();
  }
};

struct RenderedScene {
  FoaSignal mixture;
  std::vector<FoaSignal> wet;  // per speaker, before mixing
  GroundTruth truth;
};

// Knobs of the activity generator; the defaults are this project's choices.
struct ActivityParams {
  double min_turn_s = 3.0;
  double max_turn_s = 6.0;
  double min_gap_s = 0.4;
  double max_gap_s = 1.2;
  double max_lead_in_s = 1.0;
  // Each speaker's first turn keeps at least this much non-overlapped speech
  // at its start (room for an enrollment span).
  double clean_first_turn_s = 2.4;
  double min_separation_deg = 30.0;
};

// Mono voice, exactly zero outside `intervals`. Deterministic in (spec, seed).
std::vector<double> SynthVoice(const SpeakerSpec& spec,
                               std::span<const Interval> intervals,
                               double duration_s, std::uint64_t seed,
                               int sample_rate = kDefaultSampleRate);

// Frame f is active when its center lies in [on, off) of some interval.
GroundTruth GroundTruthFromSpec(const SceneSpec& spec,
                                const FrameGrid& grid = FrameGrid());

RenderedScene RenderScene(const SceneSpec& spec,
                          int sample_rate = kDefaultSampleRate);

SpeakerSpec SampleSpeakerSpec(std::uint64_t seed, int speaker_id);

// Throws std::invalid_argument if overlap_target is outside [0, 1), or
// nonzero with one speaker.
SceneSpec SampleSceneSpec(std::uint64_t seed, int n_speakers, double duration_s,
                          double overlap_target, double snr_db = 15.0,
                          const ActivityParams& params = ActivityParams());

Direction SampleUniformDirection(std::uint64_t seed);

// frames where >= 2 tracks are active / frames where any track is active
double MeasuredOverlap(const GroundTruth& truth);

// 10 log10(sum of per-speaker W power / noise W power) over samples of frames
// with any speaker active.
double MeasuredSnrDb(const RenderedScene& scene,
                     const FrameGrid& grid = FrameGrid());

std::string SceneSpecToJson(const SceneSpec& spec);
SceneSpec SceneSpecFromJson(const std::string& text);

}  // namespace spkr

#endif  // SPKREASSIGN_SCENE_H_
