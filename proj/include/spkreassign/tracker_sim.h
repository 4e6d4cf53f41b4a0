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

#ifndef SPKREASSIGN_TRACKER_SIM_H_
#define SPKREASSIGN_TRACKER_SIM_H_

#include <cstdint>
#include <vector>

#include "spkreassign/scene.h"
#include "spkreassign/track.h"

namespace spkr {

constexpr int kTrackerBranches = 2;

// Error modes of a permutation-invariant tracker.
struct ErrorModel {
  // Branch permutations can only happen at multiples of this many frames.
  int perm_block_frames = 50;
  double perm_lambda = 0.004;
  // When >= 0, replaces 1 - exp(-perm_lambda * perm_block_frames).
  double perm_prob = -1.0;
  double angle_noise_deg = 5.0;
  double miss_prob = 0.02;
  std::uint64_t seed = 0;

  double SwapProbability() const;
  // Throws std::invalid_argument on out-of-range values.
  void Validate() const;

  static ErrorModel Perfect(std::uint64_t seed = 0);
};

struct TrackerOutput {
  // Always kTrackerBranches tracks; track_id is the branch index.
  std::vector<Track> tracks;
  // Per permutation block: whether branches carry swapped speakers.
  std::vector<bool> block_swapped;
};

// Replays ground truth through the error model. Branch i carries speaker i
// except in swapped blocks. Active frames get an angular jitter of half-normal
// magnitude in a uniformly random tangent direction, then may be dropped.
// Throws std::invalid_argument for more than kTrackerBranches speakers.
TrackerOutput SimulateTracker(const GroundTruth& gt, const ErrorModel& em);

// Rotates `d` by `angle` radians towards the tangent direction at `bearing`.
Direction Perturb(const Direction& d, double angle, double bearing);

}  // namespace spkr

#endif  // SPKREASSIGN_TRACKER_SIM_H_
