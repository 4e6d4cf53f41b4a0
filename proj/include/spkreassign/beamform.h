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

#ifndef SPKREASSIGN_BEAMFORM_H_
#define SPKREASSIGN_BEAMFORM_H_

#include <cstddef>
#include <vector>

#include "spkreassign/direction.h"
#include "spkreassign/foa.h"
#include "spkreassign/track.h"

namespace spkr {

constexpr double kCardioidPattern = 0.5;
constexpr double kSteeringCrossfadeMs = 8.0;

// Per-frame steering, one entry per FrameGrid frame of the signal it is
// applied to.
struct SteeringTrajectory {
  std::vector<Direction> directions;
  std::vector<bool> active;

  static SteeringTrajectory FromTrack(const Track& track);
  static SteeringTrajectory Constant(const Direction& d, std::size_t frames);
  // Frames [begin, end) of a track.
  static SteeringTrajectory FromTrack(const Track& track, std::size_t begin,
                                      std::size_t end);
  std::size_t size() const { return directions.size(); }
};

// Steered first-order beam:
//   b(t) = pattern * W(t) + (1 - pattern) * (ux X(t) + uy Y(t) + uz Z(t)).
// Inactive frames hold the most recent active direction (the first active one
// before any activity). The steering vector is cross-faded linearly over the
// first 8 ms of a frame whose direction differs from the previous frame's.
// Throws std::invalid_argument if the trajectory length differs from the
// signal's frame count or has no active frame.
std::vector<double> Beamform(const FoaSignal& y, const SteeringTrajectory& traj,
                             double pattern = kCardioidPattern);

// Beamform() restricted to [start_ms, start_ms + dur_ms); identical samples to
// slicing the full output. Throws std::out_of_range for windows outside the
// signal.
std::vector<double> BeamformCrop(const FoaSignal& y,
                                 const SteeringTrajectory& traj, double pattern,
                                 double start_ms, double dur_ms);

// Sample-range form used by the engines.
std::vector<double> BeamformRange(const FoaSignal& y,
                                  const SteeringTrajectory& traj,
                                  double pattern, std::size_t begin,
                                  std::size_t end);

}  // namespace spkr

#endif  // SPKREASSIGN_BEAMFORM_H_
