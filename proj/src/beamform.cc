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

#include "spkreassign/beamform.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spkr {

SteeringTrajectory SteeringTrajectory::FromTrack(const Track& track) {
  return FromTrack(track, 0, track.num_frames());
}

SteeringTrajectory SteeringTrajectory::FromTrack(const Track& track,
                                                 std::size_t begin,
                                                 std::size_t end) {
  if (begin > end || end > track.num_frames()) {
    throw std::out_of_range("SteeringTrajectory: frame range outside track");
  }
  SteeringTrajectory t;
  t.directions.assign(track.directions.begin() + begin,
                      track.directions.begin() + end);
  t.active.assign(track.active.begin() + begin, track.active.begin() + end);
  return t;
}

SteeringTrajectory SteeringTrajectory::Constant(const Direction& d,
                                                std::size_t frames) {
  SteeringTrajectory t;
  t.directions.assign(frames, d);
  t.active.assign(frames, true);
  return t;
}

namespace {

// Effective steering vector per frame after the hold rule.
std::vector<Vec3> ResolveSteering(const SteeringTrajectory& traj) {
  if (traj.directions.size() != traj.active.size()) {
    throw std::invalid_argument("SteeringTrajectory: inconsistent lengths");
  }
  auto first = std::find(traj.active.begin(), traj.active.end(), true);
  if (first == traj.active.end()) {
    throw std::invalid_argument("Beamform: trajectory has no active frame");
  }
  Vec3 held = traj.directions[first - traj.active.begin()].UnitVector();
  std::vector<Vec3> out(traj.size());
  for (std::size_t f = 0; f < traj.size(); ++f) {
    if (traj.active[f]) held = traj.directions[f].UnitVector();
    out[f] = held;
  }
  return out;
}

}  // namespace

std::vector<double> BeamformRange(const FoaSignal& y,
                                  const SteeringTrajectory& traj,
                                  double pattern, std::size_t begin,
                                  std::size_t end) {
  if (!(pattern >= 0.0 && pattern <= 1.0)) {
    throw std::invalid_argument("Beamform: pattern must be in [0, 1]");
  }
  const FrameGrid grid(y.sample_rate());
  const std::size_t frames = grid.FrameCount(y.num_samples());
  if (traj.size() != frames) {
    throw std::invalid_argument("Beamform: trajectory has " +
                                std::to_string(traj.size()) +
                                " frames, signal has " + std::to_string(frames));
  }
  if (begin > end || end > y.num_samples()) {
    throw std::out_of_range("Beamform: sample range outside signal");
  }
  const std::vector<Vec3> steer = ResolveSteering(traj);
  const std::size_t fade = std::min(grid.frame_samples(),
                                    grid.MsToSamples(kSteeringCrossfadeMs));
  const double omni = pattern;
  const double dipole = 1.0 - pattern;
  auto w = y.w(), x = y.x(), yy = y.y(), z = y.z();

  std::vector<double> out(end - begin);
  for (std::size_t t = begin; t < end; ++t) {
    const std::size_t f = std::min(grid.FrameOf(t), frames - 1);
    Vec3 u = steer[f];
    const std::size_t offset = t - grid.FrameStart(f);
    if (f > 0 && offset < fade && steer[f] != steer[f - 1]) {
      const double a = (offset + 0.5) / fade;
      const Vec3& p = steer[f - 1];
      for (int i = 0; i < 3; ++i) u[i] = (1.0 - a) * p[i] + a * u[i];
    }
    out[t - begin] =
        omni * w[t] + dipole * (u[0] * x[t] + u[1] * yy[t] + u[2] * z[t]);
  }
  return out;
}

std::vector<double> Beamform(const FoaSignal& y, const SteeringTrajectory& traj,
                             double pattern) {
  return BeamformRange(y, traj, pattern, 0, y.num_samples());
}

std::vector<double> BeamformCrop(const FoaSignal& y,
                                 const SteeringTrajectory& traj, double pattern,
                                 double start_ms, double dur_ms) {
  if (!(start_ms >= 0.0) || !(dur_ms >= 0.0)) {
    throw std::out_of_range("BeamformCrop: negative window");
  }
  const FrameGrid grid(y.sample_rate());
  const std::size_t begin = grid.MsToSamples(start_ms);
  const std::size_t len = grid.MsToSamples(dur_ms);
  if (begin + len > y.num_samples()) {
    throw std::out_of_range("BeamformCrop: window [" + std::to_string(start_ms) +
                            " ms, +" + std::to_string(dur_ms) +
                            " ms) outside signal");
  }
  return BeamformRange(y, traj, pattern, begin, begin + len);
}

}  // namespace spkr
