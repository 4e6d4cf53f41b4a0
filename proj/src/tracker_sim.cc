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

#include "spkreassign/tracker_sim.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spkreassign/rng.h"

namespace spkr {

double ErrorModel::SwapProbability() const {
  if (perm_prob >= 0.0) return perm_prob;
  return 1.0 - std::exp(-perm_lambda * perm_block_frames);
}

void ErrorModel::Validate() const {
  if (perm_block_frames < 1) {
    throw std::invalid_argument("ErrorModel: perm_block_frames must be >= 1");
  }
  if (!(perm_lambda >= 0.0)) {
    throw std::invalid_argument("ErrorModel: perm_lambda must be >= 0");
  }
  if (perm_prob > 1.0) {
    throw std::invalid_argument("ErrorModel: perm_prob must be <= 1");
  }
  if (!(angle_noise_deg >= 0.0)) {
    throw std::invalid_argument("ErrorModel: angle_noise_deg must be >= 0");
  }
  if (!(miss_prob >= 0.0 && miss_prob <= 1.0)) {
    throw std::invalid_argument("ErrorModel: miss_prob must be in [0, 1]");
  }
}

ErrorModel ErrorModel::Perfect(std::uint64_t seed) {
  ErrorModel em;
  em.perm_lambda = 0.0;
  em.angle_noise_deg = 0.0;
  em.miss_prob = 0.0;
  em.seed = seed;
  return em;
}

Direction Perturb(const Direction& d, double angle, double bearing) {
  if (angle == 0.0) return d;
  const Vec3 u = d.UnitVector();
  // Local east/north basis at d.
  const double az = d.azimuth();
  const double el = d.elevation();
  const Vec3 east{-std::sin(az), std::cos(az), 0.0};
  const Vec3 north{-std::sin(el) * std::cos(az), -std::sin(el) * std::sin(az),
                   std::cos(el)};
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    const double t = std::cos(bearing) * east[i] + std::sin(bearing) * north[i];
    v[i] = std::cos(angle) * u[i] + std::sin(angle) * t;
  }
  return Direction::FromVector(v);
}

TrackerOutput SimulateTracker(const GroundTruth& gt, const ErrorModel& em) {
  em.Validate();
  if (gt.tracks.size() > static_cast<std::size_t>(kTrackerBranches)) {
    throw std::invalid_argument("SimulateTracker: " +
                                std::to_string(gt.tracks.size()) +
                                " speakers but only 2 branches");
  }
  ValidateTracks(gt.tracks);
  const std::size_t frames = gt.num_frames();
  const std::size_t block = static_cast<std::size_t>(em.perm_block_frames);
  const std::size_t num_blocks = (frames + block - 1) / block;

  TrackerOutput out;
  Rng swap_rng(DeriveSeed(em.seed, {1}));
  std::bernoulli_distribution swap(em.SwapProbability());
  out.block_swapped.resize(num_blocks);
  for (std::size_t b = 0; b < num_blocks; ++b) out.block_swapped[b] = swap(swap_rng);

  out.tracks.resize(kTrackerBranches);
  for (int i = 0; i < kTrackerBranches; ++i) {
    out.tracks[i].track_id = i;
    out.tracks[i].directions.assign(frames, Direction());
    out.tracks[i].active.assign(frames, false);
  }
  for (std::size_t f = 0; f < frames; ++f) {
    const bool swapped = out.block_swapped[f / block];
    for (std::size_t s = 0; s < gt.tracks.size(); ++s) {
      const std::size_t branch = swapped ? 1 - s : s;
      out.tracks[branch].directions[f] = gt.tracks[s].directions[f];
      out.tracks[branch].active[f] = gt.tracks[s].active[f];
    }
  }

  Rng noise_rng(DeriveSeed(em.seed, {2}));
  const double sigma = DegToRad(em.angle_noise_deg);
  std::normal_distribution<double> normal(0.0, sigma > 0.0 ? sigma : 1.0);
  std::uniform_real_distribution<double> bearing(0.0, 2.0 * std::numbers::pi);
  std::bernoulli_distribution miss(em.miss_prob);
  for (Track& t : out.tracks) {
    for (std::size_t f = 0; f < frames; ++f) {
      if (!t.active[f]) continue;
      const double angle = sigma > 0.0 ? std::abs(normal(noise_rng)) : 0.0;
      const double b = bearing(noise_rng);
      t.directions[f] = Perturb(t.directions[f], angle, b);
      if (miss(noise_rng)) t.active[f] = false;
    }
  }
  return out;
}

}  // namespace spkr
