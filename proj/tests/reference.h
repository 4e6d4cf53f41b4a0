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

#ifndef SPKREASSIGN_TESTS_REFERENCE_H_
#define SPKREASSIGN_TESTS_REFERENCE_H_

// Independent reference implementations shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "spkreassign/kd_train.h"
#include "spkreassign/metrics.h"
#include "spkreassign/reassign.h"
#include "spkreassign/rng.h"
#include "spkreassign/student.h"
#include "spkreassign/teacher.h"

namespace spkr::testing {

inline Track MakeTrack(int id, std::vector<Direction> dirs, std::vector<bool> active) {
  Track t;
  t.track_id = id;
  t.directions = std::move(dirs);
  t.active = std::move(active);
  return t;
}

inline TimelineTrack MakeTimelineTrack(const Track& t, std::vector<int> labels) {
  TimelineTrack tt;
  tt.source_track_id = t.track_id;
  tt.directions = t.directions;
  tt.active = t.active;
  tt.labels = std::move(labels);
  tt.similarity.assign(tt.labels.size(), 0.0);
  return tt;
}

// Brute-force AssA: for every TP, count TPA/FNA/FPA by scanning all points.
inline double BruteForceAssa(const GroundTruth& gt, const ReassignedTimeline& tl,
                             const MatchResult& m) {
  if (m.matches.empty()) return 0.0;
  double sum = 0.0;
  for (const FrameMatch& c : m.matches) {
    std::size_t tpa = 0;
    for (const FrameMatch& d : m.matches) tpa += d.gt == c.gt && d.label == c.label;
    std::size_t g_points = 0, p_points = 0;
    for (std::size_t f = 0; f < gt.num_frames(); ++f) {
      g_points += gt.tracks[c.gt].active[f];
      for (const TimelineTrack& t : tl.tracks) {
        p_points += t.active[f] && t.labels[f] == c.label;
      }
    }
    const double fna = static_cast<double>(g_points - tpa);
    const double fpa = static_cast<double>(p_points - tpa);
    sum += tpa / (tpa + fna + fpa);
  }
  return sum / m.matches.size();
}

// (gt, label) -> {TPA, FNA, FPA} by scanning all points.
inline std::map<std::pair<std::size_t, int>, std::array<std::size_t, 3>> BruteForceCounts(
    const GroundTruth& gt, const ReassignedTimeline& tl, const MatchResult& m) {
  std::map<std::pair<std::size_t, int>, std::array<std::size_t, 3>> out;
  for (const FrameMatch& c : m.matches) {
    auto& slot = out[{c.gt, c.label}];
    if (slot[0] != 0) continue;
    std::size_t tpa = 0;
    for (const FrameMatch& d : m.matches) tpa += d.gt == c.gt && d.label == c.label;
    std::size_t g_points = 0, p_points = 0;
    for (std::size_t f = 0; f < gt.num_frames(); ++f) {
      g_points += gt.tracks[c.gt].active[f];
      for (const TimelineTrack& t : tl.tracks) {
        p_points += t.active[f] && t.labels[f] == c.label;
      }
    }
    slot = {tpa, g_points - tpa, p_points - tpa};
  }
  return out;
}

// Ground truth and two identities swapped for exactly the second half.
inline std::pair<GroundTruth, ReassignedTimeline> HalfSwapCase(std::size_t frames) {
  GroundTruth gt;
  gt.tracks = {MakeTrack(0, std::vector<Direction>(frames, Direction::FromDegrees(0, 0)),
                         std::vector<bool>(frames, true)),
               MakeTrack(1, std::vector<Direction>(frames, Direction::FromDegrees(90, 0)),
                         std::vector<bool>(frames, true))};
  gt.speaker_ids = {0, 1};
  ReassignedTimeline tl;
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<int> labels(frames, static_cast<int>(i));
    for (std::size_t f = frames / 2; f < frames; ++f) labels[f] = static_cast<int>(1 - i);
    tl.tracks.push_back(MakeTimelineTrack(gt.tracks[i], labels));
  }
  return {gt, tl};
}

struct RandomCase {
  GroundTruth gt;
  ReassignedTimeline tl;
};

// At most 200 frames and 2 tracks per side, with jitter, misses, false
// alarms, swaps and label noise.
inline RandomCase MakeRandomCase(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> frames_d(1, 200), tracks_d(1, 2), label_d(-1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0), jitter(-8.0, 8.0);
  const int frames = frames_d(rng);
  const int n_gt = tracks_d(rng);
  const int n_pred = tracks_d(rng);
  RandomCase rc;
  const double base[2] = {0.0, 90.0};
  for (int g = 0; g < n_gt; ++g) {
    std::vector<Direction> d(frames, Direction::FromDegrees(base[g], 0.0));
    std::vector<bool> a(frames);
    for (int f = 0; f < frames; ++f) a[f] = u(rng) < 0.7;
    rc.gt.tracks.push_back(MakeTrack(g, d, a));
    rc.gt.speaker_ids.push_back(g);
  }
  const double swap_rate = u(rng) * 0.2;
  const double label_noise = u(rng) * 0.3;
  bool swapped = false;
  for (int p = 0; p < n_pred; ++p) {
    rc.tl.tracks.push_back(MakeTimelineTrack(
        MakeTrack(p, std::vector<Direction>(frames), std::vector<bool>(frames)),
        std::vector<int>(frames, kNoLabel)));
  }
  for (int f = 0; f < frames; ++f) {
    if (u(rng) < swap_rate) swapped = !swapped;
    for (int p = 0; p < n_pred; ++p) {
      TimelineTrack& t = rc.tl.tracks[p];
      const int src = swapped ? 1 - p : p;
      const bool on = src < n_gt ? rc.gt.tracks[src].active[f] && u(rng) > 0.05
                                 : u(rng) < 0.2;
      t.active[f] = on;
      const double az = (src < n_gt ? base[src] : 45.0) + jitter(rng) * (u(rng) < 0.9 ? 1.0 : 3.0);
      t.directions[f] = Direction::FromDegrees(az, 0.0);
      t.labels[f] = u(rng) < label_noise ? label_d(rng) : src;
    }
  }
  return rc;
}

inline StudentModel RandomStudent(std::uint64_t seed) {
  const TeacherExtractor& t = DefaultTeacher();
  StudentModel m = StudentModel::Initialize(seed, t.input_mean(), t.input_scale(), 8, 6);
  Rng rng(seed + 1);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (auto block : m.Parameters()) {
    for (double& v : block) v += normal(rng);
  }
  return m;
}

inline std::vector<double> RandomPooled(std::uint64_t seed) {
  const TeacherExtractor& t = DefaultTeacher();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> p(2 * kDefaultBands);
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = t.input_mean()[k] + t.input_scale()[k] * normal(rng);
  }
  return p;
}

inline std::vector<double> RandomUnitTarget(std::uint64_t seed, int dim) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> target(dim);
  for (double& v : target) v = normal(rng);
  double n = 0.0;
  for (double v : target) n += v * v;
  for (double& v : target) v /= std::sqrt(n);
  return target;
}

struct GradCheckResult {
  int checked = 0;
  double worst_rel = 0.0;
  // Largest |KdGrad loss - KdLoss of the forward pass|.
  double worst_loss_diff = 0.0;
};

// Analytic KD gradients against a fourth-order central difference on three
// random entries of every parameter block, for `cases` random models.
inline GradCheckResult CheckKdGradients(int cases) {
  GradCheckResult r;
  for (int c = 0; c < cases; ++c) {
    StudentModel m = RandomStudent(100 + c);
    const std::vector<double> p = RandomPooled(200 + c);
    const std::vector<double> target = RandomUnitTarget(300 + c, m.output_dim);
    StudentGradients g = StudentGradients::ZerosLike(m);
    const double loss = KdGrad(m, p, target, &g);
    r.worst_loss_diff = std::max(
        r.worst_loss_diff, std::abs(loss - KdLoss(StudentForward(m, p).values(), target)));

    Rng pick(400 + c);
    auto params = m.Parameters();
    auto grads = g.Parameters();
    for (std::size_t b = 0; b < params.size(); ++b) {
      for (int trial = 0; trial < 3; ++trial) {
        const std::size_t i =
            std::uniform_int_distribution<std::size_t>(0, params[b].size() - 1)(pick);
        const double saved = params[b][i];
        const double h = 1e-4 * std::max(1.0, std::abs(saved));
        auto at = [&](double offset) {
          params[b][i] = saved + offset;
          return KdGrad(m, p, target, nullptr);
        };
        const double numeric =
            (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12.0 * h);
        params[b][i] = saved;
        const double analytic = grads[b][i];
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
        r.worst_rel = std::max(r.worst_rel, std::abs(numeric - analytic) / scale);
        ++r.checked;
      }
    }
  }
  return r;
}

}  // namespace spkr::testing

#endif  // SPKREASSIGN_TESTS_REFERENCE_H_
