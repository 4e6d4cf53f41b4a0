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

#ifndef SPKREASSIGN_METRICS_H_
#define SPKREASSIGN_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spkreassign/reassign.h"
#include "spkreassign/scene.h"

namespace spkr {

struct MatchConfig {
  double angle_threshold_deg = 10.0;
  void Validate() const;
};

struct FrameMatch {
  std::size_t frame = 0;
  std::size_t gt = 0;         // ground-truth track index
  std::size_t pred = 0;       // timeline track index
  int label = kNoLabel;       // identity carried by the prediction
  double distance_deg = 0.0;
};

struct MatchResult {
  std::vector<FrameMatch> matches;  // frame-major, then by gt index
  // Active points per ground-truth track and per predicted label.
  std::vector<std::size_t> gt_points;
  std::vector<std::pair<int, std::size_t>> label_points;
  std::size_t misses = 0;
  std::size_t false_positives = 0;
  double total_cost_deg = 0.0;
};

// Optimal one-to-one pairing per frame between active ground-truth and active
// predicted points, keeping pairs closer than the threshold. Throws
// std::invalid_argument if the frame grids differ.
MatchResult MatchFrames(const GroundTruth& gt, const ReassignedTimeline& timeline,
                        const MatchConfig& cfg = MatchConfig());

struct AssociationRow {
  std::size_t gt = 0;
  int label = kNoLabel;
  std::size_t tpa = 0;
  std::size_t fna = 0;
  std::size_t fpa = 0;
};

struct AssAReport {
  double assa = 0.0;
  std::size_t tp_count = 0;
  std::vector<AssociationRow> pairs;
};

// Mean over true positives of TPA / (TPA + FNA + FPA); 0 without TPs.
AssAReport Assa(const MatchResult& matches);

struct BootstrapResult {
  double mean = 0.0;
  double std = 0.0;
};

// Means over `iterations` subsets of round(fraction * n) scenes drawn without
// replacement; reports their mean and population standard deviation. Throws
// std::invalid_argument with fewer than five scenes.
BootstrapResult BootstrapAssa(std::span<const double> scene_scores,
                              std::uint64_t seed, int iterations = 100,
                              double fraction = 0.8);

// Label changes along each ground-truth speaker's matched frames.
std::size_t CountSwaps(const MatchResult& matches);
std::size_t CountSwaps(const ReassignedTimeline& timeline, const GroundTruth& gt,
                       const MatchConfig& cfg = MatchConfig());

struct ReportRow {
  std::string scene_id;
  std::string condition;
  double block_or_context_ms = 0.0;
  double assa = 0.0;
  std::size_t swaps = 0;
};

std::string ReportToCsv(std::span<const ReportRow> rows);
std::vector<ReportRow> ReportFromCsv(const std::string& text);

}  // namespace spkr

#endif  // SPKREASSIGN_METRICS_H_
