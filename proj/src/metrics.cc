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

#include "spkreassign/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "csv_util.h"
#include "spkreassign/hungarian.h"
#include "spkreassign/rng.h"

namespace spkr {

void MatchConfig::Validate() const {
  if (!(angle_threshold_deg > 0.0)) {
    throw std::invalid_argument("MatchConfig: angle_threshold_deg must be > 0");
  }
}

MatchResult MatchFrames(const GroundTruth& gt, const ReassignedTimeline& timeline,
                        const MatchConfig& cfg) {
  cfg.Validate();
  const std::size_t frames = gt.num_frames();
  if (!timeline.tracks.empty() && !gt.tracks.empty() &&
      timeline.num_frames() != frames) {
    throw std::invalid_argument("MatchFrames: frame grids differ (" +
                                std::to_string(frames) + " vs " +
                                std::to_string(timeline.num_frames()) + ")");
  }
  const std::size_t n_frames = gt.tracks.empty() ? timeline.num_frames() : frames;
  // Large enough that a single below-threshold pair always beats any number
  // of above-threshold ones.
  const double kBig = 1e6;

  MatchResult r;
  r.gt_points.assign(gt.tracks.size(), 0);
  std::map<int, std::size_t> label_points;
  std::vector<std::size_t> g_idx, p_idx;
  std::vector<double> cost;
  for (std::size_t f = 0; f < n_frames; ++f) {
    g_idx.clear();
    p_idx.clear();
    for (std::size_t g = 0; g < gt.tracks.size(); ++g) {
      if (gt.tracks[g].active[f]) {
        g_idx.push_back(g);
        ++r.gt_points[g];
      }
    }
    for (std::size_t p = 0; p < timeline.tracks.size(); ++p) {
      if (timeline.tracks[p].active[f]) {
        p_idx.push_back(p);
        ++label_points[timeline.tracks[p].labels[f]];
      }
    }
    std::size_t matched = 0;
    if (!g_idx.empty() && !p_idx.empty()) {
      const int rows = static_cast<int>(g_idx.size());
      const int cols = static_cast<int>(p_idx.size());
      cost.assign(static_cast<std::size_t>(rows) * cols, 0.0);
      std::vector<double> dist(cost.size());
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
          const double d = AngularDistanceDeg(gt.tracks[g_idx[i]].directions[f],
                                              timeline.tracks[p_idx[j]].directions[f]);
          dist[i * cols + j] = d;
          cost[i * cols + j] = d < cfg.angle_threshold_deg ? d : kBig;
        }
      }
      const std::vector<int> assign = SolveAssignment(cost, rows, cols);
      for (int i = 0; i < rows; ++i) {
        const int j = assign[i];
        if (j < 0 || dist[i * cols + j] >= cfg.angle_threshold_deg) continue;
        FrameMatch m;
        m.frame = f;
        m.gt = g_idx[i];
        m.pred = p_idx[j];
        m.label = timeline.tracks[p_idx[j]].labels[f];
        m.distance_deg = dist[i * cols + j];
        r.total_cost_deg += m.distance_deg;
        r.matches.push_back(m);
        ++matched;
      }
    }
    r.misses += g_idx.size() - matched;
    r.false_positives += p_idx.size() - matched;
  }
  r.label_points.assign(label_points.begin(), label_points.end());
  return r;
}

AssAReport Assa(const MatchResult& matches) {
  AssAReport rep;
  rep.tp_count = matches.matches.size();
  if (rep.tp_count == 0) return rep;
  std::map<std::pair<std::size_t, int>, std::size_t> tpa;
  for (const FrameMatch& m : matches.matches) ++tpa[{m.gt, m.label}];
  std::map<int, std::size_t> label_points(matches.label_points.begin(),
                                          matches.label_points.end());
  double total = 0.0;
  for (const auto& [key, count] : tpa) {
    AssociationRow row;
    row.gt = key.first;
    row.label = key.second;
    row.tpa = count;
    row.fna = matches.gt_points.at(key.first) - count;
    row.fpa = label_points.at(key.second) - count;
    // Each of the `count` TPs of this pair contributes the same score.
    total += static_cast<double>(count) * count /
             static_cast<double>(row.tpa + row.fna + row.fpa);
    rep.pairs.push_back(row);
  }
  rep.assa = total / static_cast<double>(rep.tp_count);
  return rep;
}

BootstrapResult BootstrapAssa(std::span<const double> scene_scores,
                              std::uint64_t seed, int iterations,
                              double fraction) {
  const std::size_t n = scene_scores.size();
  if (n < 5) {
    throw std::invalid_argument("BootstrapAssa: need at least 5 scenes, got " +
                                std::to_string(n));
  }
  if (iterations < 1 || !(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("BootstrapAssa: bad iterations or fraction");
  }
  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  Rng rng(DeriveSeed(seed, {0xB007}));
  std::vector<std::size_t> idx(n);
  std::vector<double> means;
  for (int it = 0; it < iterations; ++it) {
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: the first k entries are a uniform subset.
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
      std::swap(idx[i], idx[j]);
      sum += scene_scores[idx[i]];
    }
    means.push_back(sum / static_cast<double>(k));
  }
  BootstrapResult r;
  for (double m : means) r.mean += m;
  r.mean /= means.size();
  for (double m : means) r.std += (m - r.mean) * (m - r.mean);
  r.std = std::sqrt(r.std / means.size());
  return r;
}

std::size_t CountSwaps(const MatchResult& matches) {
  std::map<std::size_t, int> last;
  std::size_t swaps = 0;
  for (const FrameMatch& m : matches.matches) {
    auto it = last.find(m.gt);
    if (it != last.end() && it->second != m.label) ++swaps;
    last[m.gt] = m.label;
  }
  return swaps;
}

std::size_t CountSwaps(const ReassignedTimeline& timeline, const GroundTruth& gt,
                       const MatchConfig& cfg) {
  return CountSwaps(MatchFrames(gt, timeline, cfg));
}

std::string ReportToCsv(std::span<const ReportRow> rows) {
  std::ostringstream out;
  out << "scene_id,condition,block_or_context_ms,assa,swaps\n";
  for (const ReportRow& r : rows) {
    out << r.scene_id << ',' << r.condition << ','
        << internal::FormatFixed(r.block_or_context_ms, 1) << ','
        << internal::FormatFixed(r.assa, 6) << ',' << r.swaps << '\n';
  }
  return out.str();
}

std::vector<ReportRow> ReportFromCsv(const std::string& text) {
  const internal::CsvTable table = internal::ParseCsv(text);
  std::vector<ReportRow> rows;
  if (table.rows.empty()) return rows;
  const std::size_t c_scene = table.Require("scene_id");
  const std::size_t c_cond = table.Require("condition");
  const std::size_t c_ms = table.Require("block_or_context_ms");
  const std::size_t c_assa = table.Require("assa");
  const std::size_t c_swaps = table.Require("swaps");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = table.line_numbers[i];
    ReportRow r;
    r.scene_id = row[c_scene];
    r.condition = row[c_cond];
    r.block_or_context_ms = internal::ParseDouble(row[c_ms], "block_or_context_ms", line);
    r.assa = internal::ParseDouble(row[c_assa], "assa", line);
    r.swaps = static_cast<std::size_t>(internal::ParseInt(row[c_swaps], "swaps", line));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace spkr
