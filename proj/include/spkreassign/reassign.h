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

#ifndef SPKREASSIGN_REASSIGN_H_
#define SPKREASSIGN_REASSIGN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spkreassign/beamform.h"
#include "spkreassign/embedding.h"
#include "spkreassign/foa.h"
#include "spkreassign/scene.h"
#include "spkreassign/track.h"

namespace spkr {

constexpr int kNoLabel = -1;
constexpr int kDefaultGapToleranceFrames = 8;
constexpr double kDefaultEnrollmentMs = 2000.0;
constexpr double kDefaultPortionActiveFraction = 0.25;

// Active period of one track. Gaps of at most the gap tolerance are bridged,
// so `active` may contain short inactive runs; the ends are always active.
struct Fragment {
  int source_track_id = 0;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;  // exclusive
  std::vector<Direction> directions;
  std::vector<bool> active;
  std::size_t length() const { return end_frame - start_frame; }
};

// Ordered by start frame, then track id.
std::vector<Fragment> FragmentTracks(
    const std::vector<Track>& tracks,
    int gap_tolerance_frames = kDefaultGapToleranceFrames);

struct EnrollmentEntry {
  int label = kNoLabel;
  Embedding embedding;
};

class EnrollmentPool {
 public:
  // Throws std::invalid_argument on a duplicate label, a dimension mismatch
  // or an embedding that is not unit-norm.
  void Add(int label, Embedding embedding);
  std::span<const EnrollmentEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dim() const { return entries_.empty() ? 0 : entries_[0].embedding.dim(); }

 private:
  std::vector<EnrollmentEntry> entries_;
};

std::string EnrollmentPoolToJson(const EnrollmentPool& pool);
EnrollmentPool EnrollmentPoolFromJson(const std::string& text);

struct Decision {
  int label = kNoLabel;
  double similarity = 0.0;
};

// Highest dot product; the earliest entry wins ties. Throws on an empty pool
// or a dimension mismatch.
Decision Decide(const Embedding& e, const EnrollmentPool& pool);

// Greedy one-to-one labelling by descending similarity. Items beyond the
// pool size fall back to Decide().
std::vector<Decision> DecideExclusive(std::span<const Embedding> items,
                                      const EnrollmentPool& pool);

// Longest run of frames where `speaker` is the only active ground-truth
// track, as [begin, end).
std::pair<std::size_t, std::size_t> LongestCleanSpan(const GroundTruth& gt,
                                                     std::size_t speaker);

// One embedding per ground-truth speaker, extracted from the mixture
// beamformed along the speaker's trajectory over its longest clean span.
// Labels are the ground-truth speaker ids. Throws std::runtime_error when a
// speaker has no clean span of min_dur_ms.
EnrollmentPool BuildEnrollments(const FoaSignal& y, const GroundTruth& gt,
                                const Extractor& extractor,
                                double min_dur_ms = kDefaultEnrollmentMs,
                                double pattern = kCardioidPattern);

// Identity per frame for each source track.
struct TimelineTrack {
  int source_track_id = 0;
  std::vector<Direction> directions;
  std::vector<bool> active;
  std::vector<int> labels;
  std::vector<double> similarity;
};

struct ReassignedTimeline {
  std::vector<TimelineTrack> tracks;
  std::size_t num_frames() const {
    return tracks.empty() ? 0 : tracks[0].labels.size();
  }
};

// Copies positions and activity, with every label unset.
ReassignedTimeline EmptyTimeline(const std::vector<Track>& tracks);
// Branch index as identity on every active frame (no reassignment).
ReassignedTimeline BranchTimeline(const std::vector<Track>& tracks);

// Header frame_index,source_track_id,identity_label,similarity; one row per
// frame and track, -1 for no label.
std::string TimelineToCsv(const ReassignedTimeline& timeline);
void WriteTimelineCsv(const std::filesystem::path& path,
                      const ReassignedTimeline& timeline);
// Labels and similarities from CSV, positions and activity from `tracks`.
ReassignedTimeline TimelineFromCsv(const std::string& text,
                                   const std::vector<Track>& tracks);

enum class StartPolicy { kBeginning, kRandom };

struct FragmentOptions {
  // 0 means the whole fragment.
  double context_ms = 0.0;
  StartPolicy start_policy = StartPolicy::kBeginning;
  std::uint64_t seed = 0;
  int gap_tolerance_frames = kDefaultGapToleranceFrames;
  double pattern = kCardioidPattern;
};

// Extracts one embedding per fragment from a window of `context_ms` at the
// fragment start (or at a random frame-aligned start keeping the window
// inside the fragment), and labels all active frames of the fragment with the
// decision. Windows shorter than the extractor minimum are widened. Throws
// std::invalid_argument if 0 < context_ms < extractor minimum.
ReassignedTimeline ReassignFragments(const FoaSignal& y,
                                     const std::vector<Track>& tracks,
                                     const EnrollmentPool& pool,
                                     const Extractor& extractor,
                                     const FragmentOptions& options);
ReassignedTimeline ReassignFragments(const FoaSignal& y,
                                     const std::vector<Track>& tracks,
                                     std::span<const Fragment> fragments,
                                     const EnrollmentPool& pool,
                                     const Extractor& extractor,
                                     const FragmentOptions& options);

struct BlockwiseOptions {
  int block_frames = 25;
  double min_active_fraction = kDefaultPortionActiveFraction;
  bool exclusive = false;
  double pattern = kCardioidPattern;
};

// Audio and tracks of one block, as read from a stream.
struct BlockInput {
  std::size_t block_index = 0;
  std::size_t start_frame = 0;
  FoaSignal audio;             // exactly (end - start) frames of samples
  std::vector<Track> tracks;   // frames of this block only
  std::size_t num_frames() const { return tracks.empty() ? 0 : tracks[0].num_frames(); }
};

struct Portion {
  int source_track_id = 0;
  // Absolute frames: first active frame and one past the last.
  std::size_t first_active = 0;
  std::size_t end_active = 0;
  double active_fraction = 0.0;
};

struct BlockView {
  std::size_t block_index = 0;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  // Tracks with any active frame, ordered by first active frame then id.
  std::vector<Portion> portions;
};

BlockView MakeBlockView(const BlockInput& block);

struct PortionDecision {
  Portion portion;
  Decision decision;
  // Set when the portion fell below the activity threshold and took over
  // the track's previous decision.
  bool inherited = false;
};

struct BlockDecisions {
  std::size_t block_index = 0;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  std::vector<PortionDecision> portions;
};

class BlockSource {
 public:
  virtual ~BlockSource() = default;
  // Next block, or nullopt at the end of the stream.
  virtual std::optional<BlockInput> Next() = 0;
};

class BlockSink {
 public:
  virtual ~BlockSink() = default;
  virtual void Emit(const BlockDecisions& decisions) = 0;
};

// Cuts an in-memory scene into consecutive blocks; the last may be shorter.
class SceneBlockSource : public BlockSource {
 public:
  // Throws std::invalid_argument if block_frames < 1 or the tracks do not
  // match the signal's frame count.
  SceneBlockSource(const FoaSignal& y, const std::vector<Track>& tracks,
                   int block_frames);
  std::optional<BlockInput> Next() override;
  std::size_t blocks_read() const { return next_; }

 private:
  const FoaSignal& y_;
  const std::vector<Track>& tracks_;
  std::size_t block_frames_;
  std::size_t num_frames_;
  std::size_t next_ = 0;
};

// Sequential blockwise engine. Portions active on at least
// min_active_fraction of the block are embedded from the block audio beamformed
// along their own track; sparser portions inherit the track's previous
// decision, or are decided fresh when the track has none. Extraction windows
// span the portion and are widened to the extractor minimum, reaching back
// into already-consumed audio when the block is too short.
class BlockwiseReassigner {
 public:
  // Throws std::invalid_argument if block_frames is below the extractor
  // minimum.
  BlockwiseReassigner(const EnrollmentPool& pool, const Extractor& extractor,
                      const BlockwiseOptions& options, int sample_rate);
  BlockDecisions Process(const BlockInput& block);

 private:
  const EnrollmentPool& pool_;
  const Extractor& extractor_;
  BlockwiseOptions options_;
  int sample_rate_;
  std::size_t min_frames_;
  std::vector<std::optional<Decision>> previous_;
  // Most recent consumed frames, for widening short windows.
  std::optional<BlockInput> history_;
};

// Pulls blocks until the source is exhausted and emits each block's decisions
// before reading the next block.
void RunBlockwise(BlockSource& source, BlockSink& sink,
                  BlockwiseReassigner& engine);

// Writes block decisions into a timeline.
class TimelineSink : public BlockSink {
 public:
  explicit TimelineSink(const std::vector<Track>& tracks);
  void Emit(const BlockDecisions& decisions) override;
  const ReassignedTimeline& timeline() const { return timeline_; }

 private:
  ReassignedTimeline timeline_;
};

ReassignedTimeline ReassignBlockwise(const FoaSignal& y,
                                     const std::vector<Track>& tracks,
                                     const EnrollmentPool& pool,
                                     const Extractor& extractor,
                                     const BlockwiseOptions& options);

// Ground-truth-aware extractor: returns the one-hot vector of the speaker
// whose trajectory agrees with the request's steering on the most active
// frames (within threshold_deg).
class OracleExtractor : public Extractor {
 public:
  explicit OracleExtractor(GroundTruth gt, int dim = 8,
                           double threshold_deg = 10.0);
  Embedding Extract(const ExtractionRequest& request) const override;
  std::string name() const override { return "oracle"; }
  // One-hot vector for a speaker index, or for index num_speakers + j for
  // the j-th distractor.
  Embedding Basis(std::size_t index) const;
  std::size_t num_speakers() const { return gt_.tracks.size(); }

 private:
  GroundTruth gt_;
  int dim_;
  double threshold_deg_;
};

}  // namespace spkr

#endif  // SPKREASSIGN_REASSIGN_H_
