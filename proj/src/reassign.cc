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

#include "spkreassign/reassign.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "csv_util.h"
#include "json.hpp"
#include "spkreassign/rng.h"

namespace spkr {

std::vector<Fragment> FragmentTracks(const std::vector<Track>& tracks,
                                     int gap_tolerance_frames) {
  ValidateTracks(tracks);
  const std::size_t tol = static_cast<std::size_t>(std::max(0, gap_tolerance_frames));
  std::vector<Fragment> out;
  for (const Track& t : tracks) {
    const std::size_t n = t.num_frames();
    std::size_t f = 0;
    while (f < n) {
      if (!t.active[f]) {
        ++f;
        continue;
      }
      const std::size_t start = f;
      std::size_t last = f;  // last active frame so far
      for (std::size_t g = f + 1; g < n; ++g) {
        if (t.active[g]) {
          last = g;
        } else if (g - last > tol) {
          break;
        }
      }
      Fragment frag;
      frag.source_track_id = t.track_id;
      frag.start_frame = start;
      frag.end_frame = last + 1;
      frag.directions.assign(t.directions.begin() + start,
                             t.directions.begin() + last + 1);
      frag.active.assign(t.active.begin() + start, t.active.begin() + last + 1);
      out.push_back(std::move(frag));
      f = last + 1;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Fragment& a, const Fragment& b) {
    if (a.start_frame != b.start_frame) return a.start_frame < b.start_frame;
    return a.source_track_id < b.source_track_id;
  });
  return out;
}

void EnrollmentPool::Add(int label, Embedding embedding) {
  for (const auto& e : entries_) {
    if (e.label == label) {
      throw std::invalid_argument("EnrollmentPool: duplicate label " +
                                  std::to_string(label));
    }
  }
  if (!entries_.empty() && embedding.dim() != dim()) {
    throw std::invalid_argument("EnrollmentPool: dimension mismatch");
  }
  double n = 0.0;
  for (double v : embedding.values()) n += v * v;
  if (std::abs(std::sqrt(n) - 1.0) > 1e-6) {
    throw std::invalid_argument("EnrollmentPool: embedding is not unit-norm");
  }
  entries_.push_back({label, std::move(embedding)});
}

std::string EnrollmentPoolToJson(const EnrollmentPool& pool) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["dimension"] = pool.dim();
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : pool.entries()) {
    nlohmann::ordered_json item;
    item["label"] = e.label;
    item["vector"] = std::vector<double>(e.embedding.values().begin(),
                                         e.embedding.values().end());
    j["entries"].push_back(item);
  }
  return j.dump(2) + "\n";
}

EnrollmentPool EnrollmentPoolFromJson(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("version").get<int>() != 1) {
    throw std::runtime_error("enrollment pool: unsupported version");
  }
  const std::size_t dim = j.at("dimension").get<std::size_t>();
  EnrollmentPool pool;
  for (const auto& item : j.at("entries")) {
    auto v = item.at("vector").get<std::vector<double>>();
    if (v.size() != dim) {
      throw std::runtime_error("enrollment pool: vector size differs from dimension");
    }
    pool.Add(item.at("label").get<int>(), Embedding::Normalize(std::move(v)));
  }
  return pool;
}

Decision Decide(const Embedding& e, const EnrollmentPool& pool) {
  if (pool.empty()) throw std::invalid_argument("Decide: empty enrollment pool");
  if (e.dim() != pool.dim()) {
    throw std::invalid_argument("Decide: embedding dimension differs from pool");
  }
  Decision best;
  bool first = true;
  for (const auto& entry : pool.entries()) {
    const double s = Cosine(e, entry.embedding);
    if (first || s > best.similarity) {
      best = {entry.label, s};
      first = false;
    }
  }
  return best;
}

std::vector<Decision> DecideExclusive(std::span<const Embedding> items,
                                      const EnrollmentPool& pool) {
  if (pool.empty()) throw std::invalid_argument("Decide: empty enrollment pool");
  struct Cand {
    double s;
    std::size_t item, entry;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].dim() != pool.dim()) {
      throw std::invalid_argument("Decide: embedding dimension differs from pool");
    }
    for (std::size_t k = 0; k < pool.size(); ++k) {
      cands.push_back({Cosine(items[i], pool.entries()[k].embedding), i, k});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.s != b.s) return a.s > b.s;
    if (a.item != b.item) return a.item < b.item;
    return a.entry < b.entry;
  });
  std::vector<Decision> out(items.size());
  std::vector<bool> item_done(items.size(), false), entry_used(pool.size(), false);
  for (const Cand& c : cands) {
    if (item_done[c.item] || entry_used[c.entry]) continue;
    out[c.item] = {pool.entries()[c.entry].label, c.s};
    item_done[c.item] = true;
    entry_used[c.entry] = true;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!item_done[i]) out[i] = Decide(items[i], pool);
  }
  return out;
}

std::pair<std::size_t, std::size_t> LongestCleanSpan(const GroundTruth& gt,
                                                     std::size_t speaker) {
  if (speaker >= gt.tracks.size()) {
    throw std::out_of_range("LongestCleanSpan: no such speaker");
  }
  const std::size_t n = gt.num_frames();
  std::pair<std::size_t, std::size_t> best{0, 0};
  std::size_t run_start = 0;
  bool in_run = false;
  for (std::size_t f = 0; f <= n; ++f) {
    bool clean = false;
    if (f < n && gt.tracks[speaker].active[f]) {
      clean = true;
      for (std::size_t k = 0; k < gt.tracks.size(); ++k) {
        if (k != speaker && gt.tracks[k].active[f]) clean = false;
      }
    }
    if (clean && !in_run) {
      run_start = f;
      in_run = true;
    } else if (!clean && in_run) {
      if (f - run_start > best.second - best.first) best = {run_start, f};
      in_run = false;
    }
  }
  return best;
}

namespace {

ExtractionRequest MakeRequest(std::span<const double> mono, int sample_rate,
                              const Track& track, std::size_t begin_frame,
                              std::size_t end_frame) {
  ExtractionRequest r;
  r.mono = mono;
  r.sample_rate = sample_rate;
  r.start_frame = begin_frame;
  r.directions.assign(track.directions.begin() + begin_frame,
                      track.directions.begin() + end_frame);
  r.active.assign(track.active.begin() + begin_frame,
                  track.active.begin() + end_frame);
  return r;
}

std::size_t MinFrames(const Extractor& extractor, const FrameGrid& grid) {
  const double frames = extractor.min_duration_ms() / grid.frame_ms();
  return static_cast<std::size_t>(std::ceil(frames - 1e-9));
}

// Grows [begin, end) to at least `need` frames inside [lo, hi), to the right
// first.
std::pair<std::size_t, std::size_t> Widen(std::size_t begin, std::size_t end,
                                          std::size_t need, std::size_t lo,
                                          std::size_t hi) {
  if (end - begin >= need) return {begin, end};
  end = std::min(hi, begin + need);
  if (end - begin < need) begin = end >= lo + need ? end - need : lo;
  return {begin, end};
}

}  // namespace

EnrollmentPool BuildEnrollments(const FoaSignal& y, const GroundTruth& gt,
                                const Extractor& extractor, double min_dur_ms,
                                double pattern) {
  const FrameGrid grid(y.sample_rate());
  const auto need = static_cast<std::size_t>(
      std::ceil(min_dur_ms / grid.frame_ms() - 1e-9));
  EnrollmentPool pool;
  for (std::size_t k = 0; k < gt.tracks.size(); ++k) {
    const auto [begin, end] = LongestCleanSpan(gt, k);
    if (end - begin < std::max<std::size_t>(need, 1)) {
      throw std::runtime_error(
          "BuildEnrollments: speaker " + std::to_string(gt.speaker_ids[k]) +
          " has no clean span of " + std::to_string(min_dur_ms) + " ms");
    }
    const Track& track = gt.tracks[k];
    std::vector<double> mono =
        BeamformRange(y, SteeringTrajectory::FromTrack(track), pattern,
                      grid.FrameStart(begin), grid.FrameStart(end));
    pool.Add(gt.speaker_ids[k],
             extractor.Extract(MakeRequest(mono, y.sample_rate(), track, begin, end)));
  }
  return pool;
}

ReassignedTimeline EmptyTimeline(const std::vector<Track>& tracks) {
  ValidateTracks(tracks);
  ReassignedTimeline tl;
  for (const Track& t : tracks) {
    TimelineTrack tt;
    tt.source_track_id = t.track_id;
    tt.directions = t.directions;
    tt.active = t.active;
    tt.labels.assign(t.num_frames(), kNoLabel);
    tt.similarity.assign(t.num_frames(), 0.0);
    tl.tracks.push_back(std::move(tt));
  }
  return tl;
}

ReassignedTimeline BranchTimeline(const std::vector<Track>& tracks) {
  ReassignedTimeline tl = EmptyTimeline(tracks);
  for (TimelineTrack& t : tl.tracks) {
    for (std::size_t f = 0; f < t.labels.size(); ++f) {
      if (t.active[f]) t.labels[f] = t.source_track_id;
    }
  }
  return tl;
}

std::string TimelineToCsv(const ReassignedTimeline& timeline) {
  std::ostringstream out;
  out << "frame_index,source_track_id,identity_label,similarity\n";
  for (std::size_t f = 0; f < timeline.num_frames(); ++f) {
    for (const TimelineTrack& t : timeline.tracks) {
      out << f << ',' << t.source_track_id << ',' << t.labels[f] << ','
          << internal::FormatFixed(t.similarity[f], 6) << '\n';
    }
  }
  return out.str();
}

void WriteTimelineCsv(const std::filesystem::path& path,
                      const ReassignedTimeline& timeline) {
  internal::WriteTextFileAtomic(path, TimelineToCsv(timeline));
}

ReassignedTimeline TimelineFromCsv(const std::string& text,
                                   const std::vector<Track>& tracks) {
  ReassignedTimeline tl = EmptyTimeline(tracks);
  const internal::CsvTable table = internal::ParseCsv(text);
  if (table.rows.empty()) return tl;
  const std::size_t c_frame = table.Require("frame_index");
  const std::size_t c_track = table.Require("source_track_id");
  const std::size_t c_label = table.Require("identity_label");
  const std::size_t c_sim = table.Require("similarity");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    const long f = internal::ParseInt(row[c_frame], "frame_index", line);
    const long id = internal::ParseInt(row[c_track], "source_track_id", line);
    auto it = std::find_if(tl.tracks.begin(), tl.tracks.end(),
                           [&](const TimelineTrack& t) { return t.source_track_id == id; });
    if (it == tl.tracks.end() || f < 0 ||
        static_cast<std::size_t>(f) >= tl.num_frames()) {
      throw std::runtime_error("timeline CSV line " + std::to_string(line) +
                               ": frame or track outside the tracks");
    }
    it->labels[f] = static_cast<int>(internal::ParseInt(row[c_label], "identity_label", line));
    it->similarity[f] = internal::ParseDouble(row[c_sim], "similarity", line);
  }
  return tl;
}

ReassignedTimeline ReassignFragments(const FoaSignal& y,
                                     const std::vector<Track>& tracks,
                                     const EnrollmentPool& pool,
                                     const Extractor& extractor,
                                     const FragmentOptions& options) {
  const std::vector<Fragment> fragments =
      FragmentTracks(tracks, options.gap_tolerance_frames);
  return ReassignFragments(y, tracks, fragments, pool, extractor, options);
}

ReassignedTimeline ReassignFragments(const FoaSignal& y,
                                     const std::vector<Track>& tracks,
                                     std::span<const Fragment> fragments,
                                     const EnrollmentPool& pool,
                                     const Extractor& extractor,
                                     const FragmentOptions& options) {
  if (options.context_ms < 0.0 ||
      (options.context_ms > 0.0 &&
       options.context_ms + 1e-9 < extractor.min_duration_ms())) {
    throw std::invalid_argument("ReassignFragments: context shorter than the " +
                                extractor.name() + " minimum");
  }
  const FrameGrid grid(y.sample_rate());
  const std::size_t frames = grid.FrameCount(y.num_samples());
  const std::size_t frame_len = grid.frame_samples();
  const std::size_t min_samples = grid.MsToSamples(extractor.min_duration_ms());
  ReassignedTimeline tl = EmptyTimeline(tracks);
  if (tl.num_frames() != frames) {
    throw std::invalid_argument("ReassignFragments: tracks do not match the signal");
  }

  for (std::size_t i = 0; i < fragments.size(); ++i) {
    const Fragment& frag = fragments[i];
    auto it = std::find_if(tracks.begin(), tracks.end(), [&](const Track& t) {
      return t.track_id == frag.source_track_id;
    });
    if (it == tracks.end()) {
      throw std::invalid_argument("ReassignFragments: fragment of unknown track");
    }
    const Track& track = *it;
    const std::size_t frag_begin = grid.FrameStart(frag.start_frame);
    const std::size_t frag_end = grid.FrameStart(frag.end_frame);

    std::size_t begin = frag_begin;
    std::size_t len = frag_end - frag_begin;
    if (options.context_ms > 0.0) {
      const std::size_t ctx = grid.MsToSamples(options.context_ms);
      if (options.start_policy == StartPolicy::kRandom && ctx < len) {
        const std::size_t slots = (len - ctx) / frame_len;
        Rng rng(DeriveSeed(options.seed, {frag.start_frame,
                                          static_cast<std::uint64_t>(frag.source_track_id)}));
        begin += frame_len *
                 std::uniform_int_distribution<std::size_t>(0, slots)(rng);
      }
      len = std::min(len, ctx);
    }
    // Widen windows of short fragments, to the right first.
    std::size_t end = begin + len;
    if (len < min_samples) {
      end = std::min(grid.FrameStart(frames), begin + min_samples);
      begin = end >= min_samples ? end - min_samples : 0;
    }
    const std::size_t f0 = grid.FrameOf(begin);
    const std::size_t f1 = std::min(frames, (end + frame_len - 1) / frame_len);

    std::vector<double> mono = BeamformRange(
        y, SteeringTrajectory::FromTrack(track), options.pattern, begin, end);
    const Embedding e =
        extractor.Extract(MakeRequest(mono, y.sample_rate(), track, f0, f1));
    const Decision d = Decide(e, pool);

    TimelineTrack& out = tl.tracks[it - tracks.begin()];
    for (std::size_t f = frag.start_frame; f < frag.end_frame; ++f) {
      if (!out.active[f]) continue;
      out.labels[f] = d.label;
      out.similarity[f] = d.similarity;
    }
  }
  return tl;
}

BlockView MakeBlockView(const BlockInput& block) {
  BlockView v;
  v.block_index = block.block_index;
  v.start_frame = block.start_frame;
  v.end_frame = block.start_frame + block.num_frames();
  for (const Track& t : block.tracks) {
    const std::size_t active = t.ActiveCount();
    if (active == 0) continue;
    Portion p;
    p.source_track_id = t.track_id;
    const auto first = std::find(t.active.begin(), t.active.end(), true);
    const auto last = std::find(t.active.rbegin(), t.active.rend(), true);
    p.first_active = block.start_frame + (first - t.active.begin());
    p.end_active = block.start_frame + (t.active.rend() - last);
    p.active_fraction = static_cast<double>(active) / t.num_frames();
    v.portions.push_back(p);
  }
  std::stable_sort(v.portions.begin(), v.portions.end(),
                   [](const Portion& a, const Portion& b) {
                     if (a.first_active != b.first_active) {
                       return a.first_active < b.first_active;
                     }
                     return a.source_track_id < b.source_track_id;
                   });
  return v;
}

SceneBlockSource::SceneBlockSource(const FoaSignal& y,
                                   const std::vector<Track>& tracks,
                                   int block_frames)
    : y_(y), tracks_(tracks) {
  if (block_frames < 1) {
    throw std::invalid_argument("SceneBlockSource: block_frames must be >= 1");
  }
  ValidateTracks(tracks);
  block_frames_ = static_cast<std::size_t>(block_frames);
  num_frames_ = FrameGrid(y.sample_rate()).FrameCount(y.num_samples());
  if (!tracks.empty() && tracks[0].num_frames() != num_frames_) {
    throw std::invalid_argument("SceneBlockSource: tracks do not match the signal");
  }
}

std::optional<BlockInput> SceneBlockSource::Next() {
  const std::size_t start = next_ * block_frames_;
  if (start >= num_frames_) return std::nullopt;
  const std::size_t end = std::min(num_frames_, start + block_frames_);
  const FrameGrid grid(y_.sample_rate());
  BlockInput b;
  b.block_index = next_++;
  b.start_frame = start;
  b.audio = y_.Slice(grid.FrameStart(start), grid.FrameStart(end));
  for (const Track& t : tracks_) {
    Track part;
    part.track_id = t.track_id;
    part.directions.assign(t.directions.begin() + start, t.directions.begin() + end);
    part.active.assign(t.active.begin() + start, t.active.begin() + end);
    b.tracks.push_back(std::move(part));
  }
  return b;
}

namespace {

// `a` followed by `b`; `b` must directly follow `a` in time.
BlockInput Concat(const BlockInput& a, const BlockInput& b) {
  BlockInput out;
  out.block_index = b.block_index;
  out.start_frame = a.start_frame;
  std::array<std::vector<double>, 4> ch;
  for (int c = 0; c < 4; ++c) {
    auto x = a.audio.channel(c);
    auto y = b.audio.channel(c);
    ch[c].reserve(x.size() + y.size());
    ch[c].insert(ch[c].end(), x.begin(), x.end());
    ch[c].insert(ch[c].end(), y.begin(), y.end());
  }
  out.audio = FoaSignal(std::move(ch), b.audio.sample_rate());
  for (std::size_t k = 0; k < b.tracks.size(); ++k) {
    Track t = a.tracks[k];
    t.directions.insert(t.directions.end(), b.tracks[k].directions.begin(),
                        b.tracks[k].directions.end());
    t.active.insert(t.active.end(), b.tracks[k].active.begin(),
                    b.tracks[k].active.end());
    out.tracks.push_back(std::move(t));
  }
  return out;
}

// Last `frames` frames of `b`.
BlockInput Tail(const BlockInput& b, std::size_t frames) {
  const std::size_t n = b.num_frames();
  if (frames >= n) return b;
  const FrameGrid grid(b.audio.sample_rate());
  BlockInput out;
  out.block_index = b.block_index;
  out.start_frame = b.start_frame + n - frames;
  out.audio = b.audio.Slice(grid.FrameStart(n - frames), grid.FrameStart(n));
  for (const Track& t : b.tracks) {
    Track part;
    part.track_id = t.track_id;
    part.directions.assign(t.directions.end() - frames, t.directions.end());
    part.active.assign(t.active.end() - frames, t.active.end());
    out.tracks.push_back(std::move(part));
  }
  return out;
}

}  // namespace

BlockwiseReassigner::BlockwiseReassigner(const EnrollmentPool& pool,
                                         const Extractor& extractor,
                                         const BlockwiseOptions& options,
                                         int sample_rate)
    : pool_(pool), extractor_(extractor), options_(options), sample_rate_(sample_rate) {
  const FrameGrid grid(sample_rate);
  min_frames_ = MinFrames(extractor, grid);
  if (options.block_frames < 1 ||
      static_cast<std::size_t>(options.block_frames) < min_frames_) {
    throw std::invalid_argument(
        "ReassignBlockwise: block of " + std::to_string(options.block_frames) +
        " frames is below the " + extractor.name() + " minimum of " +
        std::to_string(min_frames_) + " frames");
  }
  if (pool.empty()) {
    throw std::invalid_argument("ReassignBlockwise: empty enrollment pool");
  }
}

BlockDecisions BlockwiseReassigner::Process(const BlockInput& block) {
  const FrameGrid grid(sample_rate_);
  if (previous_.empty()) previous_.resize(block.tracks.size());
  if (block.tracks.size() != previous_.size()) {
    throw std::invalid_argument("ReassignBlockwise: track count changed mid-stream");
  }
  const BlockView view = MakeBlockView(block);
  const BlockInput buffer = history_ ? Concat(*history_, block) : block;
  const std::size_t buf_start = buffer.start_frame;
  const std::size_t buf_end = buf_start + buffer.num_frames();

  BlockDecisions out;
  out.block_index = block.block_index;
  out.start_frame = view.start_frame;
  out.end_frame = view.end_frame;

  std::vector<std::size_t> fresh;  // indices into out.portions
  std::vector<Embedding> embeddings;
  for (const Portion& p : view.portions) {
    const std::size_t k = static_cast<std::size_t>(
        std::find_if(block.tracks.begin(), block.tracks.end(),
                     [&](const Track& t) { return t.track_id == p.source_track_id; }) -
        block.tracks.begin());
    PortionDecision pd;
    pd.portion = p;
    if (p.active_fraction < options_.min_active_fraction && previous_[k]) {
      pd.decision = *previous_[k];
      pd.inherited = true;
      out.portions.push_back(pd);
      continue;
    }
    const auto [w0, w1] =
        Widen(p.first_active, p.end_active, min_frames_, buf_start, buf_end);
    const Track& track = buffer.tracks[k];
    std::vector<double> mono = BeamformRange(
        buffer.audio, SteeringTrajectory::FromTrack(track), options_.pattern,
        grid.FrameStart(w0 - buf_start), grid.FrameStart(w1 - buf_start));
    ExtractionRequest req =
        MakeRequest(mono, sample_rate_, track, w0 - buf_start, w1 - buf_start);
    req.start_frame = w0;
    embeddings.push_back(extractor_.Extract(req));
    fresh.push_back(out.portions.size());
    out.portions.push_back(pd);
  }
  if (options_.exclusive) {
    const std::vector<Decision> d = DecideExclusive(embeddings, pool_);
    for (std::size_t i = 0; i < fresh.size(); ++i) out.portions[fresh[i]].decision = d[i];
  } else {
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      out.portions[fresh[i]].decision = Decide(embeddings[i], pool_);
    }
  }
  for (const PortionDecision& pd : out.portions) {
    for (std::size_t k = 0; k < block.tracks.size(); ++k) {
      if (block.tracks[k].track_id == pd.portion.source_track_id) {
        previous_[k] = pd.decision;
      }
    }
  }
  history_ = Tail(buffer, min_frames_);
  return out;
}

void RunBlockwise(BlockSource& source, BlockSink& sink,
                  BlockwiseReassigner& engine) {
  while (std::optional<BlockInput> block = source.Next()) {
    sink.Emit(engine.Process(*block));
  }
}

TimelineSink::TimelineSink(const std::vector<Track>& tracks)
    : timeline_(EmptyTimeline(tracks)) {}

void TimelineSink::Emit(const BlockDecisions& decisions) {
  for (const PortionDecision& pd : decisions.portions) {
    for (TimelineTrack& t : timeline_.tracks) {
      if (t.source_track_id != pd.portion.source_track_id) continue;
      for (std::size_t f = decisions.start_frame; f < decisions.end_frame; ++f) {
        if (!t.active[f]) continue;
        t.labels[f] = pd.decision.label;
        t.similarity[f] = pd.decision.similarity;
      }
    }
  }
}

ReassignedTimeline ReassignBlockwise(const FoaSignal& y,
                                     const std::vector<Track>& tracks,
                                     const EnrollmentPool& pool,
                                     const Extractor& extractor,
                                     const BlockwiseOptions& options) {
  BlockwiseReassigner engine(pool, extractor, options, y.sample_rate());
  SceneBlockSource source(y, tracks, options.block_frames);
  TimelineSink sink(tracks);
  RunBlockwise(source, sink, engine);
  return sink.timeline();
}

OracleExtractor::OracleExtractor(GroundTruth gt, int dim, double threshold_deg)
    : gt_(std::move(gt)), dim_(dim), threshold_deg_(threshold_deg) {
  if (dim_ < static_cast<int>(gt_.tracks.size()) || dim_ < 2) {
    throw std::invalid_argument("OracleExtractor: dimension below speaker count");
  }
}

Embedding OracleExtractor::Basis(std::size_t index) const {
  if (index >= static_cast<std::size_t>(dim_)) {
    throw std::out_of_range("OracleExtractor: basis index beyond dimension");
  }
  std::vector<double> v(dim_, 0.0);
  v[index] = 1.0;
  return Embedding::FromUnit(std::move(v));
}

Embedding OracleExtractor::Extract(const ExtractionRequest& request) const {
  if (gt_.tracks.empty()) {
    throw std::invalid_argument("OracleExtractor: no ground-truth speakers");
  }
  std::vector<std::size_t> votes(gt_.tracks.size(), 0);
  std::vector<double> total_angle(gt_.tracks.size(), 0.0);
  std::size_t counted = 0;
  for (std::size_t i = 0; i < request.directions.size(); ++i) {
    const std::size_t f = request.start_frame + i;
    if (f >= gt_.num_frames() || !request.active[i]) continue;
    ++counted;
    for (std::size_t k = 0; k < gt_.tracks.size(); ++k) {
      const double a = AngularDistanceDeg(gt_.tracks[k].directions[f],
                                          request.directions[i]);
      total_angle[k] += a;
      if (gt_.tracks[k].active[f] && a < threshold_deg_) ++votes[k];
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < votes.size(); ++k) {
    if (votes[k] > votes[best]) best = k;
  }
  if (votes[best] == 0 && counted > 0) {
    best = static_cast<std::size_t>(
        std::min_element(total_angle.begin(), total_angle.end()) -
        total_angle.begin());
  }
  return Basis(best);
}

}  // namespace spkr
