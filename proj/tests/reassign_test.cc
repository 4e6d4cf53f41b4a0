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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "json.hpp"
#include "spkreassign/metrics.h"
#include "spkreassign/reassign.h"
#include "spkreassign/scene.h"
#include "spkreassign/teacher.h"
#include "spkreassign/tracker_sim.h"
#include "test_util.h"

namespace spkr {
namespace {

Track MakeTrack(int id, const std::string& pattern) {
  Track t;
  t.track_id = id;
  for (std::size_t f = 0; f < pattern.size(); ++f) {
    t.directions.push_back(Direction::FromDegrees(10.0 * id + f, 0.0));
    t.active.push_back(pattern[f] == '1');
  }
  return t;
}

Embedding Unit(std::vector<double> v) { return Embedding::Normalize(std::move(v)); }

const RenderedScene& SharedScene() {
  static const RenderedScene scene = RenderScene(SampleSceneSpec(21, 2, 20.0, 0.3));
  return scene;
}

TEST_CASE("fragments bridge gaps up to the tolerance") {
  const std::vector<Track> tracks = {MakeTrack(0, "0011100011000011"),
                                     MakeTrack(1, "1000000000000000")};
  const std::vector<Fragment> a = FragmentTracks(tracks, 3);
  // Three inactive frames are bridged, four are not.
  REQUIRE(a.size() == 3);
  CHECK(a[0].source_track_id == 1);
  CHECK(a[0].start_frame == 0);
  CHECK(a[0].end_frame == 1);
  CHECK(a[1].source_track_id == 0);
  CHECK(a[1].start_frame == 2);
  CHECK(a[1].end_frame == 10);
  CHECK(a[1].length() == 8);
  CHECK(a[1].active == std::vector<bool>{1, 1, 1, 0, 0, 0, 1, 1});
  CHECK(a[1].directions.front() == tracks[0].directions[2]);
  CHECK(a[2].start_frame == 14);
  CHECK(a[2].end_frame == 16);

  const std::vector<Fragment> b = FragmentTracks(tracks, 2);
  REQUIRE(b.size() == 4);
  CHECK(b[1].end_frame == 5);
  CHECK(b[2].start_frame == 8);

  const std::vector<Fragment> c = FragmentTracks(tracks, 0);
  CHECK(c.size() == 4);
  CHECK(FragmentTracks(tracks, 100).size() == 2);
}

TEST_CASE("fragments cover exactly the active frames") {
  const GroundTruth gt = GroundTruthFromSpec(SampleSceneSpec(4, 2, 20.0, 0.3));
  ErrorModel em;
  em.seed = 3;
  em.miss_prob = 0.1;
  const std::vector<Track> tracks = SimulateTracker(gt, em).tracks;
  for (int tol : {0, 4, 8}) {
    const std::vector<Fragment> frags = FragmentTracks(tracks, tol);
    for (const Track& t : tracks) {
      std::vector<int> covered(t.num_frames(), 0);
      for (const Fragment& fr : frags) {
        if (fr.source_track_id != t.track_id) continue;
        CHECK(fr.active.front());
        CHECK(fr.active.back());
        for (std::size_t f = fr.start_frame; f < fr.end_frame; ++f) {
          ++covered[f];
          CHECK(fr.active[f - fr.start_frame] == t.active[f]);
        }
      }
      for (std::size_t f = 0; f < t.num_frames(); ++f) {
        CHECK(covered[f] <= 1);
        if (t.active[f]) CHECK(covered[f] == 1);
      }
    }
    for (std::size_t i = 1; i < frags.size(); ++i) {
      CHECK(frags[i - 1].start_frame <= frags[i].start_frame);
    }
  }
}

TEST_CASE("enrollment pool validation and json") {
  EnrollmentPool pool;
  pool.Add(3, Unit({1, 0, 0}));
  pool.Add(7, Unit({0, 1, 1}));
  CHECK(pool.size() == 2);
  CHECK(pool.dim() == 3);
  CHECK_THROWS_AS(pool.Add(3, Unit({0, 0, 1})), std::invalid_argument);
  CHECK_THROWS_AS(pool.Add(4, Unit({0, 1})), std::invalid_argument);
  CHECK_THROWS_AS(pool.Add(4, Embedding::FromUnit({0.5, 0.5, 0.0})), std::invalid_argument);

  const EnrollmentPool back = EnrollmentPoolFromJson(EnrollmentPoolToJson(pool));
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.entries()[i].label == pool.entries()[i].label);
    for (std::size_t d = 0; d < 3; ++d) {
      CHECK(back.entries()[i].embedding[d] ==
            doctest::Approx(pool.entries()[i].embedding[d]).epsilon(1e-12));
    }
  }
  nlohmann::json j = nlohmann::json::parse(EnrollmentPoolToJson(pool));
  j["version"] = 99;
  CHECK_THROWS_WITH(EnrollmentPoolFromJson(j.dump()), doctest::Contains("version"));
  j["version"] = 1;
  j["dimension"] = 4;
  CHECK_THROWS_WITH(EnrollmentPoolFromJson(j.dump()), doctest::Contains("dimension"));
  CHECK_THROWS(EnrollmentPoolFromJson("{not json"));
}

TEST_CASE("decide picks the most similar entry and the earliest on ties") {
  EnrollmentPool pool;
  pool.Add(5, Unit({1, 0}));
  pool.Add(2, Unit({0, 1}));
  pool.Add(9, Unit({1, 0}));
  Decision d = Decide(Unit({0.9, 0.1}), pool);
  CHECK(d.label == 5);
  CHECK(d.similarity == doctest::Approx(0.9 / std::hypot(0.9, 0.1)));
  CHECK(Decide(Unit({0.1, 0.9}), pool).label == 2);
  // Equal similarity to both: the first entry wins.
  CHECK(Decide(Unit({1, 1}), pool).label == 5);
  CHECK(Decide(Unit({-1, 0}), pool).label == 2);
  CHECK_THROWS_AS(Decide(Unit({1, 0, 0}), pool), std::invalid_argument);
  CHECK_THROWS_AS(Decide(Unit({1, 0}), EnrollmentPool{}), std::invalid_argument);
}

TEST_CASE("exclusive decisions are one-to-one while entries last") {
  EnrollmentPool pool;
  pool.Add(0, Unit({1, 0}));
  pool.Add(1, Unit({0, 1}));
  const std::vector<Embedding> items = {Unit({1, 0.2}), Unit({1, 0.5}), Unit({1, 0.1})};
  const std::vector<Decision> ex = DecideExclusive(items, pool);
  REQUIRE(ex.size() == 3);
  // Item 2 is closest to entry 0, item 1 gets the remaining entry, item 0
  // falls back to the unconstrained decision.
  CHECK(ex[2].label == 0);
  CHECK(ex[1].label == 1);
  CHECK(ex[0].label == 0);
  CHECK(ex[1].similarity == doctest::Approx(0.5 / std::hypot(1.0, 0.5)));
  CHECK(DecideExclusive(std::span<const Embedding>(items.data(), 1), pool)[0].label == 0);
  CHECK(DecideExclusive({}, pool).empty());
}

TEST_CASE("longest clean span excludes overlap") {
  GroundTruth gt;
  gt.tracks = {MakeTrack(0, "1111001111110"), MakeTrack(1, "0011000000011")};
  gt.speaker_ids = {4, 8};
  CHECK(LongestCleanSpan(gt, 0) == std::pair<std::size_t, std::size_t>{6, 11});
  CHECK(LongestCleanSpan(gt, 1) == std::pair<std::size_t, std::size_t>{12, 13});
  CHECK_THROWS_AS(LongestCleanSpan(gt, 2), std::out_of_range);
  gt.tracks[1] = MakeTrack(1, "1111111111111");
  const auto none = LongestCleanSpan(gt, 0);
  CHECK(none.first == none.second);
}

TEST_CASE("enrollments use ground-truth ids and clean spans") {
  const RenderedScene& scene = SharedScene();
  const OracleExtractor oracle(scene.truth);
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, oracle);
  REQUIRE(pool.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(pool.entries()[k].label == scene.truth.speaker_ids[k]);
    CHECK(pool.entries()[k].embedding == oracle.Basis(k));
  }
  CHECK_THROWS_AS(BuildEnrollments(scene.mixture, scene.truth, oracle, 30000.0),
                  std::runtime_error);
}

TEST_CASE("teacher enrollments are closer to their own speaker") {
  const TeacherExtractor& teacher = DefaultTeacher();
  int wins = 0, total = 0;
  for (std::uint64_t seed = 30; seed < 34; ++seed) {
    const RenderedScene scene = RenderScene(SampleSceneSpec(seed, 2, 20.0, 0.3));
    const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, teacher);
    for (std::size_t k = 0; k < 2; ++k) {
      const Embedding own = teacher.Embed(scene.wet[k].w(), scene.mixture.sample_rate());
      const double same = Cosine(own, pool.entries()[k].embedding);
      const double other = Cosine(own, pool.entries()[1 - k].embedding);
      wins += same > other;
      ++total;
    }
  }
  CHECK(wins == total);
}

TEST_CASE("timeline csv round trip and errors") {
  const std::vector<Track> tracks = {MakeTrack(0, "0110"), MakeTrack(1, "1100")};
  ReassignedTimeline tl = BranchTimeline(tracks);
  CHECK(tl.num_frames() == 4);
  CHECK(tl.tracks[0].labels == std::vector<int>{-1, 0, 0, -1});
  CHECK(tl.tracks[1].labels == std::vector<int>{1, 1, -1, -1});
  tl.tracks[0].labels[2] = 7;
  tl.tracks[0].similarity[2] = 0.123456;
  const std::string csv = TimelineToCsv(tl);
  CHECK(csv.rfind("frame_index,source_track_id,identity_label,similarity\n", 0) == 0);
  const ReassignedTimeline back = TimelineFromCsv(csv, tracks);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back.tracks[k].labels == tl.tracks[k].labels);
    CHECK(back.tracks[k].active == tl.tracks[k].active);
    for (std::size_t f = 0; f < 4; ++f) {
      CHECK(back.tracks[k].similarity[f] == doctest::Approx(tl.tracks[k].similarity[f]));
    }
  }
  testing::TempDir dir("timeline");
  WriteTimelineCsv(dir.path() / "tl.csv", tl);
  CHECK(std::filesystem::exists(dir.path() / "tl.csv"));

  CHECK(TimelineFromCsv("", tracks).tracks[0].labels == std::vector<int>(4, -1));
  CHECK_THROWS_WITH(TimelineFromCsv("frame_index,source_track_id,identity_label\n0,0,1\n",
                                    tracks),
                    doctest::Contains("similarity"));
  CHECK_THROWS_WITH(TimelineFromCsv("frame_index,source_track_id,identity_label,similarity\n"
                                    "9,0,1,0.5\n",
                                    tracks),
                    doctest::Contains("line 2"));
  CHECK_THROWS(TimelineFromCsv("frame_index,source_track_id,identity_label,similarity\n"
                               "0,5,1,0.5\n",
                               tracks));
  CHECK_THROWS(TimelineFromCsv("frame_index,source_track_id,identity_label,similarity\n"
                               "0,0,x,0.5\n",
                               tracks));
}

TEST_CASE("block view lists portions in order of first activity") {
  BlockInput b;
  b.start_frame = 50;
  b.tracks = {MakeTrack(0, "0001110000"), MakeTrack(1, "0110000001"),
              MakeTrack(2, "0000000000")};
  const BlockView v = MakeBlockView(b);
  CHECK(v.end_frame == 60);
  REQUIRE(v.portions.size() == 2);
  CHECK(v.portions[0].source_track_id == 1);
  CHECK(v.portions[0].first_active == 51);
  CHECK(v.portions[0].end_active == 60);
  CHECK(v.portions[0].active_fraction == doctest::Approx(0.3));
  CHECK(v.portions[1].source_track_id == 0);
  CHECK(v.portions[1].first_active == 53);
  CHECK(v.portions[1].end_active == 56);
}

TEST_CASE("oracle extractor with an error-free tracker scores AssA 1") {
  const RenderedScene& scene = SharedScene();
  const OracleExtractor oracle(scene.truth);
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, oracle);
  const std::vector<Track> tracks = SimulateTracker(scene.truth, ErrorModel::Perfect()).tracks;

  FragmentOptions fo;
  const ReassignedTimeline frag = ReassignFragments(scene.mixture, tracks, pool, oracle, fo);
  CHECK(Assa(MatchFrames(scene.truth, frag)).assa == doctest::Approx(1.0));
  for (int block : {8, 25, 100}) {
    BlockwiseOptions bo;
    bo.block_frames = block;
    const ReassignedTimeline blk =
        ReassignBlockwise(scene.mixture, tracks, pool, oracle, bo);
    CHECK(Assa(MatchFrames(scene.truth, blk)).assa == doctest::Approx(1.0));
  }
}

TEST_CASE("oracle reassignment undoes tracker swaps") {
  const RenderedScene& scene = SharedScene();
  const OracleExtractor oracle(scene.truth);
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, oracle);
  ErrorModel em = ErrorModel::Perfect(12);
  em.perm_prob = 0.5;
  em.perm_block_frames = 25;
  const std::vector<Track> tracks = SimulateTracker(scene.truth, em).tracks;
  CHECK(Assa(MatchFrames(scene.truth, BranchTimeline(tracks))).assa < 0.9);
  BlockwiseOptions bo;
  bo.min_active_fraction = 0.0;
  const ReassignedTimeline tl = ReassignBlockwise(scene.mixture, tracks, pool, oracle, bo);
  CHECK(Assa(MatchFrames(scene.truth, tl)).assa == doctest::Approx(1.0));
}

TEST_CASE("a swap inside one block only changes that block's decisions") {
  const RenderedScene& scene = SharedScene();
  const TeacherExtractor& teacher = DefaultTeacher();
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, teacher);
  const std::vector<Track> base = scene.truth.tracks;
  BlockwiseOptions bo;
  bo.block_frames = 50;
  bo.min_active_fraction = 0.0;
  const ReassignedTimeline ref = ReassignBlockwise(scene.mixture, base, pool, teacher, bo);

  // Exchange the branches on frames 210..229 of block 4 ([200, 250)).
  std::vector<Track> swapped = base;
  for (std::size_t f = 210; f < 230; ++f) {
    std::swap(swapped[0].directions[f], swapped[1].directions[f]);
    bool a = swapped[0].active[f];
    swapped[0].active[f] = swapped[1].active[f];
    swapped[1].active[f] = a;
  }
  const ReassignedTimeline tl = ReassignBlockwise(scene.mixture, swapped, pool, teacher, bo);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t f = 0; f < tl.num_frames(); ++f) {
      if (f >= 200 && f < 250) continue;
      CHECK(tl.tracks[k].labels[f] == ref.tracks[k].labels[f]);
      CHECK(tl.tracks[k].similarity[f] == ref.tracks[k].similarity[f]);
    }
  }
}

class CountingSource : public BlockSource {
 public:
  explicit CountingSource(BlockSource& inner) : inner_(inner) {}
  std::optional<BlockInput> Next() override {
    auto b = inner_.Next();
    if (b) ++reads_;
    return b;
  }
  std::size_t reads() const { return reads_; }

 private:
  BlockSource& inner_;
  std::size_t reads_ = 0;
};

class RecordingSink : public BlockSink {
 public:
  explicit RecordingSink(const CountingSource& source) : source_(source) {}
  void Emit(const BlockDecisions& d) override {
    reads_at_emit.push_back(source_.reads());
    indices.push_back(d.block_index);
    ranges.emplace_back(d.start_frame, d.end_frame);
  }
  std::vector<std::size_t> reads_at_emit;
  std::vector<std::size_t> indices;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;

 private:
  const CountingSource& source_;
};

TEST_CASE("each block is decided before the next block is read") {
  const RenderedScene& scene = SharedScene();
  const OracleExtractor oracle(scene.truth);
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, oracle);
  const std::vector<Track>& tracks = scene.truth.tracks;
  for (int block : {8, 13, 25, 100, 625, 1000}) {
    BlockwiseOptions bo;
    bo.block_frames = block;
    BlockwiseReassigner engine(pool, oracle, bo, scene.mixture.sample_rate());
    SceneBlockSource inner(scene.mixture, tracks, block);
    CountingSource source(inner);
    RecordingSink sink(source);
    RunBlockwise(source, sink, engine);
    const std::size_t blocks = (625 + block - 1) / block;
    REQUIRE(sink.indices.size() == blocks);
    for (std::size_t i = 0; i < blocks; ++i) {
      CHECK(sink.indices[i] == i);
      CHECK(sink.reads_at_emit[i] == i + 1);
      CHECK(sink.ranges[i].first == i * block);
      CHECK(sink.ranges[i].second == std::min<std::size_t>(625, (i + 1) * block));
    }
  }
}

TEST_CASE("whole-fragment and whole-scene blockwise decisions agree") {
  const RenderedScene& scene = SharedScene();
  const TeacherExtractor& teacher = DefaultTeacher();
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, teacher);
  ErrorModel em = ErrorModel::Perfect(2);
  em.angle_noise_deg = 3.0;
  const std::vector<Track> tracks = SimulateTracker(scene.truth, em).tracks;
  FragmentOptions fo;
  fo.gap_tolerance_frames = 1000;
  BlockwiseOptions bo;
  bo.block_frames = 625;
  const ReassignedTimeline a = ReassignFragments(scene.mixture, tracks, pool, teacher, fo);
  const ReassignedTimeline b = ReassignBlockwise(scene.mixture, tracks, pool, teacher, bo);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a.tracks[k].labels == b.tracks[k].labels);
    CHECK(a.tracks[k].similarity == b.tracks[k].similarity);
  }
}

TEST_CASE("sparse portions inherit the previous decision") {
  const RenderedScene& scene = SharedScene();
  const OracleExtractor oracle(scene.truth);
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, oracle);
  BlockwiseOptions bo;
  bo.block_frames = 10;
  bo.min_active_fraction = 0.5;
  BlockwiseReassigner engine(pool, oracle, bo, scene.mixture.sample_rate());
  SceneBlockSource source(scene.mixture, scene.truth.tracks, 10);
  std::vector<std::optional<Decision>> last(2);
  std::size_t inherited = 0;
  while (auto block = source.Next()) {
    const BlockDecisions d = engine.Process(*block);
    for (const PortionDecision& pd : d.portions) {
      const auto k = static_cast<std::size_t>(pd.portion.source_track_id);
      if (pd.portion.active_fraction < 0.5 && last[k]) {
        CHECK(pd.inherited);
        CHECK(pd.decision.label == last[k]->label);
        ++inherited;
      } else {
        CHECK_FALSE(pd.inherited);
      }
      last[k] = pd.decision;
    }
  }
  CHECK(inherited > 0);
}

TEST_CASE("blocks shorter than the extractor minimum are rejected") {
  const RenderedScene& scene = SharedScene();
  const OracleExtractor oracle(scene.truth);
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, oracle);
  BlockwiseOptions bo;
  bo.block_frames = 7;  // 224 ms < 250 ms
  CHECK_THROWS_WITH_AS(
      ReassignBlockwise(scene.mixture, scene.truth.tracks, pool, oracle, bo),
      doctest::Contains("minimum"), std::invalid_argument);
  bo.block_frames = 8;
  CHECK_NOTHROW(ReassignBlockwise(scene.mixture, scene.truth.tracks, pool, oracle, bo));
  CHECK_THROWS_AS(BlockwiseReassigner(EnrollmentPool{}, oracle, bo, 16000),
                  std::invalid_argument);
  CHECK_THROWS_AS(SceneBlockSource(scene.mixture, scene.truth.tracks, 0),
                  std::invalid_argument);
}

TEST_CASE("fragment context validation and random start determinism") {
  const RenderedScene& scene = SharedScene();
  const TeacherExtractor& teacher = DefaultTeacher();
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, teacher);
  const std::vector<Track>& tracks = scene.truth.tracks;
  FragmentOptions fo;
  fo.context_ms = 200.0;
  CHECK_THROWS_AS(ReassignFragments(scene.mixture, tracks, pool, teacher, fo),
                  std::invalid_argument);
  fo.context_ms = -1.0;
  CHECK_THROWS_AS(ReassignFragments(scene.mixture, tracks, pool, teacher, fo),
                  std::invalid_argument);

  fo.context_ms = 250.0;
  fo.start_policy = StartPolicy::kRandom;
  fo.seed = 5;
  const ReassignedTimeline a = ReassignFragments(scene.mixture, tracks, pool, teacher, fo);
  const ReassignedTimeline b = ReassignFragments(scene.mixture, tracks, pool, teacher, fo);
  fo.seed = 6;
  const ReassignedTimeline c = ReassignFragments(scene.mixture, tracks, pool, teacher, fo);
  bool differs = false;
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a.tracks[k].similarity == b.tracks[k].similarity);
    differs |= a.tracks[k].similarity != c.tracks[k].similarity;
    for (std::size_t f = 0; f < a.num_frames(); ++f) {
      CHECK((a.tracks[k].labels[f] != kNoLabel) == static_cast<bool>(tracks[k].active[f]));
    }
  }
  CHECK(differs);

  std::vector<Track> short_tracks = tracks;
  short_tracks[0].active.pop_back();
  short_tracks[0].directions.pop_back();
  short_tracks[1].active.pop_back();
  short_tracks[1].directions.pop_back();
  fo.start_policy = StartPolicy::kBeginning;
  CHECK_THROWS_AS(ReassignFragments(scene.mixture, short_tracks, pool, teacher, fo),
                  std::invalid_argument);
}

TEST_CASE("short fragments are widened to the extractor minimum") {
  const RenderedScene& scene = SharedScene();
  const OracleExtractor oracle(scene.truth);
  const EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, oracle);
  std::vector<Track> tracks = scene.truth.tracks;
  // A two-frame fragment at the very end of the scene.
  for (Track& t : tracks) std::fill(t.active.begin(), t.active.end(), false);
  tracks[0].active[623] = tracks[0].active[624] = true;
  FragmentOptions fo;
  const ReassignedTimeline tl = ReassignFragments(scene.mixture, tracks, pool, oracle, fo);
  CHECK(tl.tracks[0].labels[623] != kNoLabel);
  CHECK(tl.tracks[0].labels[624] == tl.tracks[0].labels[623]);
  CHECK(tl.tracks[1].labels == std::vector<int>(625, kNoLabel));
}

TEST_CASE("oracle extractor validation") {
  const GroundTruth& gt = SharedScene().truth;
  CHECK_THROWS_AS(OracleExtractor(gt, 1), std::invalid_argument);
  const OracleExtractor oracle(gt, 4);
  CHECK(oracle.num_speakers() == 2);
  CHECK(oracle.Basis(3)[3] == 1.0);
  CHECK_THROWS_AS(oracle.Basis(4), std::out_of_range);
  CHECK_THROWS_AS(OracleExtractor(GroundTruth{}).Extract(ExtractionRequest{}),
                  std::invalid_argument);
}

}  // namespace
}  // namespace spkr
