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

#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spkreassign/experiment.h"
#include "test_util.h"

#ifndef SPKR_CLI_PATH
#error "SPKR_CLI_PATH must name the command-line binary"
#endif

namespace spkr {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(SPKR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

ExperimentConfig SmallConfig(const fs::path& out, int count = 5) {
  return LoadConfig("", {{"out", out.string()},
                         {"scenes.count", std::to_string(count)},
                         {"scenes.duration_s", "12"},
                         {"train.epochs", "1"}});
}

TEST_CASE("defaults round trip through json") {
  const ExperimentConfig c = ConfigFromJson(DefaultConfigJson());
  CHECK(c.seed == 1);
  CHECK(c.scenes_dir == fs::path("out") / "scenes");
  CHECK(c.model_path == fs::path("out") / "student.json");
  CHECK(c.reassign.block_frames == 25);
  const ExperimentConfig d = ConfigFromJson(ConfigToJson(c));
  CHECK(ConfigToJson(d) == ConfigToJson(c));
}

TEST_CASE("configuration is strict") {
  nlohmann::json j = nlohmann::json::object();
  j["bogus"] = 1;
  CHECK_THROWS_WITH_AS(ConfigFromJson(j), doctest::Contains("bogus"), ConfigError);
  j = {{"reassign", {{"blok_frames", 3}}}};
  CHECK_THROWS_WITH_AS(ConfigFromJson(j), doctest::Contains("reassign.blok_frames"),
                       ConfigError);
  j = {{"reassign", 3}};
  CHECK_THROWS_AS(ConfigFromJson(j), ConfigError);
  j = {{"seed", "abc"}};
  CHECK_THROWS_AS(ConfigFromJson(j), ConfigError);
  j = {{"reassign", {{"mode", "online"}}}};
  CHECK_THROWS_AS(ConfigFromJson(j), ConfigError);
  j = {{"extractor", {{"kind", "neural"}}}};
  CHECK_THROWS_AS(ConfigFromJson(j), ConfigError);
  j = {{"scenes", {{"n_speakers", 3}}}};
  CHECK_THROWS_AS(ConfigFromJson(j), ConfigError);
  j = {{"scenes", {{"overlap", 1.0}}}};
  CHECK_THROWS_AS(ConfigFromJson(j), ConfigError);
  j = {{"tracker", {{"miss_prob", 2.0}}}};
  CHECK_THROWS_AS(ConfigFromJson(j), ConfigError);
  j = {{"workers", 0}};
  CHECK_THROWS_AS(ConfigFromJson(j), ConfigError);
  CHECK_THROWS_AS(ConfigFromJson(nlohmann::json::array()), ConfigError);
}

TEST_CASE("snr accepts null and inf") {
  nlohmann::json j = {{"scenes", {{"snr_db", nullptr}}}};
  CHECK(std::isinf(ConfigFromJson(j).scenes.snr_db));
  j["scenes"]["snr_db"] = "inf";
  CHECK(std::isinf(ConfigFromJson(j).scenes.snr_db));
  j["scenes"]["snr_db"] = "loud";
  CHECK_THROWS_AS(ConfigFromJson(j), ConfigError);
}

TEST_CASE("overrides apply after the file in order") {
  TempDir dir("config");
  const fs::path file = dir.path() / "c.json";
  std::ofstream(file) << R"({"seed": 9, "reassign": {"block_frames": 50}})";
  ExperimentConfig c = LoadConfig(file, {});
  CHECK(c.seed == 9);
  CHECK(c.reassign.block_frames == 50);
  c = LoadConfig(file, {{"reassign.block_frames", "100"},
                        {"reassign.mode", "fragment"},
                        {"sweep.values", "[1, 2]"},
                        {"reassign.block_frames", "8"}});
  CHECK(c.reassign.block_frames == 8);
  CHECK(c.reassign.mode == ReassignMode::kFragment);
  CHECK(c.sweep.values == std::vector<double>{1, 2});
  CHECK_THROWS_AS(LoadConfig(file, {{"reassign.nope", "1"}}), ConfigError);
  CHECK_THROWS_AS(LoadConfig(file, {{"seed.x", "1"}}), ConfigError);
  CHECK_THROWS_AS(LoadConfig(file, {{"a..b", "1"}}), ConfigError);
  CHECK_THROWS(LoadConfig(dir.path() / "missing.json", {}));

  nlohmann::json j = nlohmann::json::object();
  ApplyOverride(j, "extractor.kind", "oracle");
  CHECK(j["extractor"]["kind"] == "oracle");
  ApplyOverride(j, "seed", "12");
  CHECK(j["seed"] == 12);
}

TEST_CASE("parallel for covers every index and rethrows the lowest failure") {
  for (int workers : {1, 3}) {
    std::vector<std::atomic<int>> hits(17);
    ParallelFor(hits.size(), workers, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) CHECK(h == 1);
    CHECK_THROWS_WITH(ParallelFor(10, workers,
                                  [](std::size_t i) {
                                    if (i == 3 || i == 7) {
                                      throw std::runtime_error("fail " + std::to_string(i));
                                    }
                                  }),
                      "fail 3");
  }
}

TEST_CASE("scene ids sort and batch specs are distinct") {
  CHECK(SceneId(3) < SceneId(12));
  const ExperimentConfig c = SmallConfig("unused");
  CHECK(BatchSceneSpec(c, 0) == BatchSceneSpec(c, 0));
  CHECK_FALSE(BatchSceneSpec(c, 0) == BatchSceneSpec(c, 1));
}

TEST_CASE("generated batch has the requested count and is deterministic") {
  TempDir a("gen_a"), b("gen_b");
  REQUIRE(CmdGen(SmallConfig(a.path(), 3)) == kExitOk);
  REQUIRE(CmdGen(SmallConfig(b.path(), 3)) == kExitOk);
  const std::vector<fs::path> da = ListSceneDirs(a.path() / "scenes");
  const std::vector<fs::path> db = ListSceneDirs(b.path() / "scenes");
  REQUIRE(da.size() == 3);
  REQUIRE(db.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (const char* f : {"mixture.wav", "wet.wav", "gt.csv", "spec.json"}) {
      CHECK(ReadFile(da[i] / f) == ReadFile(db[i] / f));
    }
    const LoadedScene s = LoadSceneDir(da[i], true);
    const SceneSpec want = BatchSceneSpec(SmallConfig(a.path(), 3), i);
    CHECK(s.spec.seed == want.seed);
    CHECK(s.spec.speakers == want.speakers);
    CHECK(s.spec.activity == want.activity);
    CHECK(s.scene.wet.size() == 2);
    CHECK(s.scene.mixture.num_samples() == 12 * 16000);
  }
  CHECK_THROWS_AS(ListSceneDirs(a.path() / "nothing"), std::runtime_error);
}

TEST_CASE("run, eval and a one-value sweep agree") {
  TempDir dir("run");
  ExperimentConfig cfg = SmallConfig(dir.path());
  REQUIRE(CmdGen(cfg) == kExitOk);
  REQUIRE(CmdRun(cfg) == kExitOk);
  const std::string report = ReadFile(dir.path() / "report.csv");
  const std::vector<ReportRow> rows = ReportFromCsv(report);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0].condition == ConditionName(cfg.reassign));
  CHECK(rows[1].condition == "baseline");
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(fs::exists(dir.path() / "tracks" / (SceneId(i) + ".csv")));
    CHECK(fs::exists(dir.path() / "timelines" / (SceneId(i) + ".csv")));
  }
  const auto summary = nlohmann::json::parse(ReadFile(dir.path() / "summary.json"));
  CHECK(summary["conditions"].size() == 2);
  CHECK(summary["conditions"][0]["bootstrap"] == true);

  REQUIRE(CmdEval(cfg) == kExitOk);
  CHECK(ReadFile(dir.path() / "report.csv") == report);

  ExperimentConfig sweep = cfg;
  sweep.sweep.axis = "block_frames";
  sweep.sweep.values = {25};
  REQUIRE(CmdSweep(sweep) == kExitOk);
  CHECK(ReadFile(dir.path() / "sweep" / "block_frames_25" / "report.csv") == report);
  const std::string table = ReadFile(dir.path() / "sweep_block_frames.csv");
  CHECK(table.rfind("axis,value,condition", 0) == 0);

  ExperimentConfig more = cfg;
  more.workers = 3;
  more.out = dir.path() / "parallel";
  REQUIRE(CmdRun(more) == kExitOk);
  CHECK(ReadFile(more.out / "report.csv") == report);

  sweep.sweep.axis = "colour";
  CHECK_THROWS_AS(CmdSweep(sweep), ConfigError);
  sweep.sweep.axis = "block_frames";
  sweep.sweep.values.clear();
  CHECK_THROWS_AS(CmdSweep(sweep), ConfigError);
}

TEST_CASE("one-speaker scenes get distractor enrollments") {
  TempDir dir("pool");
  ExperimentConfig cfg = SmallConfig(dir.path(), 1);
  cfg.scenes.n_speakers = 1;
  const RenderedScene scene = RenderScene(BatchSceneSpec(cfg, 0));
  const std::unique_ptr<Extractor> teacher = MakeContentExtractor(cfg);
  const EnrollmentPool pool = BuildScenePool(scene, 0, cfg, *teacher);
  REQUIRE(pool.size() == 2);
  CHECK(pool.entries()[0].label == scene.truth.speaker_ids[0]);
  CHECK(pool.entries()[1].label == 1000);
  cfg.extractor = ExtractorKind::kOracle;
  CHECK(MakeContentExtractor(cfg) == nullptr);
}

TEST_CASE("training exit codes") {
  TempDir dir("train");
  ExperimentConfig cfg = SmallConfig(dir.path(), 2);
  REQUIRE(CmdGen(cfg) == kExitOk);
  CHECK(CmdTrain(cfg) == kExitOk);
  CHECK(fs::exists(dir.path() / "student.json"));
  CHECK(fs::exists(dir.path() / "loss.csv"));
  CHECK(fs::exists(dir.path() / "train_summary.json"));
  // A zero learning rate cannot improve the loss.
  cfg.train.learning_rate = 0.0;
  CHECK(CmdTrain(cfg) == kExitTrainingFailed);
  cfg.train.epochs = 0;
  CHECK(CmdTrain(cfg) == kExitOk);
}

TEST_CASE("command line exit codes") {
  TempDir dir("cli");
  const std::string out = " --out " + dir.path().string();
  CHECK(RunCli("--help") == kExitOk);
  CHECK(RunCli("") == kExitUsage);
  CHECK(RunCli("fly") == kExitUsage);
  CHECK(RunCli("gen --scenes.bogus 3" + out) == kExitUsage);
  CHECK(RunCli("gen --scenes.count" + out) == kExitUsage);
  CHECK(RunCli("run" + out) == kExitRuntime);
  CHECK(RunCli("gen --scenes.count 2 --scenes.duration_s 12" + out) == kExitOk);
  CHECK(fs::exists(dir.path() / "scenes" / SceneId(1) / "mixture.wav"));
  CHECK(RunCli("beamform --scene " + SceneId(0) + " --track 5 --wav " +
               (dir.path() / "b.wav").string() + out) == kExitUsage);
  CHECK(RunCli("beamform --scene " + SceneId(0) + " --track 1 --wav " +
               (dir.path() / "b.wav").string() + out) == kExitOk);
  CHECK(fs::exists(dir.path() / "b.wav"));
  CHECK(RunCli("run --extractor.kind oracle --reassign.block_frames 50" + out) == kExitOk);
  CHECK(fs::exists(dir.path() / "report.csv"));
  CHECK(RunCli("train --train.epochs 1 --train.lr 0" + out) == kExitTrainingFailed);
}

}  // namespace
}  // namespace spkr
