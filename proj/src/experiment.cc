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

#include "spkreassign/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <limits>
#include <map>
#include <thread>

#include "csv_util.h"
#include "spkreassign/beamform.h"
#include "spkreassign/rng.h"
#include "spkreassign/student.h"
#include "spkreassign/teacher.h"
#include "spkreassign/wav.h"

namespace spkr {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kTagTracker = 11;
constexpr std::uint64_t kTagFragment = 12;
constexpr std::uint64_t kTagDistractor = 13;
constexpr std::uint64_t kTagScene = 14;
constexpr int kDistractorLabelBase = 1000;
constexpr double kDistractorSceneS = 8.0;

void CheckKeys(const nlohmann::json& given, const ojson& allowed,
               const std::string& prefix) {
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!allowed.contains(it.key())) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
    const ojson& def = allowed.at(it.key());
    if (def.is_object()) {
      if (!it.value().is_object()) {
        throw ConfigError("config: '" + key + "' must be an object");
      }
      CheckKeys(it.value(), def, key);
    }
  }
}

template <typename T>
T Get(const nlohmann::json& j, const char* section, const char* key) {
  const nlohmann::json& node = section ? j.at(section) : j;
  try {
    return node.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: bad value for '") +
                      (section ? std::string(section) + "." : "") + key + "'");
  }
}

// Like merge_patch, but an explicit null is kept as a value.
void MergeInto(nlohmann::json& dst, const nlohmann::json& src) {
  for (auto it = src.begin(); it != src.end(); ++it) {
    if (it.value().is_object() && dst.contains(it.key()) && dst[it.key()].is_object()) {
      MergeInto(dst[it.key()], it.value());
    } else {
      dst[it.key()] = it.value();
    }
  }
}

double GetSnr(const nlohmann::json& j) {
  const auto& v = j.at("scenes").at("snr_db");
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string() && (v == "inf" || v == "+inf")) {
    return std::numeric_limits<double>::infinity();
  }
  if (!v.is_number()) throw ConfigError("config: bad value for 'scenes.snr_db'");
  return v.get<double>();
}

std::string FormatValue(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void WriteJson(const fs::path& path, const ojson& j) {
  internal::WriteTextFileAtomic(path, j.dump(2) + "\n");
}

}  // namespace

ojson DefaultConfigJson() {
  const ExperimentConfig d;
  ojson j;
  j["seed"] = d.seed;
  j["workers"] = d.workers;
  j["out"] = d.out.string();
  j["scenes"] = {{"dir", ""},
                 {"count", d.scenes.count},
                 {"duration_s", d.scenes.duration_s},
                 {"n_speakers", d.scenes.n_speakers},
                 {"overlap", d.scenes.overlap},
                 {"snr_db", d.scenes.snr_db}};
  j["tracker"] = {{"perm_block_frames", d.tracker.perm_block_frames},
                  {"perm_lambda", d.tracker.perm_lambda},
                  {"perm_prob", d.tracker.perm_prob},
                  {"angle_noise_deg", d.tracker.angle_noise_deg},
                  {"miss_prob", d.tracker.miss_prob}};
  j["extractor"] = {{"kind", "teacher"}, {"model", ""}};
  j["reassign"] = {{"mode", "blockwise"},
                   {"context_ms", d.reassign.context_ms},
                   {"start_policy", "beginning"},
                   {"block_frames", d.reassign.block_frames},
                   {"min_active_fraction", d.reassign.min_active_fraction},
                   {"gap_tolerance_frames", d.reassign.gap_tolerance_frames},
                   {"exclusive", d.reassign.exclusive},
                   {"enroll_min_ms", d.reassign.enroll_min_ms},
                   {"pool_size", d.reassign.pool_size},
                   {"pattern", d.reassign.pattern}};
  j["metrics"] = {{"angle_threshold_deg", d.metrics.angle_threshold_deg},
                  {"bootstrap_iterations", d.bootstrap_iterations},
                  {"bootstrap_fraction", d.bootstrap_fraction}};
  j["train"] = {{"epochs", d.train.epochs},
                {"lr", d.train.learning_rate},
                {"batch", d.train.batch_size},
                {"hidden", d.train.hidden},
                {"crop_durations_ms", d.train.crops.durations_ms},
                {"min_active_fraction", d.train.crops.min_active_fraction},
                {"eval_crops_per_item", d.train.eval_crops_per_item}};
  j["sweep"] = {{"axis", d.sweep.axis}, {"values", d.sweep.values}};
  return j;
}

ExperimentConfig ConfigFromJson(const nlohmann::json& given) {
  const ojson defaults = DefaultConfigJson();
  if (!given.is_object()) throw ConfigError("config: top level must be an object");
  CheckKeys(given, defaults, "");
  nlohmann::json j = defaults;
  MergeInto(j, given);

  ExperimentConfig c;
  c.seed = Get<std::uint64_t>(j, nullptr, "seed");
  c.workers = Get<int>(j, nullptr, "workers");
  c.out = Get<std::string>(j, nullptr, "out");
  const std::string scenes_dir = Get<std::string>(j, "scenes", "dir");
  c.scenes_dir = scenes_dir.empty() ? c.out / "scenes" : fs::path(scenes_dir);
  c.scenes.count = Get<int>(j, "scenes", "count");
  c.scenes.duration_s = Get<double>(j, "scenes", "duration_s");
  c.scenes.n_speakers = Get<int>(j, "scenes", "n_speakers");
  c.scenes.overlap = Get<double>(j, "scenes", "overlap");
  c.scenes.snr_db = GetSnr(j);

  c.tracker.perm_block_frames = Get<int>(j, "tracker", "perm_block_frames");
  c.tracker.perm_lambda = Get<double>(j, "tracker", "perm_lambda");
  c.tracker.perm_prob = Get<double>(j, "tracker", "perm_prob");
  c.tracker.angle_noise_deg = Get<double>(j, "tracker", "angle_noise_deg");
  c.tracker.miss_prob = Get<double>(j, "tracker", "miss_prob");

  const std::string kind = Get<std::string>(j, "extractor", "kind");
  if (kind == "teacher") {
    c.extractor = ExtractorKind::kTeacher;
  } else if (kind == "student") {
    c.extractor = ExtractorKind::kStudent;
  } else if (kind == "oracle") {
    c.extractor = ExtractorKind::kOracle;
  } else {
    throw ConfigError("config: extractor.kind must be teacher, student or oracle");
  }
  const std::string model = Get<std::string>(j, "extractor", "model");
  c.model_path = model.empty() ? c.out / "student.json" : fs::path(model);

  const std::string mode = Get<std::string>(j, "reassign", "mode");
  if (mode == "fragment") {
    c.reassign.mode = ReassignMode::kFragment;
  } else if (mode == "blockwise") {
    c.reassign.mode = ReassignMode::kBlockwise;
  } else {
    throw ConfigError("config: reassign.mode must be fragment or blockwise");
  }
  c.reassign.context_ms = Get<double>(j, "reassign", "context_ms");
  const std::string policy = Get<std::string>(j, "reassign", "start_policy");
  if (policy == "beginning") {
    c.reassign.start_policy = StartPolicy::kBeginning;
  } else if (policy == "random") {
    c.reassign.start_policy = StartPolicy::kRandom;
  } else {
    throw ConfigError("config: reassign.start_policy must be beginning or random");
  }
  c.reassign.block_frames = Get<int>(j, "reassign", "block_frames");
  c.reassign.min_active_fraction = Get<double>(j, "reassign", "min_active_fraction");
  c.reassign.gap_tolerance_frames = Get<int>(j, "reassign", "gap_tolerance_frames");
  c.reassign.exclusive = Get<bool>(j, "reassign", "exclusive");
  c.reassign.enroll_min_ms = Get<double>(j, "reassign", "enroll_min_ms");
  c.reassign.pool_size = Get<int>(j, "reassign", "pool_size");
  c.reassign.pattern = Get<double>(j, "reassign", "pattern");

  c.metrics.angle_threshold_deg = Get<double>(j, "metrics", "angle_threshold_deg");
  c.bootstrap_iterations = Get<int>(j, "metrics", "bootstrap_iterations");
  c.bootstrap_fraction = Get<double>(j, "metrics", "bootstrap_fraction");

  c.train.epochs = Get<int>(j, "train", "epochs");
  c.train.learning_rate = Get<double>(j, "train", "lr");
  c.train.batch_size = Get<int>(j, "train", "batch");
  c.train.hidden = Get<int>(j, "train", "hidden");
  c.train.crops.durations_ms = Get<std::vector<double>>(j, "train", "crop_durations_ms");
  c.train.crops.min_active_fraction = Get<double>(j, "train", "min_active_fraction");
  c.train.eval_crops_per_item = Get<int>(j, "train", "eval_crops_per_item");
  c.train.seed = DeriveSeed(c.seed, {kTagScene, 0x7A});

  c.sweep.axis = Get<std::string>(j, "sweep", "axis");
  c.sweep.values = Get<std::vector<double>>(j, "sweep", "values");

  // Range checks.
  if (c.workers < 1) throw ConfigError("config: workers must be >= 1");
  if (c.scenes.count < 1) throw ConfigError("config: scenes.count must be >= 1");
  if (!(c.scenes.duration_s > 0.0)) throw ConfigError("config: scenes.duration_s must be > 0");
  if (c.scenes.n_speakers < 1 || c.scenes.n_speakers > 2) {
    throw ConfigError("config: scenes.n_speakers must be 1 or 2");
  }
  if (!(c.scenes.overlap >= 0.0 && c.scenes.overlap < 1.0)) {
    throw ConfigError("config: scenes.overlap must be in [0, 1)");
  }
  try {
    c.tracker.Validate();
    c.metrics.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.reassign.block_frames < 1) throw ConfigError("config: reassign.block_frames must be >= 1");
  if (c.reassign.pool_size < 1) throw ConfigError("config: reassign.pool_size must be >= 1");
  if (c.train.batch_size < 1 || c.train.epochs < 0) {
    throw ConfigError("config: train.batch must be >= 1 and train.epochs >= 0");
  }
  return c;
}

ojson ConfigToJson(const ExperimentConfig& c) {
  ojson j = DefaultConfigJson();
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out"] = c.out.string();
  j["scenes"]["dir"] = c.scenes_dir.string();
  j["scenes"]["count"] = c.scenes.count;
  j["scenes"]["duration_s"] = c.scenes.duration_s;
  j["scenes"]["n_speakers"] = c.scenes.n_speakers;
  j["scenes"]["overlap"] = c.scenes.overlap;
  if (std::isfinite(c.scenes.snr_db)) {
    j["scenes"]["snr_db"] = c.scenes.snr_db;
  } else {
    j["scenes"]["snr_db"] = nullptr;
  }
  j["tracker"]["perm_block_frames"] = c.tracker.perm_block_frames;
  j["tracker"]["perm_lambda"] = c.tracker.perm_lambda;
  j["tracker"]["perm_prob"] = c.tracker.perm_prob;
  j["tracker"]["angle_noise_deg"] = c.tracker.angle_noise_deg;
  j["tracker"]["miss_prob"] = c.tracker.miss_prob;
  j["extractor"]["kind"] = c.extractor == ExtractorKind::kTeacher   ? "teacher"
                           : c.extractor == ExtractorKind::kStudent ? "student"
                                                                    : "oracle";
  j["extractor"]["model"] = c.model_path.string();
  j["reassign"]["mode"] = c.reassign.mode == ReassignMode::kFragment ? "fragment" : "blockwise";
  j["reassign"]["context_ms"] = c.reassign.context_ms;
  j["reassign"]["start_policy"] =
      c.reassign.start_policy == StartPolicy::kRandom ? "random" : "beginning";
  j["reassign"]["block_frames"] = c.reassign.block_frames;
  j["reassign"]["min_active_fraction"] = c.reassign.min_active_fraction;
  j["reassign"]["gap_tolerance_frames"] = c.reassign.gap_tolerance_frames;
  j["reassign"]["exclusive"] = c.reassign.exclusive;
  j["reassign"]["enroll_min_ms"] = c.reassign.enroll_min_ms;
  j["reassign"]["pool_size"] = c.reassign.pool_size;
  j["reassign"]["pattern"] = c.reassign.pattern;
  j["metrics"]["angle_threshold_deg"] = c.metrics.angle_threshold_deg;
  j["metrics"]["bootstrap_iterations"] = c.bootstrap_iterations;
  j["metrics"]["bootstrap_fraction"] = c.bootstrap_fraction;
  j["train"]["epochs"] = c.train.epochs;
  j["train"]["lr"] = c.train.learning_rate;
  j["train"]["batch"] = c.train.batch_size;
  j["train"]["hidden"] = c.train.hidden;
  j["train"]["crop_durations_ms"] = c.train.crops.durations_ms;
  j["train"]["min_active_fraction"] = c.train.crops.min_active_fraction;
  j["train"]["eval_crops_per_item"] = c.train.eval_crops_per_item;
  j["sweep"]["axis"] = c.sweep.axis;
  j["sweep"]["values"] = c.sweep.values;
  return j;
}

void ApplyOverride(nlohmann::json& j, const std::string& dotted_key,
                   const std::string& value) {
  if (dotted_key.empty()) throw ConfigError("config: empty override key");
  nlohmann::json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', pos);
    const std::string part = dotted_key.substr(pos, dot - pos);
    if (part.empty()) throw ConfigError("config: bad override key '" + dotted_key + "'");
    if (dot == std::string::npos) {
      nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
      (*node)[part] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
      return;
    }
    if (!node->contains(part)) (*node)[part] = nlohmann::json::object();
    node = &(*node)[part];
    if (!node->is_object()) {
      throw ConfigError("config: '" + dotted_key.substr(0, dot) + "' is not a section");
    }
    pos = dot + 1;
  }
}

ExperimentConfig LoadConfig(
    const fs::path& file,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  nlohmann::json j = nlohmann::json::object();
  if (!file.empty()) {
    std::string text;
    try {
      text = internal::ReadTextFile(file);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config: " + file.string() + " is not valid JSON");
  }
  for (const auto& [k, v] : overrides) ApplyOverride(j, k, v);
  return ConfigFromJson(j);
}

void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string SceneId(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04zu", index);
  return buf;
}

SceneSpec BatchSceneSpec(const ExperimentConfig& cfg, std::size_t index) {
  const double overlap = cfg.scenes.n_speakers == 1 ? 0.0 : cfg.scenes.overlap;
  return SampleSceneSpec(DeriveSeed(cfg.seed, {kTagScene, index}),
                         cfg.scenes.n_speakers, cfg.scenes.duration_s, overlap,
                         cfg.scenes.snr_db);
}

void WriteSceneDir(const fs::path& dir, const SceneSpec& spec,
                   const RenderedScene& scene) {
  fs::path tmp = dir;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  WriteFoaWav(tmp / "mixture.wav", scene.mixture);
  WriteFoaGroupWav(tmp / "wet.wav", scene.wet);
  WriteTracksCsv(tmp / "gt.csv", scene.truth.tracks);
  internal::WriteTextFileAtomic(tmp / "spec.json", SceneSpecToJson(spec));
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

LoadedScene LoadSceneDir(const fs::path& dir, bool with_wet) {
  LoadedScene s;
  s.id = dir.filename().string();
  s.spec = SceneSpecFromJson(internal::ReadTextFile(dir / "spec.json"));
  s.scene.mixture = ReadFoaWav(dir / "mixture.wav");
  if (with_wet) s.scene.wet = ReadFoaGroupWav(dir / "wet.wav");
  s.scene.truth.tracks = ReadTracksCsv(dir / "gt.csv");
  for (const SpeakerSpec& spk : s.spec.speakers) {
    s.scene.truth.speaker_ids.push_back(spk.speaker_id);
  }
  if (s.scene.truth.speaker_ids.size() != s.scene.truth.tracks.size()) {
    throw std::runtime_error(dir.string() + ": gt.csv and spec.json disagree on speakers");
  }
  return s;
}

std::vector<fs::path> ListSceneDirs(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("missing scene batch: " + dir.string());
  }
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_directory() && name.rfind("scene_", 0) == 0 &&
        e.path().extension() != ".tmp") {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw std::runtime_error("empty scene batch: " + dir.string());
  return out;
}

std::unique_ptr<Extractor> MakeContentExtractor(const ExperimentConfig& cfg) {
  switch (cfg.extractor) {
    case ExtractorKind::kTeacher:
      return std::make_unique<TeacherExtractor>();
    case ExtractorKind::kStudent:
      return std::make_unique<StudentExtractor>(LoadStudentModel(cfg.model_path));
    case ExtractorKind::kOracle:
      return nullptr;
  }
  return nullptr;
}

EnrollmentPool BuildScenePool(const RenderedScene& scene, std::size_t index,
                              const ExperimentConfig& cfg,
                              const Extractor& extractor) {
  EnrollmentPool pool = BuildEnrollments(scene.mixture, scene.truth, extractor,
                                         cfg.reassign.enroll_min_ms,
                                         cfg.reassign.pattern);
  const auto* oracle = dynamic_cast<const OracleExtractor*>(&extractor);
  const int missing = cfg.reassign.pool_size - static_cast<int>(pool.size());
  for (int j = 0; j < missing; ++j) {
    if (oracle != nullptr) {
      pool.Add(kDistractorLabelBase + j, oracle->Basis(oracle->num_speakers() + j));
      continue;
    }
    const SceneSpec spec = SampleSceneSpec(
        DeriveSeed(cfg.seed, {kTagDistractor, index, static_cast<std::uint64_t>(j)}),
        1, kDistractorSceneS, 0.0, cfg.scenes.snr_db);
    const RenderedScene other = RenderScene(spec);
    const EnrollmentPool p = BuildEnrollments(other.mixture, other.truth, extractor,
                                              cfg.reassign.enroll_min_ms,
                                              cfg.reassign.pattern);
    pool.Add(kDistractorLabelBase + j, p.entries()[0].embedding);
  }
  return pool;
}

std::string ConditionName(const ReassignConfig& r) {
  if (r.mode == ReassignMode::kBlockwise) return "blockwise";
  return r.start_policy == StartPolicy::kRandom ? "fragment_random" : "fragment_beginning";
}

double ConditionMs(const ReassignConfig& r) {
  if (r.mode == ReassignMode::kBlockwise) return r.block_frames * kDefaultFrameMs;
  return r.context_ms;
}

ReportRow ScoreTimeline(const std::string& id, const std::string& condition,
                        double ms, const ReassignedTimeline& timeline,
                        const GroundTruth& gt, const MatchConfig& cfg) {
  const MatchResult m = MatchFrames(gt, timeline, cfg);
  ReportRow r;
  r.scene_id = id;
  r.condition = condition;
  r.block_or_context_ms = ms;
  r.assa = Assa(m).assa;
  r.swaps = CountSwaps(m);
  return r;
}

SceneOutcome ProcessScene(const std::string& id, std::size_t index,
                          const RenderedScene& scene, const ExperimentConfig& cfg,
                          const Extractor* content) {
  ErrorModel em = cfg.tracker;
  em.seed = DeriveSeed(cfg.seed, {kTagTracker, index});
  SceneOutcome out;
  out.tracker = SimulateTracker(scene.truth, em).tracks;

  std::unique_ptr<OracleExtractor> oracle;
  const Extractor* extractor = content;
  if (cfg.extractor == ExtractorKind::kOracle) {
    oracle = std::make_unique<OracleExtractor>(scene.truth);
    extractor = oracle.get();
  }
  if (extractor == nullptr) throw std::invalid_argument("ProcessScene: no extractor");
  const EnrollmentPool pool = BuildScenePool(scene, index, cfg, *extractor);

  if (cfg.reassign.mode == ReassignMode::kBlockwise) {
    BlockwiseOptions o;
    o.block_frames = cfg.reassign.block_frames;
    o.min_active_fraction = cfg.reassign.min_active_fraction;
    o.exclusive = cfg.reassign.exclusive;
    o.pattern = cfg.reassign.pattern;
    out.timeline = ReassignBlockwise(scene.mixture, out.tracker, pool, *extractor, o);
  } else {
    FragmentOptions o;
    o.context_ms = cfg.reassign.context_ms;
    o.start_policy = cfg.reassign.start_policy;
    o.seed = DeriveSeed(cfg.seed, {kTagFragment, index});
    o.gap_tolerance_frames = cfg.reassign.gap_tolerance_frames;
    o.pattern = cfg.reassign.pattern;
    out.timeline = ReassignFragments(scene.mixture, out.tracker, pool, *extractor, o);
  }
  out.baseline = BranchTimeline(out.tracker);
  out.row = ScoreTimeline(id, ConditionName(cfg.reassign), ConditionMs(cfg.reassign),
                          out.timeline, scene.truth, cfg.metrics);
  out.baseline_row = ScoreTimeline(id, "baseline", 0.0, out.baseline, scene.truth,
                                   cfg.metrics);
  return out;
}

ojson Summarize(const std::vector<ReportRow>& rows, const ExperimentConfig& cfg) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ReportRow*>> groups;
  for (const ReportRow& r : rows) {
    if (!groups.count(r.condition)) order.push_back(r.condition);
    groups[r.condition].push_back(&r);
  }
  ojson j;
  j["conditions"] = ojson::array();
  for (const std::string& name : order) {
    const auto& g = groups[name];
    std::vector<double> scores;
    double swaps = 0.0;
    for (const ReportRow* r : g) {
      scores.push_back(r->assa);
      swaps += static_cast<double>(r->swaps);
    }
    ojson c;
    c["condition"] = name;
    c["block_or_context_ms"] = g.front()->block_or_context_ms;
    c["scenes"] = g.size();
    if (scores.size() >= 5) {
      const BootstrapResult b = BootstrapAssa(scores, cfg.seed, cfg.bootstrap_iterations,
                                              cfg.bootstrap_fraction);
      c["mean"] = b.mean;
      c["std"] = b.std;
      c["bootstrap"] = true;
    } else {
      double m = 0.0;
      for (double s : scores) m += s;
      c["mean"] = m / scores.size();
      c["std"] = 0.0;
      c["bootstrap"] = false;
    }
    c["mean_swaps"] = swaps / g.size();
    j["conditions"].push_back(c);
  }
  j["config"] = ConfigToJson(cfg);
  return j;
}

int CmdGen(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.scenes_dir);
  WriteJson(cfg.scenes_dir / "gen_config.json", ConfigToJson(cfg));
  ParallelFor(cfg.scenes.count, cfg.workers, [&](std::size_t i) {
    const SceneSpec spec = BatchSceneSpec(cfg, i);
    WriteSceneDir(cfg.scenes_dir / SceneId(i), spec, RenderScene(spec));
  });
  return kExitOk;
}

int CmdTrain(const ExperimentConfig& cfg) {
  const std::vector<fs::path> dirs = ListSceneDirs(cfg.scenes_dir);
  const TeacherExtractor& teacher = DefaultTeacher();
  std::vector<std::vector<TrainingItem>> per_scene(dirs.size());
  ParallelFor(dirs.size(), cfg.workers, [&](std::size_t i) {
    const LoadedScene s = LoadSceneDir(dirs[i], true);
    per_scene[i] = PrepareTrainingItems(s.scene, teacher);
  });
  std::vector<TrainingItem> items;
  for (auto& v : per_scene) {
    for (auto& it : v) items.push_back(std::move(it));
  }
  fs::create_directories(cfg.out);
  WriteJson(cfg.out / "train_config.json", ConfigToJson(cfg));
  const TrainResult r = TrainStudent(items, cfg.train, teacher);
  if (cfg.model_path.has_parent_path()) fs::create_directories(cfg.model_path.parent_path());
  SaveStudentModel(cfg.model_path, r.model);
  internal::WriteTextFileAtomic(cfg.out / "loss.csv", LossLogToCsv(r.log));
  ojson summary;
  summary["items"] = items.size();
  summary["initial_loss"] = r.initial_loss;
  summary["final_loss"] = r.final_loss;
  summary["epoch_mean_loss"] = r.epoch_mean_loss;
  WriteJson(cfg.out / "train_summary.json", summary);
  std::cout << "train: " << items.size() << " items, loss "
            << r.initial_loss << " -> " << r.final_loss << "\n";
  if (cfg.train.epochs > 0 && !(r.final_loss < r.initial_loss)) {
    std::cerr << "train: final loss did not improve on the initial loss\n";
    return kExitTrainingFailed;
  }
  return kExitOk;
}

namespace {

void WriteRunOutputs(const ExperimentConfig& cfg, const std::vector<ReportRow>& rows) {
  internal::WriteTextFileAtomic(cfg.out / "report.csv", ReportToCsv(rows));
  WriteJson(cfg.out / "summary.json", Summarize(rows, cfg));
}

}  // namespace

int CmdRun(const ExperimentConfig& cfg) {
  const std::vector<fs::path> dirs = ListSceneDirs(cfg.scenes_dir);
  const std::unique_ptr<Extractor> content = MakeContentExtractor(cfg);
  fs::create_directories(cfg.out / "tracks");
  fs::create_directories(cfg.out / "timelines");
  WriteJson(cfg.out / "run_config.json", ConfigToJson(cfg));
  std::vector<std::pair<ReportRow, ReportRow>> rows(dirs.size());
  ParallelFor(dirs.size(), cfg.workers, [&](std::size_t i) {
    const LoadedScene s = LoadSceneDir(dirs[i], false);
    const SceneOutcome o = ProcessScene(s.id, i, s.scene, cfg, content.get());
    WriteTracksCsv(cfg.out / "tracks" / (s.id + ".csv"), o.tracker);
    WriteTimelineCsv(cfg.out / "timelines" / (s.id + ".csv"), o.timeline);
    rows[i] = {o.row, o.baseline_row};
  });
  std::vector<ReportRow> flat;
  for (const auto& [a, b] : rows) {
    flat.push_back(a);
    flat.push_back(b);
  }
  WriteRunOutputs(cfg, flat);
  return kExitOk;
}

int CmdEval(const ExperimentConfig& cfg) {
  const std::vector<fs::path> dirs = ListSceneDirs(cfg.scenes_dir);
  std::vector<std::pair<ReportRow, ReportRow>> rows(dirs.size());
  ParallelFor(dirs.size(), cfg.workers, [&](std::size_t i) {
    const std::string id = dirs[i].filename().string();
    const std::vector<Track> gt_tracks = ReadTracksCsv(dirs[i] / "gt.csv");
    GroundTruth gt;
    gt.tracks = gt_tracks;
    const std::vector<Track> tracks = ReadTracksCsv(cfg.out / "tracks" / (id + ".csv"));
    const ReassignedTimeline tl = TimelineFromCsv(
        internal::ReadTextFile(cfg.out / "timelines" / (id + ".csv")), tracks);
    rows[i] = {ScoreTimeline(id, ConditionName(cfg.reassign), ConditionMs(cfg.reassign),
                             tl, gt, cfg.metrics),
               ScoreTimeline(id, "baseline", 0.0, BranchTimeline(tracks), gt,
                             cfg.metrics)};
  });
  std::vector<ReportRow> flat;
  for (const auto& [a, b] : rows) {
    flat.push_back(a);
    flat.push_back(b);
  }
  WriteRunOutputs(cfg, flat);
  return kExitOk;
}

int CmdSweep(const ExperimentConfig& cfg) {
  if (cfg.sweep.values.empty()) throw ConfigError("sweep: empty axis value list");
  const std::string& axis = cfg.sweep.axis;
  if (axis != "block_frames" && axis != "context_ms" && axis != "overlap" &&
      axis != "perm_lambda") {
    throw ConfigError("sweep: axis must be block_frames, context_ms, overlap or perm_lambda");
  }
  fs::create_directories(cfg.out);
  std::string table =
      "axis,value,condition,block_or_context_ms,mean_assa,std_assa,"
      "baseline_mean,baseline_std,mean_swaps\n";
  for (double v : cfg.sweep.values) {
    ExperimentConfig sub = cfg;
    sub.out = cfg.out / "sweep" / (axis + "_" + FormatValue(v));
    if (axis == "block_frames") {
      sub.reassign.block_frames = static_cast<int>(std::lround(v));
    } else if (axis == "context_ms") {
      sub.reassign.context_ms = v;
    } else if (axis == "perm_lambda") {
      sub.tracker.perm_lambda = v;
    } else {
      sub.scenes.overlap = v;
      sub.scenes_dir = sub.out / "scenes";
      CmdGen(sub);
    }
    CmdRun(sub);
    const ojson summary = Summarize(
        ReportFromCsv(internal::ReadTextFile(sub.out / "report.csv")), sub);
    const ojson& conds = summary["conditions"];
    const ojson& main = conds[0];
    const ojson& base = conds[1];
    table += axis + "," + FormatValue(v) + "," + main["condition"].get<std::string>() +
             "," + internal::FormatFixed(main["block_or_context_ms"].get<double>(), 1) +
             "," + internal::FormatFixed(main["mean"].get<double>(), 6) + "," +
             internal::FormatFixed(main["std"].get<double>(), 6) + "," +
             internal::FormatFixed(base["mean"].get<double>(), 6) + "," +
             internal::FormatFixed(base["std"].get<double>(), 6) + "," +
             internal::FormatFixed(main["mean_swaps"].get<double>(), 3) + "\n";
  }
  WriteJson(cfg.out / "sweep_config.json", ConfigToJson(cfg));
  internal::WriteTextFileAtomic(cfg.out / ("sweep_" + axis + ".csv"), table);
  return kExitOk;
}

int CmdBeamform(const ExperimentConfig& cfg, const std::string& scene_id, int track,
                const fs::path& wav_out) {
  const LoadedScene s = LoadSceneDir(cfg.scenes_dir / scene_id, false);
  if (track < 0 || static_cast<std::size_t>(track) >= s.scene.truth.tracks.size()) {
    throw ConfigError("beamform: scene has no track " + std::to_string(track));
  }
  const std::vector<double> mono = Beamform(
      s.scene.mixture, SteeringTrajectory::FromTrack(s.scene.truth.tracks[track]),
      cfg.reassign.pattern);
  if (wav_out.has_parent_path()) fs::create_directories(wav_out.parent_path());
  WriteMonoWav(wav_out, mono, s.scene.mixture.sample_rate());
  return kExitOk;
}

}  // namespace spkr
