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

#include "spkreassign/scene.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "spkreassign/rng.h"

namespace spkr {

namespace {

constexpr double kPi = std::numbers::pi;

// Voice model constants.
constexpr double kVoiceRms = 0.1;
constexpr double kPhoneticSpread = 0.15;  // log-std of per-syllable formant shift
constexpr double kPitchSpread = 0.05;     // log-std of per-syllable f0 shift
constexpr double kGainSpread = 0.2;       // log-std of per-syllable formant gain
constexpr double kAspiration = 0.01;

// Stream tags for DeriveSeed.
constexpr std::uint64_t kTagVoice = 1;
constexpr std::uint64_t kTagNoise = 2;
constexpr std::uint64_t kTagActivity = 3;
constexpr std::uint64_t kTagSpeaker = 4;

class Resonator {
 public:
  void Set(double center_hz, double bandwidth_hz, double gain, int rate) {
    double r = std::exp(-kPi * bandwidth_hz / rate);
    double theta = 2.0 * kPi * std::min(center_hz, 0.45 * rate) / rate;
    a1_ = 2.0 * r * std::cos(theta);
    a2_ = -r * r;
    // Unit peak gain at the center frequency.
    b0_ = gain * (1.0 - r) *
          std::sqrt(1.0 - 2.0 * r * std::cos(2.0 * theta) + r * r);
  }
  double Process(double x) {
    double y = b0_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0, a2_ = 0, b0_ = 0, y1_ = 0, y2_ = 0;
};

std::size_t SecondsToSamples(double s, int rate) {
  return static_cast<std::size_t>(std::max(0.0, std::round(s * rate)));
}

void ValidateIntervals(const std::vector<Interval>& iv, double duration,
                       int speaker) {
  for (std::size_t i = 0; i < iv.size(); ++i) {
    if (!(iv[i].on_s >= 0.0) || !(iv[i].off_s > iv[i].on_s) ||
        iv[i].off_s > duration + 1e-9) {
      throw std::invalid_argument("speaker " + std::to_string(speaker) +
                                  ": bad interval " + std::to_string(i));
    }
    if (i > 0 && iv[i].on_s < iv[i - 1].off_s) {
      throw std::invalid_argument("speaker " + std::to_string(speaker) +
                                  ": overlapping or unsorted activity");
    }
  }
}

}  // namespace

void SpeakerSpec::Validate() const {
  if (!(f0_hz >= 80.0 && f0_hz <= 320.0)) {
    throw std::invalid_argument("SpeakerSpec: f0 outside [80, 320] Hz");
  }
  if (formants.size() < 2) {
    throw std::invalid_argument("SpeakerSpec: need at least 2 formants");
  }
  for (const Formant& f : formants) {
    if (!(f.gain > 0.0) || !(f.center_hz > 0.0) || !(f.bandwidth_hz > 0.0)) {
      throw std::invalid_argument("SpeakerSpec: formant parameters must be positive");
    }
  }
  if (!(am_rate_hz > 0.0)) {
    throw std::invalid_argument("SpeakerSpec: am rate must be positive");
  }
}

void SceneSpec::Validate() const {
  if (!(duration_s > 0.0)) throw std::invalid_argument("SceneSpec: duration");
  if (n_speakers < 1 || n_speakers > 2) {
    throw std::invalid_argument("SceneSpec: n_speakers must be 1 or 2");
  }
  if (speakers.size() != static_cast<std::size_t>(n_speakers) ||
      activity.size() != speakers.size() || positions.size() != speakers.size()) {
    throw std::invalid_argument("SceneSpec: per-speaker lists disagree with n_speakers");
  }
  for (int k = 0; k < n_speakers; ++k) {
    speakers[k].Validate();
    ValidateIntervals(activity[k], duration_s, k);
    if (positions[k].size() != activity[k].size()) {
      throw std::invalid_argument("SceneSpec: one direction per activity segment required");
    }
  }
  if (std::isnan(snr_db)) throw std::invalid_argument("SceneSpec: snr is NaN");
}

std::vector<double> SynthVoice(const SpeakerSpec& spec,
                               std::span<const Interval> intervals,
                               double duration_s, std::uint64_t seed,
                               int sample_rate) {
  spec.Validate();
  const std::size_t n = SecondsToSamples(duration_s, sample_rate);
  std::vector<double> out(n, 0.0);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  double active_energy = 0.0;
  std::size_t active_samples = 0;
  for (const Interval& iv : intervals) {
    const std::size_t s0 = std::min(n, SecondsToSamples(iv.on_s, sample_rate));
    const std::size_t s1 = std::min(n, SecondsToSamples(iv.off_s, sample_rate));
    std::vector<Resonator> res(spec.formants.size());
    double phase = uni(rng);
    std::size_t t = s0;
    while (t < s1) {
      std::size_t syl = static_cast<std::size_t>(
          sample_rate / spec.am_rate_hz * (0.75 + 0.5 * uni(rng)));
      syl = std::max<std::size_t>(1, std::min(syl, s1 - t));
      for (std::size_t k = 0; k < res.size(); ++k) {
        const Formant& f = spec.formants[k];
        res[k].Set(f.center_hz * std::exp(kPhoneticSpread * normal(rng)),
                   f.bandwidth_hz, f.gain * std::exp(kGainSpread * normal(rng)),
                   sample_rate);
      }
      const double f0 = spec.f0_hz * std::exp(kPitchSpread * normal(rng));
      const double glide = 0.2 * (uni(rng) - 0.5);
      const double amp = 0.7 + 0.3 * uni(rng);
      for (std::size_t i = 0; i < syl; ++i) {
        const double tau = (i + 0.5) / syl;
        phase += f0 * (1.0 + glide * (tau - 0.5)) / sample_rate;
        double excitation = kAspiration * normal(rng);
        if (phase >= 1.0) {
          phase -= 1.0;
          excitation += 1.0;
        }
        double y = 0.0;
        for (Resonator& r : res) y += r.Process(excitation);
        const double v = amp * std::sin(kPi * tau) * y;
        out[t + i] = v;
        active_energy += v * v;
      }
      active_samples += syl;
      t += syl;
    }
  }
  if (active_samples > 0 && active_energy > 0.0) {
    const double g = kVoiceRms / std::sqrt(active_energy / active_samples);
    for (double& v : out) v *= g;
  }
  return out;
}

GroundTruth GroundTruthFromSpec(const SceneSpec& spec, const FrameGrid& grid) {
  spec.Validate();
  const std::size_t samples = SecondsToSamples(spec.duration_s, grid.sample_rate());
  const std::size_t frames = grid.FrameCount(samples);
  GroundTruth truth;
  for (int k = 0; k < spec.n_speakers; ++k) {
    const auto& iv = spec.activity[k];
    const auto& pos = spec.positions[k];
    Track track;
    track.track_id = k;
    track.active.assign(frames, false);
    track.directions.assign(frames, pos.empty() ? Direction() : pos.front());
    std::size_t seg = 0;
    Direction held = pos.empty() ? Direction() : pos.front();
    for (std::size_t f = 0; f < frames; ++f) {
      const double c = grid.FrameCenterSeconds(f);
      while (seg < iv.size() && c >= iv[seg].off_s) {
        held = pos[seg];
        ++seg;
      }
      if (seg < iv.size() && c >= iv[seg].on_s) {
        track.active[f] = true;
        held = pos[seg];
      }
      track.directions[f] = held;
    }
    truth.tracks.push_back(std::move(track));
    truth.speaker_ids.push_back(spec.speakers[k].speaker_id);
  }
  return truth;
}

RenderedScene RenderScene(const SceneSpec& spec, int sample_rate) {
  spec.Validate();
  const FrameGrid grid(sample_rate);
  const std::size_t n = SecondsToSamples(spec.duration_s, sample_rate);
  RenderedScene scene;
  scene.truth = GroundTruthFromSpec(spec, grid);

  for (int k = 0; k < spec.n_speakers; ++k) {
    std::vector<double> mono =
        SynthVoice(spec.speakers[k], spec.activity[k], spec.duration_s,
                   DeriveSeed(spec.seed, {kTagVoice, static_cast<std::uint64_t>(k)}),
                   sample_rate);
    std::array<std::vector<double>, 4> ch;
    for (auto& c : ch) c.assign(n, 0.0);
    for (std::size_t j = 0; j < spec.activity[k].size(); ++j) {
      const Vec3 u = spec.positions[k][j].UnitVector();
      const std::size_t s0 = std::min(n, SecondsToSamples(spec.activity[k][j].on_s, sample_rate));
      const std::size_t s1 = std::min(n, SecondsToSamples(spec.activity[k][j].off_s, sample_rate));
      for (std::size_t t = s0; t < s1; ++t) {
        ch[kW][t] = mono[t];
        ch[kX][t] = mono[t] * u[0];
        ch[kY][t] = mono[t] * u[1];
        ch[kZ][t] = mono[t] * u[2];
      }
    }
    scene.wet.emplace_back(std::move(ch), sample_rate);
  }

  std::vector<FoaSignal> parts = scene.wet;
  if (std::isfinite(spec.snr_db)) {
    Rng rng(DeriveSeed(spec.seed, {kTagNoise}));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::array<std::vector<double>, 4> noise;
    const double diffuse = 1.0 / std::sqrt(3.0);  // -4.77 dB on X, Y, Z
    for (int c = 0; c < 4; ++c) {
      noise[c].resize(n);
      const double g = c == kW ? 1.0 : diffuse;
      for (double& v : noise[c]) v = g * normal(rng);
    }
    // Power over samples of frames where any speaker is active.
    double speech = 0.0, noise_power = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < scene.truth.num_frames(); ++f) {
      bool any = false;
      for (const Track& t : scene.truth.tracks) any = any || t.active[f];
      if (!any) continue;
      for (std::size_t t = grid.FrameStart(f); t < grid.FrameStart(f + 1); ++t) {
        for (const FoaSignal& w : scene.wet) speech += w.w()[t] * w.w()[t];
        noise_power += noise[kW][t] * noise[kW][t];
        ++count;
      }
    }
    double gain = 1e-3;
    if (count > 0 && speech > 0.0) {
      gain = std::sqrt(speech / (noise_power * std::pow(10.0, spec.snr_db / 10.0)));
    }
    for (auto& c : noise) {
      for (double& v : c) v *= gain;
    }
    parts.emplace_back(std::move(noise), sample_rate);
  }
  if (parts.empty()) {
    scene.mixture = FoaSignal(n, sample_rate);
  } else {
    scene.mixture = Mix(parts);
  }
  return scene;
}

SpeakerSpec SampleSpeakerSpec(std::uint64_t seed, int speaker_id) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };
  SpeakerSpec s;
  s.speaker_id = speaker_id;
  s.f0_hz = std::exp(range(std::log(85.0), std::log(300.0)));
  s.formants = {
      {range(350.0, 850.0), range(60.0, 140.0), 1.0},
      {range(1000.0, 2300.0), range(80.0, 180.0), range(0.3, 1.0)},
      {range(2300.0, 3300.0), range(120.0, 250.0), range(0.1, 0.6)},
  };
  s.am_rate_hz = range(3.0, 6.0);
  return s;
}

Direction SampleUniformDirection(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double z = uni(rng);
  double az = kPi * uni(rng);
  return Direction(az, std::asin(z));
}

SceneSpec SampleSceneSpec(std::uint64_t seed, int n_speakers, double duration_s,
                          double overlap_target, double snr_db,
                          const ActivityParams& params) {
  if (n_speakers < 1 || n_speakers > 2) {
    throw std::invalid_argument("SampleSceneSpec: n_speakers must be 1 or 2");
  }
  if (!(overlap_target >= 0.0 && overlap_target < 1.0)) {
    throw std::invalid_argument("SampleSceneSpec: overlap target must be in [0, 1)");
  }
  if (n_speakers == 1 && overlap_target != 0.0) {
    throw std::invalid_argument(
        "SampleSceneSpec: infeasible overlap target for one speaker (must be 0)");
  }
  const FrameGrid grid;
  const double frame_s = grid.frame_ms() / 1000.0;
  const long total = static_cast<long>(std::floor(duration_s / frame_s + 1e-9));
  auto frames = [&](double s) { return std::lround(s / frame_s); };

  SceneSpec spec;
  spec.duration_s = duration_s;
  spec.n_speakers = n_speakers;
  spec.snr_db = snr_db;
  spec.seed = seed;
  for (int k = 0; k < n_speakers; ++k) {
    spec.speakers.push_back(SampleSpeakerSpec(
        DeriveSeed(seed, {kTagSpeaker, static_cast<std::uint64_t>(k)}), k));
  }

  Rng rng(DeriveSeed(seed, {kTagActivity}));
  auto uniform_int = [&](long lo, long hi) {
    return std::uniform_int_distribution<long>(lo, std::max(lo, hi))(rng);
  };

  struct Segment {
    int speaker;
    long on, off;
  };
  std::vector<Segment> segments;
  const bool overlapping = n_speakers == 2 && overlap_target > 0.0;
  const long clean_first =
      overlapping ? static_cast<long>(std::ceil(frames(params.clean_first_turn_s) /
                                                (1.0 - overlap_target)))
                  : 0;
  bool first_turn_done[2] = {false, false};
  int current = n_speakers == 2 ? static_cast<int>(uniform_int(0, 1)) : 0;
  long t = uniform_int(0, frames(params.max_lead_in_s));
  const long min_turn = frames(1.0);
  while (true) {
    long turn = uniform_int(frames(params.min_turn_s), frames(params.max_turn_s));
    if (!first_turn_done[current]) turn = std::max(turn, clean_first);
    turn = std::min(turn, total - t);
    if (turn < min_turn) break;
    segments.push_back({current, t, t + turn});
    if (overlapping) {
      long inter = std::min(std::lround(overlap_target * turn), turn - 1);
      if (inter >= 1) {
        long offset = first_turn_done[current] ? uniform_int(1, turn - inter)
                                               : turn - inter;
        segments.push_back({1 - current, t + offset, t + offset + inter});
      }
    }
    first_turn_done[current] = true;
    t += turn + uniform_int(frames(params.min_gap_s), frames(params.max_gap_s));
    if (n_speakers == 2) current = 1 - current;
  }
  std::stable_sort(segments.begin(), segments.end(),
                   [](const Segment& a, const Segment& b) { return a.on < b.on; });

  std::vector<Direction> dirs(segments.size());
  std::uint64_t draw = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (int attempt = 0;; ++attempt) {
      Direction d = SampleUniformDirection(DeriveSeed(seed, {kTagActivity, ++draw}));
      bool ok = true;
      for (std::size_t j = 0; j < i; ++j) {
        bool simultaneous = segments[j].speaker != segments[i].speaker &&
                            segments[j].on < segments[i].off &&
                            segments[i].on < segments[j].off;
        if (simultaneous &&
            AngularDistanceDeg(d, dirs[j]) < params.min_separation_deg) {
          ok = false;
        }
      }
      if (ok || attempt > 1000) {
        dirs[i] = d;
        break;
      }
    }
  }

  spec.activity.assign(n_speakers, {});
  spec.positions.assign(n_speakers, {});
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    spec.activity[s.speaker].push_back({s.on * frame_s, s.off * frame_s});
    spec.positions[s.speaker].push_back(dirs[i]);
  }
  spec.Validate();
  return spec;
}

double MeasuredOverlap(const GroundTruth& truth) {
  std::size_t any = 0, both = 0;
  for (std::size_t f = 0; f < truth.num_frames(); ++f) {
    int active = 0;
    for (const Track& t : truth.tracks) active += t.active[f];
    any += active >= 1;
    both += active >= 2;
  }
  return any == 0 ? 0.0 : static_cast<double>(both) / any;
}

double MeasuredSnrDb(const RenderedScene& scene, const FrameGrid& grid) {
  double speech = 0.0, noise = 0.0;
  for (std::size_t f = 0; f < scene.truth.num_frames(); ++f) {
    bool any = false;
    for (const Track& t : scene.truth.tracks) any = any || t.active[f];
    if (!any) continue;
    for (std::size_t t = grid.FrameStart(f); t < grid.FrameStart(f + 1); ++t) {
      double sum = 0.0;
      for (const FoaSignal& w : scene.wet) {
        speech += w.w()[t] * w.w()[t];
        sum += w.w()[t];
      }
      double n = scene.mixture.w()[t] - sum;
      noise += n * n;
    }
  }
  if (noise <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(speech / noise);
}

// JSON ----------------------------------------------------------------------

std::string SceneSpecToJson(const SceneSpec& spec) {
  using nlohmann::json;
  json j;
  j["version"] = 1;
  j["duration_s"] = spec.duration_s;
  j["n_speakers"] = spec.n_speakers;
  j["snr_db"] = std::isfinite(spec.snr_db) ? json(spec.snr_db) : json(nullptr);
  j["seed"] = spec.seed;
  json speakers = json::array();
  for (int k = 0; k < static_cast<int>(spec.speakers.size()); ++k) {
    const SpeakerSpec& s = spec.speakers[k];
    json js;
    js["speaker_id"] = s.speaker_id;
    js["f0_hz"] = s.f0_hz;
    js["am_rate_hz"] = s.am_rate_hz;
    json formants = json::array();
    for (const Formant& f : s.formants) {
      formants.push_back({f.center_hz, f.bandwidth_hz, f.gain});
    }
    js["formants"] = formants;
    json segs = json::array();
    if (k < static_cast<int>(spec.activity.size())) {
      for (std::size_t i = 0; i < spec.activity[k].size(); ++i) {
        const Direction& d = spec.positions[k][i];
        segs.push_back({{"on_s", spec.activity[k][i].on_s},
                        {"off_s", spec.activity[k][i].off_s},
                        {"azimuth_deg", d.azimuth_deg()},
                        {"elevation_deg", d.elevation_deg()}});
      }
    }
    js["segments"] = segs;
    speakers.push_back(js);
  }
  j["speakers"] = speakers;
  return j.dump(2) + "\n";
}

SceneSpec SceneSpecFromJson(const std::string& text) {
  using nlohmann::json;
  json j = json::parse(text);
  SceneSpec spec;
  spec.duration_s = j.at("duration_s").get<double>();
  spec.n_speakers = j.at("n_speakers").get<int>();
  spec.snr_db = j.at("snr_db").is_null() ? std::numeric_limits<double>::infinity()
                                         : j.at("snr_db").get<double>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  for (const json& js : j.at("speakers")) {
    SpeakerSpec s;
    s.speaker_id = js.at("speaker_id").get<int>();
    s.f0_hz = js.at("f0_hz").get<double>();
    s.am_rate_hz = js.at("am_rate_hz").get<double>();
    for (const json& f : js.at("formants")) {
      s.formants.push_back({f.at(0).get<double>(), f.at(1).get<double>(),
                            f.at(2).get<double>()});
    }
    std::vector<Interval> iv;
    std::vector<Direction> pos;
    for (const json& seg : js.at("segments")) {
      iv.push_back({seg.at("on_s").get<double>(), seg.at("off_s").get<double>()});
      pos.push_back(Direction::FromDegrees(seg.at("azimuth_deg").get<double>(),
                                           seg.at("elevation_deg").get<double>()));
    }
    spec.speakers.push_back(std::move(s));
    spec.activity.push_back(std::move(iv));
    spec.positions.push_back(std::move(pos));
  }
  spec.Validate();
  return spec;
}

}  // namespace spkr
