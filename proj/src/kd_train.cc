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

#include "spkreassign/kd_train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "csv_util.h"
#include "spkreassign/beamform.h"

namespace spkr {

double ActiveFraction(const std::vector<bool>& activity, int sample_rate,
                      std::size_t start, std::size_t len) {
  if (len == 0) return 0.0;
  const FrameGrid grid(sample_rate);
  std::size_t active = 0;
  std::size_t t = start;
  const std::size_t end = start + len;
  while (t < end) {
    const std::size_t f = grid.FrameOf(t);
    const std::size_t frame_end = std::min(end, grid.FrameStart(f + 1));
    if (f < activity.size() && activity[f]) active += frame_end - t;
    t = frame_end;
  }
  return static_cast<double>(active) / len;
}

CropSpec SampleCrop(std::size_t num_samples, int sample_rate,
                    const std::vector<bool>& activity, Rng& rng,
                    const CropOptions& options) {
  const FrameGrid grid(sample_rate);
  std::vector<double> feasible;
  for (double d : options.durations_ms) {
    if (grid.MsToSamples(d) <= num_samples) feasible.push_back(d);
  }
  if (feasible.empty()) {
    throw std::runtime_error("SampleCrop: signal shorter than every crop duration");
  }
  const std::size_t step = std::max<std::size_t>(1, grid.MsToSamples(options.start_step_ms));
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    const double dur = feasible[std::uniform_int_distribution<std::size_t>(
        0, feasible.size() - 1)(rng)];
    const std::size_t len = grid.MsToSamples(dur);
    const std::size_t last_start = (num_samples - len) / step;
    const std::size_t k =
        std::uniform_int_distribution<std::size_t>(0, last_start)(rng);
    const std::size_t start = k * step;
    const double frac = ActiveFraction(activity, sample_rate, start, len);
    if (frac >= options.min_active_fraction) {
      CropSpec c;
      c.start_ms = 1000.0 * static_cast<double>(start) / sample_rate;
      c.duration_ms = dur;
      c.attempts = attempt;
      c.active_fraction = frac;
      return c;
    }
  }
  throw std::runtime_error("SampleCrop: no crop with enough activity after " +
                           std::to_string(options.max_attempts) + " attempts");
}

CropSpec SampleCrop(std::span<const double> mono, int sample_rate,
                    const std::vector<bool>& activity, Rng& rng,
                    const CropOptions& options) {
  return SampleCrop(mono.size(), sample_rate, activity, rng, options);
}

std::vector<TrainingItem> PrepareTrainingItems(const RenderedScene& scene,
                                               const TeacherExtractor& teacher) {
  std::vector<TrainingItem> items;
  const int rate = scene.mixture.sample_rate();
  for (std::size_t k = 0; k < scene.truth.tracks.size(); ++k) {
    const Track& track = scene.truth.tracks[k];
    if (track.ActiveCount() == 0) continue;
    TrainingItem item;
    item.sample_rate = rate;
    item.num_samples = scene.mixture.num_samples();
    item.activity = track.active;
    const Embedding target = teacher.Embed(scene.wet.at(k).w(), rate);
    item.target.assign(target.values().begin(), target.values().end());
    std::vector<double> beam =
        Beamform(scene.mixture, SteeringTrajectory::FromTrack(track));
    item.features = ComputeFeatures(beam, rate, teacher.config().num_bands);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<double> CropPooledStats(const TrainingItem& item,
                                    const CropSpec& crop) {
  const FrameGrid frame_grid(item.sample_rate, kFeatureFrameMs);
  const std::size_t frame = frame_grid.frame_samples();
  const std::size_t hop = frame_grid.MsToSamples(kFeatureHopMs);
  const std::size_t start = frame_grid.MsToSamples(crop.start_ms);
  const std::size_t len = frame_grid.MsToSamples(crop.duration_ms);
  if (start % hop != 0) {
    throw std::invalid_argument("CropPooledStats: crop start not on a feature hop");
  }
  if (len < frame || start + len > item.num_samples) {
    throw std::invalid_argument("CropPooledStats: crop outside signal");
  }
  const std::size_t first = start / hop;
  const std::size_t count = (len - frame) / hop + 1;
  const std::span<const double> energies(item.features.frame_energy.data() + first,
                                         count);
  std::vector<std::size_t> kept = PoolingFrames(energies);
  for (std::size_t& f : kept) f += first;
  return StatsPool(item.features, kept);
}

AdamOptimizer::AdamOptimizer(const StudentModel& model, double lr, double beta1,
                             double beta2, double epsilon)
    : lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(StudentGradients::ZerosLike(model)),
      v_(StudentGradients::ZerosLike(model)) {}

void AdamOptimizer::Step(StudentModel& model, const StudentGradients& grads) {
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  auto params = model.Parameters();
  auto g = grads.Parameters();
  auto m = m_.Parameters();
  auto v = v_.Parameters();
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      m[b][i] = beta1_ * m[b][i] + (1.0 - beta1_) * g[b][i];
      v[b][i] = beta2_ * v[b][i] + (1.0 - beta2_) * g[b][i] * g[b][i];
      const double mhat = m[b][i] / c1;
      const double vhat = v[b][i] / c2;
      params[b][i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

StudentModel InitialStudent(const TrainConfig& config,
                            const TeacherExtractor& teacher) {
  return StudentModel::Initialize(DeriveSeed(config.seed, {1}),
                                  teacher.input_mean(), teacher.input_scale(),
                                  config.hidden, teacher.config().dim);
}

namespace {

double MeanLoss(const StudentModel& model, std::span<const TrainingItem> items,
                const std::vector<std::pair<std::size_t, CropSpec>>& crops) {
  double total = 0.0;
  for (const auto& [index, crop] : crops) {
    total += KdGrad(model, CropPooledStats(items[index], crop),
                    items[index].target, nullptr);
  }
  return crops.empty() ? 0.0 : total / crops.size();
}

}  // namespace

TrainResult TrainStudent(std::span<const TrainingItem> items,
                         const TrainConfig& config,
                         const StudentModel& initial) {
  if (items.empty()) {
    throw std::invalid_argument("TrainStudent: no training items");
  }
  if (config.batch_size < 1 || config.epochs < 0) {
    throw std::invalid_argument("TrainStudent: bad batch size or epoch count");
  }
  TrainResult result;
  result.model = initial;

  // Fixed evaluation crops behind initial/final loss.
  std::vector<std::pair<std::size_t, CropSpec>> eval;
  {
    Rng rng(DeriveSeed(config.seed, {2}));
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (int c = 0; c < config.eval_crops_per_item; ++c) {
        eval.emplace_back(i, SampleCrop(items[i].num_samples, items[i].sample_rate,
                                        items[i].activity, rng, config.crops));
      }
    }
  }
  result.initial_loss = MeanLoss(result.model, items, eval);

  AdamOptimizer adam(result.model, config.learning_rate, config.beta1,
                     config.beta2, config.epsilon);
  Rng rng(DeriveSeed(config.seed, {3}));
  std::vector<std::size_t> order(items.size());
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      StudentGradients grads = StudentGradients::ZerosLike(result.model);
      double batch_loss = 0.0;
      for (std::size_t i = b; i < end; ++i) {
        const TrainingItem& item = items[order[i]];
        CropSpec crop = SampleCrop(item.num_samples, item.sample_rate,
                                   item.activity, rng, config.crops);
        batch_loss += KdGrad(result.model, CropPooledStats(item, crop),
                             item.target, &grads);
      }
      const double n = static_cast<double>(end - b);
      for (auto block : grads.Parameters()) {
        for (double& g : block) g /= n;
      }
      adam.Step(result.model, grads);
      result.log.push_back({epoch, step++, batch_loss / n});
      epoch_total += batch_loss;
    }
    result.epoch_mean_loss.push_back(epoch_total / items.size());
  }
  result.final_loss = MeanLoss(result.model, items, eval);
  return result;
}

TrainResult TrainStudent(std::span<const TrainingItem> items,
                         const TrainConfig& config,
                         const TeacherExtractor& teacher) {
  return TrainStudent(items, config, InitialStudent(config, teacher));
}

std::string LossLogToCsv(std::span<const LossRecord> log) {
  std::ostringstream out;
  out << "epoch,step,loss\n";
  for (const LossRecord& r : log) {
    out << r.epoch << ',' << r.step << ',' << internal::FormatFixed(r.loss, 9)
        << '\n';
  }
  return out.str();
}

}  // namespace spkr
