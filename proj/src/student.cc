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

#include "spkreassign/student.h"

#include <cmath>
#include <stdexcept>

#include "csv_util.h"
#include "json.hpp"
#include "spkreassign/rng.h"

namespace spkr {

StudentModel StudentModel::Initialize(std::uint64_t seed,
                                      std::span<const double> input_mean,
                                      std::span<const double> input_scale,
                                      int hidden, int output_dim) {
  if (input_mean.size() != input_scale.size() || input_mean.empty()) {
    throw std::invalid_argument("StudentModel: bad input standardization");
  }
  StudentModel m;
  m.input_dim = static_cast<int>(input_mean.size());
  m.hidden = hidden;
  m.output_dim = output_dim;
  m.input_mean.assign(input_mean.begin(), input_mean.end());
  m.input_scale.assign(input_scale.begin(), input_scale.end());
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  m.w1.resize(static_cast<std::size_t>(m.input_dim) * hidden);
  for (double& v : m.w1) v = normal(rng) / std::sqrt(m.input_dim);
  m.b1.assign(hidden, 0.0);
  m.w2.resize(static_cast<std::size_t>(hidden) * output_dim);
  for (double& v : m.w2) v = normal(rng) / std::sqrt(hidden);
  m.b2.assign(output_dim, 0.0);
  m.Validate();
  return m;
}

void StudentModel::Validate() const {
  auto check = [](const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n) {
      throw std::invalid_argument(std::string("StudentModel: ") + what +
                                  " has wrong size");
    }
    for (double x : v) {
      if (!std::isfinite(x)) {
        throw std::invalid_argument(std::string("StudentModel: non-finite ") + what);
      }
    }
  };
  if (input_dim <= 0 || hidden <= 0 || output_dim < 2) {
    throw std::invalid_argument("StudentModel: bad dimensions");
  }
  check(input_mean, input_dim, "input_mean");
  check(input_scale, input_dim, "input_scale");
  for (double s : input_scale) {
    if (!(s > 0.0)) throw std::invalid_argument("StudentModel: input_scale <= 0");
  }
  check(w1, static_cast<std::size_t>(input_dim) * hidden, "w1");
  check(b1, hidden, "b1");
  check(w2, static_cast<std::size_t>(hidden) * output_dim, "w2");
  check(b2, output_dim, "b2");
}

std::array<std::span<double>, 4> StudentModel::Parameters() {
  return {std::span<double>(w1), std::span<double>(b1), std::span<double>(w2),
          std::span<double>(b2)};
}

std::array<std::span<const double>, 4> StudentModel::Parameters() const {
  return {std::span<const double>(w1), std::span<const double>(b1),
          std::span<const double>(w2), std::span<const double>(b2)};
}

StudentGradients StudentGradients::ZerosLike(const StudentModel& m) {
  StudentGradients g;
  g.w1.assign(m.w1.size(), 0.0);
  g.b1.assign(m.b1.size(), 0.0);
  g.w2.assign(m.w2.size(), 0.0);
  g.b2.assign(m.b2.size(), 0.0);
  return g;
}

std::array<std::span<double>, 4> StudentGradients::Parameters() {
  return {std::span<double>(w1), std::span<double>(b1), std::span<double>(w2),
          std::span<double>(b2)};
}

std::array<std::span<const double>, 4> StudentGradients::Parameters() const {
  return {std::span<const double>(w1), std::span<const double>(b1),
          std::span<const double>(w2), std::span<const double>(b2)};
}

namespace {

struct Activations {
  std::vector<double> x, h, z;
};

Activations Forward(const StudentModel& m, std::span<const double> pooled) {
  if (static_cast<int>(pooled.size()) != m.input_dim) {
    throw std::invalid_argument("student: input has " +
                                std::to_string(pooled.size()) + " values, model expects " +
                                std::to_string(m.input_dim));
  }
  Activations a;
  a.x.resize(m.input_dim);
  for (int k = 0; k < m.input_dim; ++k) {
    a.x[k] = (pooled[k] - m.input_mean[k]) / m.input_scale[k];
  }
  a.h = m.b1;
  for (int k = 0; k < m.input_dim; ++k) {
    const double xk = a.x[k];
    const double* row = m.w1.data() + static_cast<std::size_t>(k) * m.hidden;
    for (int j = 0; j < m.hidden; ++j) a.h[j] += xk * row[j];
  }
  for (double& v : a.h) v = std::tanh(v);
  a.z = m.b2;
  for (int j = 0; j < m.hidden; ++j) {
    const double hj = a.h[j];
    const double* row = m.w2.data() + static_cast<std::size_t>(j) * m.output_dim;
    for (int i = 0; i < m.output_dim; ++i) a.z[i] += hj * row[i];
  }
  return a;
}

}  // namespace

std::vector<double> StudentRawOutput(const StudentModel& m,
                                     std::span<const double> pooled) {
  return Forward(m, pooled).z;
}

Embedding StudentForward(const StudentModel& m, std::span<const double> pooled) {
  return Embedding::Normalize(Forward(m, pooled).z);
}

double KdLoss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw std::invalid_argument("KdLoss: dimension mismatch (" +
                                std::to_string(pred.size()) + " vs " +
                                std::to_string(target.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

double KdLoss(const Embedding& pred, const Embedding& target) {
  return KdLoss(pred.values(), target.values());
}

double KdGrad(const StudentModel& m, std::span<const double> pooled,
              std::span<const double> target, StudentGradients* grads) {
  if (static_cast<int>(target.size()) != m.output_dim) {
    throw std::invalid_argument("KdGrad: target dimension mismatch");
  }
  Activations a = Forward(m, pooled);
  const int d = m.output_dim;
  double norm = 0.0;
  for (double v : a.z) norm += v * v;
  norm = std::sqrt(norm);
  if (!(norm >= 1e-12)) {
    throw std::invalid_argument("degenerate pre-normalization vector");
  }
  std::vector<double> e(d);
  for (int i = 0; i < d; ++i) e[i] = a.z[i] / norm;
  const double loss = KdLoss(e, target);
  if (grads == nullptr) return loss;

  // dL/de, then through e = z/|z|: dz = (g - e (e.g)) / |z|.
  std::vector<double> g(d);
  double eg = 0.0;
  for (int i = 0; i < d; ++i) {
    g[i] = 2.0 * (e[i] - target[i]) / d;
    eg += e[i] * g[i];
  }
  std::vector<double> dz(d);
  for (int i = 0; i < d; ++i) dz[i] = (g[i] - e[i] * eg) / norm;

  std::vector<double> da(m.hidden, 0.0);
  for (int j = 0; j < m.hidden; ++j) {
    const double* row = m.w2.data() + static_cast<std::size_t>(j) * d;
    double* grow = grads->w2.data() + static_cast<std::size_t>(j) * d;
    double dh = 0.0;
    for (int i = 0; i < d; ++i) {
      grow[i] += a.h[j] * dz[i];
      dh += row[i] * dz[i];
    }
    da[j] = dh * (1.0 - a.h[j] * a.h[j]);
  }
  for (int i = 0; i < d; ++i) grads->b2[i] += dz[i];
  for (int k = 0; k < m.input_dim; ++k) {
    double* grow = grads->w1.data() + static_cast<std::size_t>(k) * m.hidden;
    for (int j = 0; j < m.hidden; ++j) grow[j] += a.x[k] * da[j];
  }
  for (int j = 0; j < m.hidden; ++j) grads->b1[j] += da[j];
  return loss;
}

std::string StudentModelToJson(const StudentModel& m) {
  m.Validate();
  nlohmann::ordered_json j;
  j["format_version"] = kStudentFormatVersion;
  j["input_dim"] = m.input_dim;
  j["hidden"] = m.hidden;
  j["output_dim"] = m.output_dim;
  j["input_mean"] = m.input_mean;
  j["input_scale"] = m.input_scale;
  j["w1"] = m.w1;
  j["b1"] = m.b1;
  j["w2"] = m.w2;
  j["b2"] = m.b2;
  return j.dump() + "\n";
}

StudentModel StudentModelFromJson(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const int version = j.at("format_version").get<int>();
  if (version != kStudentFormatVersion) {
    throw std::runtime_error("student model: unsupported format_version " +
                             std::to_string(version));
  }
  StudentModel m;
  m.input_dim = j.at("input_dim").get<int>();
  m.hidden = j.at("hidden").get<int>();
  m.output_dim = j.at("output_dim").get<int>();
  m.input_mean = j.at("input_mean").get<std::vector<double>>();
  m.input_scale = j.at("input_scale").get<std::vector<double>>();
  m.w1 = j.at("w1").get<std::vector<double>>();
  m.b1 = j.at("b1").get<std::vector<double>>();
  m.w2 = j.at("w2").get<std::vector<double>>();
  m.b2 = j.at("b2").get<std::vector<double>>();
  m.Validate();
  return m;
}

void SaveStudentModel(const std::filesystem::path& path, const StudentModel& m) {
  internal::WriteTextFileAtomic(path, StudentModelToJson(m));
}

StudentModel LoadStudentModel(const std::filesystem::path& path) {
  return StudentModelFromJson(internal::ReadTextFile(path));
}

StudentExtractor::StudentExtractor(StudentModel model, int num_bands)
    : model_(std::move(model)), num_bands_(num_bands) {
  model_.Validate();
  if (model_.input_dim != 2 * num_bands) {
    throw std::invalid_argument("StudentExtractor: model input does not match 2F");
  }
}

Embedding StudentExtractor::Embed(std::span<const double> mono,
                                  int sample_rate) const {
  RequireDuration(mono.size(), sample_rate, min_duration_ms(), "student");
  return StudentForward(model_, GatedPooledStats(mono, sample_rate, num_bands_));
}

Embedding StudentExtractor::Extract(const ExtractionRequest& request) const {
  return Embed(request.mono, request.sample_rate);
}

}  // namespace spkr
