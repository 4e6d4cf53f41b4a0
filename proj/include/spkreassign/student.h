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

#ifndef SPKREASSIGN_STUDENT_H_
#define SPKREASSIGN_STUDENT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spkreassign/embedding.h"
#include "spkreassign/features.h"

namespace spkr {

constexpr int kDefaultHidden = 64;
constexpr int kStudentFormatVersion = 1;

// Two-layer student on pooled statistics:
//   x = (pooled - input_mean) / input_scale
//   h = tanh(x W1 + b1);  z = h W2 + b2;  e = z / |z|
// input_mean/input_scale are fixed at initialization and never trained.
struct StudentModel {
  int input_dim = 2 * kDefaultBands;
  int hidden = kDefaultHidden;
  int output_dim = kDefaultEmbeddingDim;
  std::vector<double> input_mean;   // input_dim
  std::vector<double> input_scale;  // input_dim
  std::vector<double> w1;           // input_dim x hidden, row-major
  std::vector<double> b1;           // hidden
  std::vector<double> w2;           // hidden x output_dim, row-major
  std::vector<double> b2;           // output_dim

  // Seeded Gaussian init; input standardization copied from the arguments.
  static StudentModel Initialize(std::uint64_t seed,
                                 std::span<const double> input_mean,
                                 std::span<const double> input_scale,
                                 int hidden = kDefaultHidden,
                                 int output_dim = kDefaultEmbeddingDim);

  // Throws std::invalid_argument on inconsistent sizes or non-finite values.
  void Validate() const;

  std::array<std::span<double>, 4> Parameters();
  std::array<std::span<const double>, 4> Parameters() const;

  bool operator==(const StudentModel&) const = default;
};

// Same layout as the trainable parameters of StudentModel.
struct StudentGradients {
  std::vector<double> w1, b1, w2, b2;
  static StudentGradients ZerosLike(const StudentModel& m);
  std::array<std::span<double>, 4> Parameters();
  std::array<std::span<const double>, 4> Parameters() const;
};

// Pre-normalization output z for pooled statistics.
std::vector<double> StudentRawOutput(const StudentModel& m,
                                     std::span<const double> pooled);
Embedding StudentForward(const StudentModel& m, std::span<const double> pooled);

// mean over D of (pred_i - target_i)^2. Throws on dimension mismatch.
double KdLoss(std::span<const double> pred, std::span<const double> target);
double KdLoss(const Embedding& pred, const Embedding& target);

// Loss of the student on `pooled` against `target`, with gradients with respect
// to w1, b1, w2, b2 by backpropagation through the normalization, both
// affine layers and tanh. Pooled statistics are treated as a fixed input.
double KdGrad(const StudentModel& m, std::span<const double> pooled,
              std::span<const double> target, StudentGradients* grads);

std::string StudentModelToJson(const StudentModel& m);
StudentModel StudentModelFromJson(const std::string& text);
void SaveStudentModel(const std::filesystem::path& path, const StudentModel& m);
StudentModel LoadStudentModel(const std::filesystem::path& path);

class StudentExtractor : public Extractor {
 public:
  explicit StudentExtractor(StudentModel model,
                            int num_bands = kDefaultBands);

  Embedding Embed(std::span<const double> mono, int sample_rate) const;
  Embedding Extract(const ExtractionRequest& request) const override;
  std::string name() const override { return "student"; }
  const StudentModel& model() const { return model_; }

 private:
  StudentModel model_;
  int num_bands_;
};

}  // namespace spkr

#endif  // SPKREASSIGN_STUDENT_H_
