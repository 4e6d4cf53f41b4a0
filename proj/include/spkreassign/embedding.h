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

#ifndef SPKREASSIGN_EMBEDDING_H_
#define SPKREASSIGN_EMBEDDING_H_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spkreassign/direction.h"
#include "spkreassign/foa.h"

namespace spkr {

constexpr int kDefaultEmbeddingDim = 16;
constexpr double kMinExtractionMs = 250.0;

// Unit-norm speaker embedding.
class Embedding {
 public:
  Embedding() = default;
  // Throws std::invalid_argument("degenerate pre-normalization vector") when
  // the norm is below 1e-12 or not finite.
  static Embedding Normalize(std::vector<double> raw);
  // Trusts the caller that `unit` already has norm 1 (within 1e-6).
  static Embedding FromUnit(std::vector<double> unit);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const Embedding&) const = default;

 private:
  explicit Embedding(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

// Dot product; equals cosine similarity for unit vectors.
double Cosine(const Embedding& a, const Embedding& b);

// Beamformed audio handed to an extractor, together with where it came from.
// Content extractors use `mono` only; the oracle reads the spatial context.
struct ExtractionRequest {
  std::span<const double> mono;
  int sample_rate = kDefaultSampleRate;
  // Scene frames covered by `mono` and the steering used for each of them.
  std::size_t start_frame = 0;
  std::vector<Direction> directions;
  std::vector<bool> active;
};

class Extractor {
 public:
  virtual ~Extractor() = default;
  // Throws std::invalid_argument when the input is shorter than
  // min_duration_ms().
  virtual Embedding Extract(const ExtractionRequest& request) const = 0;
  virtual double min_duration_ms() const { return kMinExtractionMs; }
  virtual std::string name() const = 0;
};

// Throws if `samples` at `sample_rate` is shorter than `min_ms`.
void RequireDuration(std::size_t samples, int sample_rate, double min_ms,
                     const char* who);

}  // namespace spkr

#endif  // SPKREASSIGN_EMBEDDING_H_
