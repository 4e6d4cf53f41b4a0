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

#include "spkreassign/embedding.h"

#include <cmath>

namespace spkr {

Embedding Embedding::Normalize(std::vector<double> raw) {
  double sq = 0.0;
  for (double v : raw) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm >= 1e-12) || !std::isfinite(norm)) {
    throw std::invalid_argument("degenerate pre-normalization vector");
  }
  for (double& v : raw) v /= norm;
  return Embedding(std::move(raw));
}

Embedding Embedding::FromUnit(std::vector<double> unit) {
  return Embedding(std::move(unit));
}

double Cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("Cosine: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

void RequireDuration(std::size_t samples, int sample_rate, double min_ms,
                     const char* who) {
  const double ms = 1000.0 * static_cast<double>(samples) / sample_rate;
  if (ms + 1e-9 < min_ms) {
    throw std::invalid_argument(std::string(who) + ": input too short (" +
                                std::to_string(ms) + " ms < " +
                                std::to_string(min_ms) + " ms)");
  }
}

}  // namespace spkr
