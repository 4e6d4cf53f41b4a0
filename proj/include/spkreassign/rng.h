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

#ifndef SPKREASSIGN_RNG_H_
#define SPKREASSIGN_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace spkr {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent stream seed from a base seed and a path of tags, e.g.
// DeriveSeed(seed, {scene_index, kTrackerStream}).
constexpr std::uint64_t DeriveSeed(std::uint64_t base,
                                   std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = Mix64(base);
  for (std::uint64_t t : tags) s = Mix64(s ^ Mix64(t + 0x632BE59BD9B4E019ull));
  return s;
}

}  // namespace spkr

#endif  // SPKREASSIGN_RNG_H_
