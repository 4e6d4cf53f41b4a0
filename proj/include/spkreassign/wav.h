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

#ifndef SPKREASSIGN_WAV_H_
#define SPKREASSIGN_WAV_H_

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spkreassign/foa.h"

namespace spkr {

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Planar float32 audio as stored in a RIFF/WAVE file.
struct WavData {
  int sample_rate = kDefaultSampleRate;
  std::vector<std::vector<float>> channels;
};

// Reads IEEE-float 32-bit WAV (plain or WAVE_FORMAT_EXTENSIBLE). Throws
// WavError for other encodings or truncated data.
WavData ReadWavData(const std::filesystem::path& path);
void WriteWavData(const std::filesystem::path& path, const WavData& data);

// 4-channel ACN (W, Y, Z, X) file <-> in-memory (W, X, Y, Z).
FoaSignal ReadFoaWav(const std::filesystem::path& path);
void WriteFoaWav(const std::filesystem::path& path, const FoaSignal& signal);

// Several FOA signals of equal length packed as 4*k channels, each group of
// four in ACN order.
std::vector<FoaSignal> ReadFoaGroupWav(const std::filesystem::path& path);
void WriteFoaGroupWav(const std::filesystem::path& path,
                      std::span<const FoaSignal> signals);

void WriteMonoWav(const std::filesystem::path& path,
                  std::span<const double> samples, int sample_rate);

}  // namespace spkr

#endif  // SPKREASSIGN_WAV_H_
