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

#include "spkreassign/wav.h"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace spkr {

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatIeeeFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

// ACN index -> in-memory channel.
constexpr std::array<int, 4> kAcnToInternal = {kW, kY, kZ, kX};

std::uint32_t U32(const unsigned char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

std::uint16_t U16(const unsigned char* p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

template <typename T>
void Put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

WavData ReadWavData(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavError(name + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, num_channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t size = U32(hdr + 4);
    std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        throw WavError(name + ": truncated fmt chunk");
      }
      const unsigned char* f = bytes.data() + body;
      format = U16(f);
      num_channels = U16(f + 2);
      rate = U32(f + 4);
      bits = U16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw WavError(name + ": truncated extensible fmt");
        format = U16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw WavError(name + ": data chunk before fmt chunk");
      if (format != kFormatIeeeFloat || bits != 32) {
        throw WavError(name + ": unsupported encoding (need 32-bit float)");
      }
      if (num_channels == 0) throw WavError(name + ": zero channels");
      const std::size_t frame_bytes = 4u * num_channels;
      if (body + size > bytes.size() || size % frame_bytes != 0) {
        throw WavError(name + ": truncated data chunk");
      }
      const std::size_t frames = size / frame_bytes;
      WavData out;
      out.sample_rate = static_cast<int>(rate);
      out.channels.assign(num_channels, std::vector<float>(frames));
      const unsigned char* d = bytes.data() + body;
      for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t c = 0; c < num_channels; ++c) {
          std::memcpy(&out.channels[c][t], d + (t * num_channels + c) * 4, 4);
        }
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw WavError(name + ": no data chunk");
}

void WriteWavData(const std::filesystem::path& path, const WavData& data) {
  const std::size_t nch = data.channels.size();
  if (nch == 0 || nch > 0xFFFF) throw WavError("WriteWav: bad channel count");
  const std::size_t frames = data.channels[0].size();
  for (const auto& c : data.channels) {
    if (c.size() != frames) throw WavError("WriteWav: channel lengths differ");
  }
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(frames) * nch * 4;
  if (data_bytes > 0xFFFFFFFFull - 36) throw WavError("WriteWav: too large");

  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(36 + data_bytes));
  out.append("WAVE");
  out.append("fmt ");
  Put<std::uint32_t>(out, 16);
  Put<std::uint16_t>(out, kFormatIeeeFloat);
  Put<std::uint16_t>(out, static_cast<std::uint16_t>(nch));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(data.sample_rate));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(data.sample_rate * nch * 4));
  Put<std::uint16_t>(out, static_cast<std::uint16_t>(nch * 4));
  Put<std::uint16_t>(out, 32);
  out.append("data");
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(data_bytes));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < nch; ++c) Put<float>(out, data.channels[c][t]);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw WavError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw WavError("write failed: " + path.string());
}

std::vector<FoaSignal> ReadFoaGroupWav(const std::filesystem::path& path) {
  WavData data = ReadWavData(path);
  if (data.channels.size() % 4 != 0) {
    throw WavError(path.string() + ": expected a multiple of 4 channels, got " +
                   std::to_string(data.channels.size()));
  }
  std::vector<FoaSignal> out;
  for (std::size_t g = 0; g < data.channels.size() / 4; ++g) {
    std::array<std::vector<double>, 4> ch;
    for (int acn = 0; acn < 4; ++acn) {
      const auto& src = data.channels[g * 4 + acn];
      ch[kAcnToInternal[acn]].assign(src.begin(), src.end());
    }
    out.emplace_back(std::move(ch), data.sample_rate);
  }
  return out;
}

FoaSignal ReadFoaWav(const std::filesystem::path& path) {
  WavData data = ReadWavData(path);
  if (data.channels.size() != 4) {
    throw WavError(path.string() + ": expected 4 channels, got " +
                   std::to_string(data.channels.size()));
  }
  std::array<std::vector<double>, 4> ch;
  for (int acn = 0; acn < 4; ++acn) {
    const auto& src = data.channels[acn];
    ch[kAcnToInternal[acn]].assign(src.begin(), src.end());
  }
  return FoaSignal(std::move(ch), data.sample_rate);
}

void WriteFoaGroupWav(const std::filesystem::path& path,
                      std::span<const FoaSignal> signals) {
  if (signals.empty()) throw WavError("WriteFoaGroupWav: no signals");
  WavData data;
  data.sample_rate = signals[0].sample_rate();
  for (const FoaSignal& s : signals) {
    if (s.sample_rate() != data.sample_rate ||
        s.num_samples() != signals[0].num_samples()) {
      throw WavError("WriteFoaGroupWav: signals differ in rate or length");
    }
    for (int acn = 0; acn < 4; ++acn) {
      auto src = s.channel(kAcnToInternal[acn]);
      data.channels.emplace_back(src.begin(), src.end());
    }
  }
  WriteWavData(path, data);
}

void WriteFoaWav(const std::filesystem::path& path, const FoaSignal& signal) {
  WriteFoaGroupWav(path, std::span<const FoaSignal>(&signal, 1));
}

void WriteMonoWav(const std::filesystem::path& path,
                  std::span<const double> samples, int sample_rate) {
  WavData data;
  data.sample_rate = sample_rate;
  data.channels.emplace_back(samples.begin(), samples.end());
  WriteWavData(path, data);
}

}  // namespace spkr
