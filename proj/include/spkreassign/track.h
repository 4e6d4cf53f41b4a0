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

#ifndef SPKREASSIGN_TRACK_H_
#define SPKREASSIGN_TRACK_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "spkreassign/direction.h"

namespace spkr {

// One speaker as seen on the frame grid: a per-frame direction and activity
// flag. Directions on inactive frames are carried over and carry no meaning.
struct Track {
  int track_id = 0;
  std::vector<Direction> directions;
  std::vector<bool> active;

  std::size_t num_frames() const { return active.size(); }
  std::size_t ActiveCount() const;
  std::size_t ActiveCount(std::size_t begin, std::size_t end) const;

  bool operator==(const Track&) const = default;
};

// Throws std::invalid_argument if directions and activity disagree in length
// or tracks disagree in frame count.
void ValidateTracks(const std::vector<Track>& tracks);

// CSV with header frame_index,track_id,azimuth_deg,elevation_deg,active;
// rows are frame-major. Angles use 6 decimals.
void WriteTracksCsv(const std::filesystem::path& path,
                    const std::vector<Track>& tracks);
std::string TracksToCsv(const std::vector<Track>& tracks);

// Parses the format above. Columns may appear in any order. An empty file (or
// a header with no rows) yields an empty list. Throws std::runtime_error
// naming the offending column or line on malformed input.
std::vector<Track> ReadTracksCsv(const std::filesystem::path& path);
std::vector<Track> TracksFromCsv(const std::string& text);

}  // namespace spkr

#endif  // SPKREASSIGN_TRACK_H_
