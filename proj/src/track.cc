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

#include "spkreassign/track.h"

#include <map>
#include <sstream>
#include <stdexcept>

#include "csv_util.h"

namespace spkr {

std::size_t Track::ActiveCount() const { return ActiveCount(0, active.size()); }

std::size_t Track::ActiveCount(std::size_t begin, std::size_t end) const {
  std::size_t n = 0;
  for (std::size_t f = begin; f < end && f < active.size(); ++f) n += active[f];
  return n;
}

void ValidateTracks(const std::vector<Track>& tracks) {
  for (const Track& t : tracks) {
    if (t.directions.size() != t.active.size()) {
      throw std::invalid_argument("track " + std::to_string(t.track_id) +
                                  ": directions/activity length mismatch");
    }
    if (t.num_frames() != tracks[0].num_frames()) {
      throw std::invalid_argument("tracks disagree in frame count");
    }
  }
}

std::string TracksToCsv(const std::vector<Track>& tracks) {
  ValidateTracks(tracks);
  std::ostringstream out;
  out << "frame_index,track_id,azimuth_deg,elevation_deg,active\n";
  const std::size_t frames = tracks.empty() ? 0 : tracks[0].num_frames();
  for (std::size_t f = 0; f < frames; ++f) {
    for (const Track& t : tracks) {
      out << f << ',' << t.track_id << ','
          << internal::FormatFixed(t.directions[f].azimuth_deg(), 6) << ','
          << internal::FormatFixed(t.directions[f].elevation_deg(), 6) << ','
          << (t.active[f] ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

void WriteTracksCsv(const std::filesystem::path& path,
                    const std::vector<Track>& tracks) {
  internal::WriteTextFileAtomic(path, TracksToCsv(tracks));
}

std::vector<Track> TracksFromCsv(const std::string& text) {
  internal::CsvTable table = internal::ParseCsv(text);
  if (table.column.empty()) return {};
  const std::size_t c_frame = table.Require("frame_index");
  const std::size_t c_track = table.Require("track_id");
  const std::size_t c_az = table.Require("azimuth_deg");
  const std::size_t c_el = table.Require("elevation_deg");
  const std::size_t c_active = table.Require("active");

  std::map<int, Track> by_id;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    long long frame = internal::ParseInt(row[c_frame], "frame_index", line);
    int id = static_cast<int>(internal::ParseInt(row[c_track], "track_id", line));
    double az = internal::ParseDouble(row[c_az], "azimuth_deg", line);
    double el = internal::ParseDouble(row[c_el], "elevation_deg", line);
    long long act = internal::ParseInt(row[c_active], "active", line);
    if (act != 0 && act != 1) {
      throw std::runtime_error("CSV line " + std::to_string(line) +
                               ": active must be 0 or 1");
    }
    Track& t = by_id[id];
    t.track_id = id;
    if (frame != static_cast<long long>(t.active.size())) {
      throw std::runtime_error("CSV line " + std::to_string(line) +
                               ": non-monotone frame_index " +
                               std::to_string(frame) + " for track " +
                               std::to_string(id) + " (expected " +
                               std::to_string(t.active.size()) + ")");
    }
    t.directions.push_back(Direction::FromDegrees(az, el));
    t.active.push_back(act == 1);
  }
  std::vector<Track> out;
  for (auto& [id, t] : by_id) out.push_back(std::move(t));
  if (!out.empty()) {
    for (const Track& t : out) {
      if (t.num_frames() != out[0].num_frames()) {
        throw std::runtime_error("CSV: tracks have different frame counts");
      }
    }
  }
  return out;
}

std::vector<Track> ReadTracksCsv(const std::filesystem::path& path) {
  return TracksFromCsv(internal::ReadTextFile(path));
}

}  // namespace spkr
