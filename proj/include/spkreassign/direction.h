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

#ifndef SPKREASSIGN_DIRECTION_H_
#define SPKREASSIGN_DIRECTION_H_

#include <array>
#include <numbers>

namespace spkr {

using Vec3 = std::array<double, 3>;

// Direction of arrival on the unit sphere. Azimuth is kept in (-pi, pi] and
// elevation in [-pi/2, pi/2]; out-of-range inputs are folded on construction.
class Direction {
 public:
  Direction() = default;
  Direction(double azimuth, double elevation);

  static Direction FromDegrees(double azimuth_deg, double elevation_deg);
  // `v` need not be normalized but must be nonzero.
  static Direction FromVector(const Vec3& v);

  double azimuth() const { return azimuth_; }
  double elevation() const { return elevation_; }
  double azimuth_deg() const { return azimuth_ * 180.0 / std::numbers::pi; }
  double elevation_deg() const { return elevation_ * 180.0 / std::numbers::pi; }

  // (cos az cos el, sin az cos el, sin el)
  Vec3 UnitVector() const;

  Direction Antipode() const;

  bool operator==(const Direction&) const = default;

 private:
  double azimuth_ = 0.0;
  double elevation_ = 0.0;
};

// Great-circle distance in radians, in [0, pi].
double AngularDistance(const Direction& a, const Direction& b);
double AngularDistanceDeg(const Direction& a, const Direction& b);

inline double Dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

constexpr double DegToRad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double RadToDeg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace spkr

#endif  // SPKREASSIGN_DIRECTION_H_
