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

#include "spkreassign/direction.h"

#include <cmath>
#include <stdexcept>

namespace spkr {

namespace {

constexpr double kPi = std::numbers::pi;

double WrapAzimuth(double az) {
  double wrapped = std::remainder(az, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

}  // namespace

Direction::Direction(double azimuth, double elevation) {
  if (!std::isfinite(azimuth) || !std::isfinite(elevation)) {
    throw std::invalid_argument("Direction: non-finite angle");
  }
  // Fold elevation into [-pi, pi), then reflect over the poles.
  double el = std::remainder(elevation, 2.0 * kPi);
  double az = azimuth;
  if (el > kPi / 2) {
    el = kPi - el;
    az += kPi;
  } else if (el < -kPi / 2) {
    el = -kPi - el;
    az += kPi;
  }
  azimuth_ = WrapAzimuth(az);
  elevation_ = el;
}

Direction Direction::FromDegrees(double azimuth_deg, double elevation_deg) {
  return Direction(DegToRad(azimuth_deg), DegToRad(elevation_deg));
}

Direction Direction::FromVector(const Vec3& v) {
  double n = std::sqrt(Dot(v, v));
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("Direction: zero or non-finite vector");
  }
  double horizontal = std::hypot(v[0], v[1]);
  return Direction(std::atan2(v[1], v[0]), std::atan2(v[2], horizontal));
}

Vec3 Direction::UnitVector() const {
  double ce = std::cos(elevation_);
  return {std::cos(azimuth_) * ce, std::sin(azimuth_) * ce,
          std::sin(elevation_)};
}

Direction Direction::Antipode() const {
  return Direction(azimuth_ + kPi, -elevation_);
}

double AngularDistance(const Direction& a, const Direction& b) {
  Vec3 u = a.UnitVector();
  Vec3 v = b.UnitVector();
  Vec3 c = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0]};
  return std::atan2(std::sqrt(Dot(c, c)), Dot(u, v));
}

double AngularDistanceDeg(const Direction& a, const Direction& b) {
  return RadToDeg(AngularDistance(a, b));
}

}  // namespace spkr
