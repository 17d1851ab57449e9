#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace orient {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

/// Map any real angle onto [0, 2pi).
inline double wrap_two_pi(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // -tiny + 2pi rounds to 2pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// An orientation on the circle, always stored in [0, 2pi).
///
/// Image convention: x grows rightward, y grows downward, and an angle t
/// points along (cos t, sin t) in those coordinates.
class OrientationAngle {
 public:
  constexpr OrientationAngle() = default;
  explicit OrientationAngle(double radians) : radians_(wrap_two_pi(radians)) {}

  static OrientationAngle from_degrees(double deg) { return OrientationAngle(deg_to_rad(deg)); }

  double radians() const { return radians_; }
  double degrees() const { return rad_to_deg(radians_); }

  friend bool operator==(OrientationAngle, OrientationAngle) = default;

 private:
  double radians_ = 0.0;
};

/// Geodesic distance on the unit circle, in [0, pi].
///
/// Equals acos of the inner product of the two unit vectors. Evaluated through
/// atan2(|cross|, dot), which has the same value but keeps full precision near
/// 0 and pi where acos loses about half the significant digits.
inline double angular_distance(OrientationAngle a, OrientationAngle b) {
  const double ca = std::cos(a.radians()), sa = std::sin(a.radians());
  const double cb = std::cos(b.radians()), sb = std::sin(b.radians());
  const double dot = ca * cb + sa * sb;
  const double cross = ca * sb - sa * cb;
  return std::atan2(std::abs(cross), dot);
}

/// Vector (projection) representation: (cos t, sin t).
inline std::pair<double, double> angle_to_vector(OrientationAngle theta) {
  return {std::cos(theta.radians()), std::sin(theta.radians())};
}

inline OrientationAngle vector_to_angle(double x, double y) {
  if (x == 0.0 && y == 0.0) throw std::invalid_argument("vector_to_angle: zero vector has no direction");
  return OrientationAngle(std::atan2(y, x));
}

}  // namespace orient
