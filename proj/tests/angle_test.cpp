#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orient/angle.hpp"

namespace orient {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(OrientationAngle, CanonicalizesIntoHalfOpenRange) {
  EXPECT_DOUBLE_EQ(OrientationAngle(-kPi / 2).radians(), 3 * kPi / 2);
  EXPECT_DOUBLE_EQ(OrientationAngle(5 * kPi).radians(), kPi);
  EXPECT_EQ(OrientationAngle(kTwoPi).radians(), 0.0);
  EXPECT_EQ(OrientationAngle(-1e-18).radians(), 0.0);
  EXPECT_NEAR(OrientationAngle::from_degrees(370.0).degrees(), 10.0, 1e-12);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const double r = OrientationAngle(u(rng)).radians();
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, kTwoPi);
  }
}

TEST(AngularDistance, Examples) {
  EXPECT_DOUBLE_EQ(angular_distance(OrientationAngle(0.0), OrientationAngle(kPi)), kPi);
  EXPECT_NEAR(angular_distance(OrientationAngle(0.1), OrientationAngle(kTwoPi - 0.1)), 0.2, 1e-14);
  for (double t : {0.0, 0.3, 1.0, kPi, 4.0, 6.2})
    EXPECT_EQ(angular_distance(OrientationAngle(t), OrientationAngle(t)), 0.0) << t;
}

TEST(AngularDistance, MatchesArccosineOfInnerProduct) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const double dot = std::clamp(std::cos(a) * std::cos(b) + std::sin(a) * std::sin(b), -1.0, 1.0);
    EXPECT_NEAR(angular_distance(OrientationAngle(a), OrientationAngle(b)), std::acos(dot), 1e-7);
  }
}

TEST(AngularDistance, MetricProperties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::uniform_int_distribution<int> k(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const OrientationAngle a(u(rng)), b(u(rng)), c(u(rng));
    const double ab = angular_distance(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, kPi);
    EXPECT_EQ(ab, angular_distance(b, a));
    EXPECT_LE(ab, angular_distance(a, c) + angular_distance(c, b) + 1e-12);
    const OrientationAngle a_shift(a.radians() + kTwoPi * k(rng));
    EXPECT_NEAR(angular_distance(a_shift, b), ab, 1e-12);
  }
}

TEST(VectorRepresentation, Examples) {
  const auto [x0, y0] = angle_to_vector(OrientationAngle(0.0));
  EXPECT_EQ(x0, 1.0);
  EXPECT_EQ(y0, 0.0);
  const auto [x1, y1] = angle_to_vector(OrientationAngle(kPi / 2));
  EXPECT_NEAR(x1, 0.0, 1e-16);
  EXPECT_EQ(y1, 1.0);
  EXPECT_THROW(vector_to_angle(0.0, 0.0), std::invalid_argument);
  EXPECT_NEAR(vector_to_angle(0.0, -2.0).radians(), 3 * kPi / 2, 1e-15);
}

TEST(VectorRepresentation, RoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int i = 0; i < 1000; ++i) {
    const OrientationAngle t(u(rng));
    const auto [x, y] = angle_to_vector(t);
    EXPECT_LE(angular_distance(vector_to_angle(x, y), t), 1e-12);
  }
}

}  // namespace
}  // namespace orient
