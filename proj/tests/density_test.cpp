#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orient/density.hpp"
#include "test_support.hpp"

namespace orient {
namespace {

using testing::cyclic_shift;
using testing::IsNormalized;
using testing::random_density;

constexpr double kPi = std::numbers::pi;

// Independent scalar evaluation of the encoding weights: wrapped difference
// instead of the vector inner product, explicit normalization.
std::vector<double> encode_oracle(double theta_deg, int n, double sigma_deg) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double diff = std::fmod(std::abs(360.0 * i / n - theta_deg), 360.0);
    diff = std::min(diff, 360.0 - diff);
    w[i] = std::exp(-diff * diff / (2.0 * sigma_deg * sigma_deg));
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

ConversionConfig defaults() { return ConversionConfig{}; }

TEST(DiscreteDensity, Invariants) {
  EXPECT_THROW(DiscreteDensity({0.5, 0.5, 0.0}), std::invalid_argument);
  EXPECT_THROW(DiscreteDensity({0.5, 0.5, 0.5, -0.5}), std::invalid_argument);
  EXPECT_THROW(DiscreteDensity({0.25, 0.25, 0.25, 0.2}), std::invalid_argument);
  EXPECT_THROW(DiscreteDensity::from_weights({0.0, 0.0, 0.0, 0.0}), std::invalid_argument);
  EXPECT_NO_THROW(DiscreteDensity({0.25, 0.25, 0.25, 0.25}));
  const auto p = DiscreteDensity::from_weights({1.0, 3.0, 0.0, 4.0});
  EXPECT_EQ(p[1], 0.375);
  EXPECT_TRUE(IsNormalized(p));
  EXPECT_TRUE(DiscreteDensity::uniform(16).is_uniform());
}

TEST(ConversionConfig, Validation) {
  ConversionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_bins = 3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.sigma = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.decode_step = deg_to_rad(23.0);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.decode_step = deg_to_rad(22.5);
  EXPECT_NO_THROW(c.validate());
}

TEST(Encode, NeighbourRatioMatchesGaussian) {
  const auto p = encode(OrientationAngle(0.0), defaults());
  EXPECT_TRUE(IsNormalized(p));
  EXPECT_NEAR(p[1] / p[0], std::exp(-(22.5 * 22.5) / (2.0 * 10.0 * 10.0)), 1e-14);
  EXPECT_NEAR(p[1] / p[0], 0.07955950871822769, 1e-14);
  EXPECT_NEAR(p[1], p[15], 1e-15);
  // Frozen from a 40-digit evaluation.
  EXPECT_NEAR(p[0], 0.8626645399783421, 1e-15);
  EXPECT_NEAR(p[1], 0.06863316698931275, 1e-15);
  EXPECT_EQ(p.argmax_bin(), 0u);
}

TEST(Encode, SymmetricAboutBinCentre) {
  for (int n : {4, 8, 16, 36}) {
    ConversionConfig cfg;
    cfg.n_bins = n;
    cfg.decode_step = std::min(cfg.decode_step, kTwoPi / n);
    const auto p = encode(OrientationAngle(bin_angle(3, n)), cfg);
    EXPECT_EQ(p.argmax_bin(), 3u);
    for (int k = 1; k < n / 2; ++k) EXPECT_NEAR(p[(3 + k) % n], p[(3 - k + n) % n], 1e-15) << n << " " << k;
  }
}

TEST(Encode, ShiftEquivariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const auto cfg = defaults();
  for (int trial = 0; trial < 200; ++trial) {
    const double t = u(rng);
    const std::size_t k = rng() % 16;
    const auto base = encode(OrientationAngle(t), cfg);
    const auto shifted = encode(OrientationAngle(t + kTwoPi * k / 16), cfg);
    const auto expected = cyclic_shift(base, k);
    for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(shifted[i], expected[i], 1e-12);
  }
  EXPECT_EQ(cyclic_shift(encode(OrientationAngle(0.0), cfg), 1).argmax_bin(),
            encode(OrientationAngle(kTwoPi / 16), cfg).argmax_bin());
}

TEST(Encode, SeamStraddlingMatchesScalarOracle) {
  const auto p = encode(OrientationAngle::from_degrees(1.0), defaults());
  const auto oracle = encode_oracle(1.0, 16, 10.0);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(p[i], oracle[i], 1e-12) << i;
  EXPECT_NEAR(p[0], 0.85965886734606339, 1e-14);
  EXPECT_NEAR(p[1], 0.085651406376669426, 1e-14);
  EXPECT_NEAR(p[15], 0.054613747931761092, 1e-14);

  // Halfway across the seam the two seam bins carry equal mass.
  const auto mid = encode(OrientationAngle::from_degrees(-11.25), defaults());
  EXPECT_NEAR(mid[0], mid[15], 1e-15);
  EXPECT_GT(mid[0], 0.4);
}

TEST(Encode, TinySigmaDoesNotUnderflow) {
  ConversionConfig cfg;
  cfg.sigma = deg_to_rad(0.01);
  const auto p = encode(OrientationAngle::from_degrees(200.0), cfg);
  EXPECT_TRUE(IsNormalized(p));
  EXPECT_EQ(p.argmax_bin(), 9u);
}

TEST(Decode, RoundTripAtBinCentre) {
  const Decoder dec(defaults());
  for (int i = 0; i < 16; ++i) {
    const OrientationAngle t(bin_angle(i, 16));
    EXPECT_LE(angular_distance(dec.decode(encode(t, defaults())), t), deg_to_rad(0.1) + 1e-12) << i;
  }
}

TEST(Decode, OneHotLandsOnItsBin) {
  std::vector<double> bins(16, 0.0);
  bins[5] = 1.0;
  const OrientationAngle got = decode(DiscreteDensity(bins), defaults());
  EXPECT_LE(std::abs(got.degrees() - 112.5), 0.1);
}

// Brute-force cosine-similarity objective on a 0.01 degree grid.
double brute_force_argmax_deg(const DiscreteDensity& p, double sigma_deg) {
  double best = -1.0, best_deg = 0.0;
  double pn = 0.0;
  for (double v : p.bins()) pn += v * v;
  pn = std::sqrt(pn);
  for (int k = 0; k < 36000; ++k) {
    const double t = k * 0.01;
    double dot = 0.0, gn = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      double diff = std::fmod(std::abs(360.0 * i / p.size() - t), 360.0);
      diff = std::min(diff, 360.0 - diff);
      const double g = std::exp(-diff * diff / (2 * sigma_deg * sigma_deg));
      dot += p[i] * g;
      gn += g * g;
    }
    const double s = dot / (pn * std::sqrt(gn));
    if (s > best) {
      best = s;
      best_deg = t;
    }
  }
  return best_deg;
}

TEST(Decode, BetweenBinCentresAgreesWithBruteForce) {
  const auto p = encode(OrientationAngle::from_degrees(40.0), defaults());
  const double oracle = brute_force_argmax_deg(p, 10.0);
  EXPECT_NEAR(oracle, 40.0, 0.01);
  const double got = decode(p, defaults()).degrees();
  EXPECT_NEAR(got, oracle, 0.1);
  EXPECT_NEAR(got, 40.0, 1.0);
}

TEST(Decode, RoundTripProperty) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const Decoder dec(defaults());
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const OrientationAngle t(u(rng));
    worst = std::max(worst, angular_distance(dec.decode(encode(t, defaults())), t));
  }
  EXPECT_LE(rad_to_deg(worst), 1.0);
  // Within about half the candidate spacing.
  EXPECT_LE(rad_to_deg(worst), 0.06);
}

TEST(Decode, RefinementTightensRoundTrip) {
  auto cfg = defaults();
  cfg.refine = true;
  const Decoder dec(cfg);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int i = 0; i < 200; ++i) {
    const OrientationAngle t(u(rng));
    EXPECT_LE(rad_to_deg(angular_distance(dec.decode(encode(t, cfg)), t)), 0.006);
  }
}

TEST(Decode, PrintedLinearKernelSnapsToBinCentres) {
  // With the first-power exponent every term is convex between adjacent bin
  // centres, so the objective peaks on a bin centre.
  auto cfg = defaults();
  cfg.kernel = DecodeKernel::printed_linear;
  const Decoder dec(cfg);
  for (double deg : {3.0, 40.0, 100.0, 359.0}) {
    const double got = dec.decode(encode(OrientationAngle::from_degrees(deg), cfg)).degrees();
    const double to_centre = std::abs(std::remainder(got, 22.5));
    EXPECT_LE(to_centre, 0.1) << deg;
  }
  cfg.kernel = DecodeKernel::printed_squared;
  EXPECT_NEAR(decode(encode(OrientationAngle::from_degrees(45.0), cfg), cfg).degrees(), 45.0, 0.1);
}

TEST(Decode, RejectsAllZeroAndWrongSize) {
  const Decoder dec(defaults());
  std::vector<double> zeros(16, 0.0);
  EXPECT_THROW(dec.decode(std::span<const double>(zeros)), std::invalid_argument);
  std::vector<double> short_bins(8, 0.125);
  EXPECT_THROW(dec.decode(std::span<const double>(short_bins)), std::invalid_argument);
}

TEST(Decode, UnnormalizedInputMatchesNormalized) {
  const auto p = encode(OrientationAngle::from_degrees(77.0), defaults());
  std::vector<double> scaled(p.bins().begin(), p.bins().end());
  for (auto& v : scaled) v *= 7.5;
  const Decoder dec(defaults());
  EXPECT_NEAR(dec.decode(std::span<const double>(scaled)).radians(), dec.decode(p).radians(), 1e-12);
}

TEST(Decode, UniformIsLowConfidenceAtZero) {
  const Decoder dec(defaults());
  const auto r = dec.decode_detailed(DiscreteDensity::uniform(16).bins());
  EXPECT_TRUE(r.low_confidence);
  EXPECT_EQ(r.angle.radians(), 0.0);
  EXPECT_FALSE(dec.decode_detailed(encode(OrientationAngle(1.0), defaults()).bins()).low_confidence);
}

TEST(Decode, NeverExceedsHalfTurnError) {
  std::mt19937_64 rng(8);
  const Decoder dec(defaults());
  for (int i = 0; i < 300; ++i) {
    const auto p = random_density(rng, 16);
    const OrientationAngle gt(std::uniform_real_distribution<double>(0.0, kTwoPi)(rng));
    const double e = rad_to_deg(angular_distance(dec.decode(p), gt));
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 180.0);
  }
}

TEST(Fuse, UniformIsIdentity) {
  std::mt19937_64 rng(9);
  const auto u = DiscreteDensity::uniform(16);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_density(rng, 16);
    const auto single = fuse({p});
    const auto with_u = fuse({p, u});
    EXPECT_EQ(single, with_u);
    EXPECT_EQ(fuse({u, p, u}), single);
    for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(with_u[k], p[k], 1e-15);
  }
  EXPECT_EQ(fuse({u, u}), u);
}

TEST(Fuse, ProductRenormalized) {
  const auto a = DiscreteDensity::from_weights({1, 2, 3, 4});
  const auto b = DiscreteDensity::from_weights({4, 3, 2, 1});
  const auto f = fuse({a, b});
  // 4, 6, 6, 4 over 20
  EXPECT_NEAR(f[0], 0.2, 1e-15);
  EXPECT_NEAR(f[1], 0.3, 1e-15);
  EXPECT_TRUE(IsNormalized(f));
}

TEST(Fuse, PriorRescuesBimodalPrediction) {
  // Image density: wrong peak at bin 10 slightly above the right one at bin 2.
  std::vector<double> image(16, 0.05 / 14);
  image[2] = 0.45;
  image[10] = 0.5;
  // Prior: mass around bin 2.
  std::vector<double> prior(16, 0.1 / 13);
  prior[1] = 0.2;
  prior[2] = 0.5;
  prior[3] = 0.2;
  const DiscreteDensity p(image), q(prior);
  EXPECT_EQ(p.argmax_bin(), 10u);
  const auto f = fuse({p, q});
  // Hand products: bin 2 -> 0.45 * 0.5 = 0.225; bin 10 -> 0.5 * 0.1/13.
  const double z = 0.225 + 0.5 * (0.1 / 13) + 2 * (0.05 / 14) * 0.2 + 12 * (0.05 / 14) * (0.1 / 13);
  EXPECT_NEAR(f[2], 0.225 / z, 1e-14);
  EXPECT_NEAR(f[10], 0.5 * (0.1 / 13) / z, 1e-14);
  EXPECT_EQ(f.argmax_bin(), 2u);
  EXPECT_NEAR(decode(f, defaults()).degrees(), 45.0, 3.0);
}

TEST(Fuse, DisjointSupportsRejected) {
  const DiscreteDensity a({0.5, 0.5, 0.0, 0.0}), b({0.0, 0.0, 0.5, 0.5});
  EXPECT_THROW(fuse({a, b}), ZeroProductError);
  EXPECT_THROW(fuse(std::span<const DiscreteDensity>{}), std::invalid_argument);
  EXPECT_THROW(fuse({a, DiscreteDensity::uniform(8)}), std::invalid_argument);
}

TEST(Fuse, ManyPeakedFactorsStayFinite) {
  // 40 sharp factors: a naive running product underflows.
  ConversionConfig cfg;
  cfg.sigma = deg_to_rad(3.0);
  std::vector<DiscreteDensity> factors(40, encode(OrientationAngle::from_degrees(30.0), cfg));
  const auto f = fuse(factors);
  EXPECT_TRUE(IsNormalized(f));
  EXPECT_EQ(f.argmax_bin(), 1u);
}

TEST(Kl, Examples) {
  const auto p = encode(OrientationAngle(0.3), defaults());
  EXPECT_EQ(kl_divergence(p, p), 0.0);
  EXPECT_EQ(kl_divergence(DiscreteDensity::uniform(16), DiscreteDensity::uniform(16)), 0.0);
  // Frozen from a 40-digit evaluation, both sides floored at 1e-12 and renormalized.
  const auto a = encode(OrientationAngle(0.0), defaults());
  const auto b = encode(OrientationAngle(kPi / 2), defaults());
  EXPECT_NEAR(kl_divergence(a, b), 26.8118204547864676, 1e-9);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto r = random_density(rng, 16);
    EXPECT_EQ(kl_divergence(r, r), 0.0);
  }
}

TEST(Kl, FloorKeepsResultFinite) {
  const DiscreteDensity p({0.25, 0.25, 0.25, 0.25}), q({1.0, 0.0, 0.0, 0.0});
  const double kl = kl_divergence(p, q);
  EXPECT_TRUE(std::isfinite(kl));
  EXPECT_GT(kl, 10.0);
  EXPECT_NEAR(kl_divergence(q, p), 1.386294361033997555, 1e-15);
}

TEST(Kl, NonnegativeOnRandomPairs) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_density(rng, 16), q = random_density(rng, 16);
    EXPECT_GE(kl_divergence(p, q), 0.0);
    EXPECT_EQ(kl_divergence(p, p), 0.0);
  }
}

TEST(Normalization, EveryEncodeIsNormalized) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0), s(0.5, 60.0);
  for (int i = 0; i < 500; ++i) {
    ConversionConfig cfg;
    cfg.n_bins = 4 + static_cast<int>(rng() % 60);
    cfg.decode_step = kTwoPi / cfg.n_bins / 4;
    cfg.sigma = deg_to_rad(s(rng));
    EXPECT_TRUE(IsNormalized(encode(OrientationAngle(u(rng)), cfg)));
  }
}

}  // namespace
}  // namespace orient
