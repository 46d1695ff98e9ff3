#include <gtest/gtest.h>

#include "support.hpp"

using namespace nfisac;
using namespace nfisac::testing;

TEST(ArrayGeometry, RejectsDegenerateArrays) {
  EXPECT_THROW(ArrayGeometry(1, 0.005, 28e9), InvalidArgument);
  EXPECT_THROW(ArrayGeometry(4, 0.0, 28e9), InvalidArgument);
  EXPECT_THROW(ArrayGeometry(4, 0.005, -1.0), InvalidArgument);
}

TEST(ArrayGeometry, ApertureAndCenteredElements) {
  const auto g = case_geometry();
  EXPECT_DOUBLE_EQ(g.aperture(), 255.0 * g.spacing());
  EXPECT_NEAR(g.wavelength(), 0.0107068735, 1e-10);
  double sum = 0;
  for (std::size_t n = 0; n < g.n_elements(); ++n) sum += g.element_position(n);
  EXPECT_NEAR(sum, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.element_position(0), -g.element_position(255));
}

TEST(ElementDistance, LawOfCosines) {
  const ArrayGeometry g(2, 1.0, 1e9);
  EXPECT_NEAR(element_distance(g, {10.0, 0.0}, 0), std::sqrt(100.25), 1e-14);
  // Near endfire the element on the target side is half a spacing closer.
  EXPECT_NEAR(element_distance(g, {10.0, std::numbers::pi / 2 - 1e-9}, 1), 9.5, 1e-8);
  const ArrayGeometry odd(5, 0.3, 1e9);
  EXPECT_DOUBLE_EQ(element_distance(odd, {7.0, 0.0}, 2), 7.0);
  EXPECT_THROW(element_distance(g, {10.0, 0.0}, 2), InvalidArgument);
}

TEST(PolarPoint, Validation) {
  const auto g = small_geometry();
  EXPECT_THROW(nf_steering(g, {0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(nf_steering(g, {1.0, std::numbers::pi / 2}), InvalidArgument);
  EXPECT_THROW(ff_steering(g, -std::numbers::pi / 2), InvalidArgument);
}

TEST(Steering, UnitNormEverywhere) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-1.5, 1.5), lr(0.0, 7.0);
  for (auto g : {small_geometry(7), case_geometry()})
    for (int i = 0; i < 200; ++i) {
      const PolarPoint p{std::exp(lr(rng)), ang(rng)};
      EXPECT_NEAR(nf_steering(g, p).coeffs().norm(), 1.0, 1e-12);
      EXPECT_NEAR(ff_steering(g, p.angle).coeffs().norm(), 1.0, 1e-12);
    }
}

TEST(Steering, PhasesMatchLongDoubleDistances) {
  const auto g = ArrayGeometry::with_spacing_wavelengths(4, 0.5, 28e9);
  const PolarPoint p{2.0, 20 * kDeg};
  const auto a = nf_steering(g, p);
  const long double lam = 299792458.0L / 28e9L, r = 2.0L, s = std::sin(20.0L * std::numbers::pi_v<long double> / 180.0L);
  for (std::size_t n = 0; n < 4; ++n) {
    const long double d = (static_cast<long double>(n) - 1.5L) * lam / 2.0L;
    const long double rn = std::sqrt(r * r + d * d - 2.0L * r * d * s);
    const long double phase = -2.0L * std::numbers::pi_v<long double> / lam * (rn - r);
    const cd expect = std::polar(0.5, static_cast<double>(phase));
    EXPECT_LT(std::abs(a[n] - expect), 1e-12) << "element " << n;
  }
}

TEST(Steering, RecurrencePhasorsMatchDirectEvaluation) {
  const auto g = case_geometry();
  CVector ph;
  for (PolarPoint p : {PolarPoint{3.0, -1.2}, {15.5, 5 * kDeg}, {400.0, 0.7}, {1e7, -0.3}}) {
    detail::nf_phasors(g, p.range, std::sin(p.angle), ph);
    const CVector direct = nf_steering(g, p).coeffs() * std::sqrt(256.0);
    EXPECT_LT((ph - direct).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Steering, BoresightCenterElementHasZeroPhase) {
  const auto g = small_geometry(9);
  const auto a = nf_steering(g, {3.0, 0.0});
  EXPECT_NEAR(std::arg(a[4]), 0.0, 1e-15);
}

TEST(Steering, FarFieldBoresightIsUniform) {
  const auto g = small_geometry(16);
  const auto a = ff_steering(g, 0.0);
  for (std::size_t n = 0; n < 16; ++n) EXPECT_NEAR(std::abs(a[n] - cd(0.25, 0.0)), 0.0, 1e-15);
}

TEST(Steering, FarFieldBeamsOnTheDftGridAreOrthogonal) {
  const auto g = small_geometry(32);
  const auto a0 = ff_steering(g, 0.0);
  for (int k = 1; k < 16; ++k) {
    const double u = g.wavelength() / (32 * g.spacing()) * k;
    EXPECT_LT(std::abs(a0.coeffs().dot(ff_steering_sin(g, u).coeffs())), 1e-10) << k;
  }
}

TEST(Steering, NearFieldConvergesToFarField) {
  const auto g = case_geometry();
  const double rd = rayleigh_distance(g);
  for (double th : {0.0, 0.4, -1.0}) {
    const auto ff = ff_steering(g, th);
    EXPECT_GE(std::abs(nf_steering(g, {100 * rd, th}).coeffs().dot(ff.coeffs())), 1 - 1e-4);
    EXPECT_GE(std::abs(nf_steering(g, {1e6 * rd, th}).coeffs().dot(ff.coeffs())), 0.9999);
  }
}

TEST(ArrayGain, MatchedCodewordsReachN) {
  const auto g = case_geometry();
  const PolarPoint p{12.0, 0.3};
  EXPECT_NEAR(array_gain(nf_steering(g, p), g, p), 256.0, 1e-9);
  EXPECT_NEAR(array_gain_far(ff_steering(g, 0.3), g, 0.3), 256.0, 1e-9);
}

TEST(ArrayGain, InvariantToGlobalPhase) {
  const auto g = small_geometry(64);
  const auto w = nf_steering(g, {5.0, 0.2});
  const auto rotated = SteeringVector::from_coefficients(w.coeffs() * std::polar(1.0, 1.234));
  for (double r : {2.0, 5.0, 40.0}) EXPECT_NEAR(array_gain(w, g, {r, 0.1}), array_gain(rotated, g, {r, 0.1}), 1e-10);
}

TEST(ArrayGain, FarFieldBeamLosesOver3dBInsideTheFocusingRegion) {
  const auto g = case_geometry();
  const PolarPoint p{5.0, 0.0};
  const double nf = array_gain(nf_steering(g, p), g, p);
  const double ff = array_gain(ff_steering(g, 0.0), g, p);
  EXPECT_GT(10 * std::log10(nf / ff), 3.0);
}

TEST(RayleighDistance, Formula) {
  const ArrayGeometry g(2, 1.0, kSpeedOfLight / 0.01);
  EXPECT_NEAR(rayleigh_distance(g), 200.0, 1e-9);
  // 2 (255 lambda/2)^2 / lambda at 28 GHz.
  const auto c = case_geometry();
  EXPECT_NEAR(rayleigh_distance(c), 2 * std::pow(255 * c.wavelength() / 2, 2) / c.wavelength(), 1e-9);
  EXPECT_NEAR(rayleigh_distance(c), 348.107, 1e-3);
  for (std::size_t n : {8u, 64u, 512u}) {
    const double ratio = rayleigh_distance(small_geometry(2 * n)) / rayleigh_distance(small_geometry(n));
    EXPECT_NEAR(ratio, std::pow((2.0 * n - 1) / (n - 1.0), 2), 1e-12);
  }
}

TEST(BeamDepth, ContainsFocusAndGrowsWithRange) {
  const auto g = case_geometry();
  double prev = 0;
  for (double r : {3.0, 6.0, 12.0, 24.0, 40.0}) {
    const auto bd = beam_depth_3db(g, {r, 0.0});
    ASSERT_TRUE(bd.bounded()) << r;
    EXPECT_TRUE(bd.contains(r));
    EXPECT_GT(bd.width(), prev);
    prev = bd.width();
  }
  EXPECT_LT(beam_depth_3db(g, {10.0, 0.0}).width(), beam_depth_3db(g, {10.0, 45 * kDeg}).width());
  EXPECT_FALSE(beam_depth_3db(g, {5 * rayleigh_distance(g), 0.0}).bounded());
}

TEST(BeamDepth, EdgesMatchDenseScan) {
  const auto g = case_geometry();
  const PolarPoint f{15.5, 5 * kDeg};
  const auto bd = beam_depth_3db(g, f);
  const auto w = nf_steering(g, f);
  const double half = 0.5 * array_gain(w, g, f);
  // Walk outward in 1e-4 relative steps; the first sample below half gain
  // brackets each edge.
  auto scan = [&](double step) {
    double r = f.range;
    while (array_gain(w, g, {r * step, f.angle}) >= half) r *= step;
    return r;
  };
  EXPECT_NEAR(scan(1.0001), *bd.far_edge, 3e-4 * *bd.far_edge);
  EXPECT_NEAR(scan(1 / 1.0001), bd.near_edge, 3e-4 * bd.near_edge);
}

TEST(Ebrd, InsideRayleighAndShrinksOffBoresight) {
  const auto g = case_geometry();
  const double rd = rayleigh_distance(g);
  double prev = std::numeric_limits<double>::infinity();
  for (double deg : {0.0, 15.0, 30.0, 45.0, 60.0, 75.0}) {
    const double e = ebrd(g, deg * kDeg);
    EXPECT_LT(e, rd);
    EXPECT_LE(e, prev * (1 + 1e-3)) << deg;
    prev = e;
  }
  EXPECT_NEAR(ebrd(g, 0.0), 50.38, 0.05);
  EXPECT_NEAR(ebrd(g, -30 * kDeg), ebrd(g, 30 * kDeg), 1e-3 * ebrd(g, 30 * kDeg));
}
