#include <gtest/gtest.h>

#include "support.hpp"

using namespace nfisac;
using namespace nfisac::testing;

namespace {

ClutterModel no_clutter() {
  ClutterModel c;
  c.enabled = false;
  return c;
}

ReductionMatrix two_beams(const ArrayGeometry& g, double range) {
  return candidate_reduction(g, candidate_angles(g, 0.1, 2), range);
}

}  // namespace

TEST(SpaceTimeSteering, FarLimitMatchesKroneckerForm) {
  const auto g = small_geometry(32);
  const auto w = small_waveform(16);
  const double far = 1e3 * rayleigh_distance(g);
  const double v = 3.0, omega = 2 * v / (g.wavelength() * w.prf);
  const auto nf = space_time_steering_nf(g, w, {far, 0.3}, {v, 0.0}, 16);
  const auto ff = space_time_steering_ff(g, w, 0.3, omega, 16);
  EXPECT_NEAR(nf.coeffs.norm(), 1.0, 1e-12);
  EXPECT_NEAR(ff.coeffs.norm(), 1.0, 1e-12);
  EXPECT_GE(std::abs(nf.coeffs.dot(ff.coeffs)), 0.9999);
}

TEST(SpaceTimeSteering, TransverseMotionDecorrelatesInTheNearField) {
  const auto g = case_geometry();
  const WaveformParams w;
  const PolarPoint p{10.0, 0.0};
  const auto still = space_time_steering_nf(g, w, p, {}, w.n_pulses);
  const auto moving = space_time_steering_nf(g, w, p, {0.0, 5.0}, w.n_pulses);
  EXPECT_LT(std::abs(still.coeffs.dot(moving.coeffs)), 0.99);
  // The same motion far away is invisible.
  const PolarPoint q{1e3 * rayleigh_distance(g), 0.0};
  EXPECT_GT(std::abs(space_time_steering_nf(g, w, q, {}, w.n_pulses).coeffs.dot(
                space_time_steering_nf(g, w, q, {0.0, 5.0}, w.n_pulses).coeffs)),
            0.9999);
}

TEST(SpaceTimeSteering, RejectsAliasedDoppler) {
  const auto g = small_geometry(8);
  const auto w = small_waveform(8);
  EXPECT_THROW(space_time_steering_nf(g, w, {5.0, 0.0}, {60.0, 0.0}, 8), InvalidArgument);
  EXPECT_THROW(space_time_steering_ff(g, w, 0.0, 0.5, 8), InvalidArgument);
}

TEST(Snapshot, IdentityReductionIsANoOp) {
  const auto g = small_geometry(8);
  const auto w = small_waveform(8);
  const SceneSynthesizer s(g, w, {{{20 * w.bin_width(), 0.2}, {2.0, 0.0}, {1.0, 0.0}}}, {}, 1.0, 5);
  const auto id = ReductionMatrix::identity(8);
  for (std::size_t l : {0u, 20u, 199u}) EXPECT_EQ(extract_snapshot(s, l), extract_snapshot(s, l, &id));
  EXPECT_THROW(extract_snapshot(s, 200), InvalidArgument);
}

TEST(Snapshot, SingleBeamOfAStaticTargetHasConstantModulus) {
  const auto g = small_geometry(16);
  const auto w = small_waveform(8);
  const PolarPoint p{20 * w.bin_width(), 0.2};
  const SceneSynthesizer s(g, w, {{p, {}, {1.0, 0.0}}}, no_clutter(), 0.0, 1);
  const auto T = candidate_reduction(g, {0.2}, p.range);
  const auto y = extract_snapshot(s, 20, &T);
  ASSERT_EQ(y.size(), 8);
  for (Eigen::Index m = 0; m < 8; ++m) EXPECT_NEAR(std::abs(y[m]), 4.0, 1e-12);
}

TEST(Snapshot, ProjectionNeverAddsEnergy) {
  const auto g = small_geometry(16);
  const auto w = small_waveform(8);
  const SceneSynthesizer s(g, w, {}, {}, 1.0, 6);
  const auto T = two_beams(g, 5.0);
  for (std::size_t l = 0; l < 50; ++l) EXPECT_LE(extract_snapshot(s, l, &T).squaredNorm(), extract_snapshot(s, l).squaredNorm());
}

TEST(Reduction, OrthonormalColumnsSpanningTheCodewords) {
  std::mt19937_64 rng(8);
  CMatrix cols(12, 4);
  for (int j = 0; j < 4; ++j) cols.col(j) = random_vector(rng, 12);
  const auto T = ReductionMatrix::from_codewords(cols);
  EXPECT_LT((T.matrix().adjoint() * T.matrix() - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  // Projecting the codewords onto span(T) leaves them unchanged.
  EXPECT_LT((T.matrix() * (T.matrix().adjoint() * cols) - cols).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(T.beams(), 4u);
  EXPECT_EQ(T.elements(), 12u);
}

TEST(Reduction, DependentCodewordsAreRejected) {
  std::mt19937_64 rng(9);
  CMatrix cols(8, 3);
  cols.col(0) = random_vector(rng, 8);
  cols.col(1) = random_vector(rng, 8);
  cols.col(2) = 2.0 * cols.col(0) - cd(0, 1) * cols.col(1);
  EXPECT_THROW(ReductionMatrix::from_codewords(cols), NumericalError);
  EXPECT_THROW(ReductionMatrix::from_codewords(CMatrix(3, 4)), InvalidArgument);
}

TEST(TrainingWindow, SplitsAroundTheCellUnderTest) {
  const auto tw = training_window(100, 50, 8, 2);
  EXPECT_FALSE(tw.shifted);
  EXPECT_EQ(tw.bins, (std::vector<std::size_t>{44, 45, 46, 47, 53, 54, 55, 56}));
}

TEST(TrainingWindow, ShiftsInwardAtTheEdges) {
  const auto lo = training_window(100, 1, 8, 2);
  EXPECT_TRUE(lo.shifted);
  EXPECT_EQ(lo.bins, (std::vector<std::size_t>{4, 5, 6, 7, 8, 9, 10, 11}));
  const auto hi = training_window(100, 98, 8, 2);
  EXPECT_TRUE(hi.shifted);
  EXPECT_EQ(hi.bins.size(), 8u);
  for (auto b : hi.bins) EXPECT_TRUE(b < 96);
}

TEST(TrainingWindow, Errors) {
  EXPECT_THROW(training_window(100, 50, 7, 2), InvalidArgument);
  EXPECT_THROW(training_window(100, 50, 0, 2), InvalidArgument);
  EXPECT_THROW(training_window(100, 100, 8, 2), InvalidArgument);
  EXPECT_THROW(training_window(10, 5, 8, 2), InvalidArgument);
}

TEST(Covariance, NoiseOnlyEstimateIsNearIdentity) {
  const auto g = small_geometry(16);
  const auto w = small_waveform(8);
  const SceneSynthesizer s(g, w, {}, no_clutter(), 1.0, 12);
  const auto T = two_beams(g, 5.0);
  const auto est = estimate_covariance(s, 100, 160, 2, &T, 0.0);
  const auto& R = est.matrix;
  ASSERT_EQ(R.rows(), 16);
  EXPECT_EQ((R - R.adjoint()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(R.trace().real() / 16.0, 1.0, 0.05);
  const double rel = (R - CMatrix::Identity(16, 16)).norm() / 4.0;
  EXPECT_LT(rel, 0.5);  // about sqrt(dim / K)
  EXPECT_FALSE(est.rank_deficient);
  EXPECT_FALSE(est.window_shifted);
}

TEST(Covariance, LoadingBoundsTheSpectrumAndFlagsAreSet) {
  const auto g = small_geometry(8);
  const auto w = small_waveform(8);
  const SceneSynthesizer s(g, w, {}, {}, 1.0, 13);
  const auto est = estimate_covariance(s, 1, 32, 2, nullptr, 0.5);
  EXPECT_TRUE(est.rank_deficient);
  EXPECT_TRUE(est.window_shifted);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(est.matrix);
  EXPECT_GE(es.eigenvalues().minCoeff(), 0.5 - 1e-9);
  EXPECT_THROW(estimate_covariance(s, 50, 32, 2, nullptr, -1.0), InvalidArgument);
}

TEST(Covariance, DominantClutterEigenvectorIsStatic) {
  const auto g = small_geometry(8);
  const auto w = small_waveform(8);
  const SceneSynthesizer s(g, w, {}, {}, 1.0, 14);
  const auto est = estimate_covariance(s, 100, 190, 2, nullptr, 0.0);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(est.matrix);
  const CVector top = es.eigenvectors().col(est.matrix.rows() - 1);
  // Energy in the pulse-constant subspace: average over pulses, per element.
  CVector mean = CVector::Zero(8);
  for (Eigen::Index m = 0; m < 8; ++m) mean += top.segment(m * 8, 8) / 8.0;
  EXPECT_GE(8.0 * mean.squaredNorm(), 0.9);
}

TEST(Weights, IdentityCovarianceGivesTheMatchedFilter) {
  std::mt19937_64 rng(15);
  const CVector nu = random_vector(rng, 6).normalized();
  EXPECT_LT((stap_weights(CMatrix::Identity(6, 6), nu) - nu).cwiseAbs().maxCoeff(), 1e-14);
  const CVector u = stap_weights(CMatrix::Identity(6, 6), nu, WeightNormalization::UnitNoiseGain);
  EXPECT_NEAR(u.norm(), 1.0, 1e-14);
}

TEST(Weights, DistortionlessAndSuppressesStrongInterference) {
  std::mt19937_64 rng(16);
  const CMatrix R = random_pd(rng, 10);
  const CVector nu = random_vector(rng, 10);
  const CVector w = stap_weights(R, nu);
  EXPECT_NEAR(std::abs(w.dot(nu) - cd(1.0)), 0.0, 1e-10);

  CMatrix D = CMatrix::Identity(4, 4);
  D(0, 0) = 1e6;
  const CVector flat = CVector::Constant(4, 0.5);
  const CVector wd = stap_weights(D, flat);
  EXPECT_LT(std::abs(wd[0]), 1e-5 * std::abs(wd[1]));
}

TEST(Weights, MinimizeOutputPowerUnderTheConstraint) {
  std::mt19937_64 rng(17);
  const CMatrix R = random_pd(rng, 8);
  const CVector nu = random_vector(rng, 8);
  const CVector w = stap_weights(R, nu);
  const double p0 = w.dot(R * w).real();
  for (int t = 0; t < 50; ++t) {
    CVector d = random_vector(rng, 8) * 0.1;
    d -= nu * (nu.dot(d) / nu.squaredNorm());  // keep w^H nu = 1
    const CVector w2 = w + d;
    EXPECT_GE(w2.dot(R * w2).real(), p0 * (1 - 1e-12));
  }
}

TEST(Weights, LoadingPullsTowardTheMatchedFilter) {
  std::mt19937_64 rng(18);
  const CMatrix R = random_pd(rng, 8);
  const CVector nu = random_vector(rng, 8).normalized();
  double prev = 0;
  for (double load : {0.0, 0.1, 1.0, 10.0, 1e3}) {
    CMatrix Rl = R;
    Rl.diagonal().array() += load;
    const double c = std::abs(stap_weights(Rl, nu).normalized().dot(nu));
    EXPECT_GE(c, prev - 1e-12);
    prev = c;
  }
  EXPECT_GT(prev, 0.999);
}

TEST(Weights, SingularOrMismatchedInputsThrow) {
  EXPECT_THROW(stap_weights(CMatrix::Zero(3, 3), CVector::Ones(3)), NumericalError);
  EXPECT_THROW(stap_weights(CMatrix::Identity(3, 3), CVector::Ones(4)), InvalidArgument);
}

TEST(Statistic, SquaredInnerProduct) {
  CVector w(2), x(2);
  w << cd(1, 0), cd(0, 1);
  x << cd(2, 0), cd(0, 3);
  EXPECT_DOUBLE_EQ(stap_statistic(w, x), 25.0);
  EXPECT_THROW(stap_statistic(w, CVector::Ones(3)), InvalidArgument);
}

TEST(Scan, NoiseOnlyStatisticHasUnitMean) {
  const auto g = small_geometry(16);
  const auto w = small_waveform(8);
  const SceneSynthesizer s(g, w, {}, no_clutter(), 1.0, 19);
  const auto angles = candidate_angles(g, 0.1, 2);
  const auto T = candidate_reduction(g, angles, 5.0);
  std::vector<std::size_t> bins;
  for (std::size_t l = 60; l < 140; l += 4) bins.push_back(l);
  ScanOptions o;
  o.k_cells = 128;
  o.loading = 0.0;
  const auto res = scan_cells(s, g, w, bins, angles, default_doppler_grid(8), &T, o);
  double mean = 0;
  for (double v : res.map.values) mean += v / double(res.map.values.size());
  EXPECT_GT(mean, 0.85);
  EXPECT_LT(mean, 1.4);  // sample-covariance excess, about K / (K - dim)
  EXPECT_EQ(res.map.values.size(), bins.size() * 8 * 2);
}

TEST(Scan, ThreadCountDoesNotChangeTheMap) {
  const auto g = small_geometry(8);
  const auto w = small_waveform(8);
  const SceneSynthesizer s(g, w, {{{40 * w.bin_width(), 0.1}, {3.0, 0.0}, {1.0, 0.0}}}, {}, 1.0, 20);
  const auto angles = candidate_angles(g, 0.1, 2);
  const auto T = candidate_reduction(g, angles, 40 * w.bin_width());
  ScanOptions a;
  a.k_cells = 64;
  ScanOptions b = a;
  b.threads = 3;
  const std::vector<std::size_t> bins{38, 39, 40, 41, 42};
  EXPECT_EQ(scan_cells(s, g, w, bins, angles, default_doppler_grid(8), &T, a).map.values,
            scan_cells(s, g, w, bins, angles, default_doppler_grid(8), &T, b).map.values);
}

TEST(SensingBins, CenteredAndClamped) {
  const WaveformParams w;
  EXPECT_EQ(sensing_bins(w, 15.0, 5), (std::vector<std::size_t>{38, 39, 40, 41, 42}));
  EXPECT_EQ(sensing_bins(w, 15.0, 4), (std::vector<std::size_t>{38, 39, 40, 41}));
  EXPECT_EQ(sensing_bins(w, 0.3, 4).front(), 0u);
  EXPECT_EQ(sensing_bins(w, w.max_range() - 0.1, 4).back(), w.range_bins() - 1);
}
