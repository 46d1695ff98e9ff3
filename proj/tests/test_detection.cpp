#include <gtest/gtest.h>

#include "support.hpp"

using namespace nfisac;
using namespace nfisac::testing;

namespace {

// Flat map of `value` with the given shape and a unit velocity axis.
DetectionMap flat_map(std::size_t R, std::size_t D, std::size_t A, double value) {
  DetectionMap m;
  for (std::size_t i = 0; i < R; ++i) {
    m.range_bins.push_back(100 + i);
    m.ranges_m.push_back(10.0 + 0.5 * double(i));
  }
  m.doppler = default_doppler_grid(D);
  m.velocity_per_cycle = 50.0;
  for (double d : m.doppler) m.velocities_mps.push_back(d * 50.0);
  for (std::size_t k = 0; k < A; ++k) m.angles.push_back(0.01 * double(k));
  m.values.assign(R * D * A, value);
  return m;
}

std::vector<double> exponential(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = e(rng);
  return x;
}

}  // namespace

TEST(CfarScale, ClosedFormProperties) {
  // K = 1: P_fa = 1 / (1 + a).
  EXPECT_NEAR(cfar_scale(0.01, 1), 99.0, 1e-9);
  for (std::size_t k : {4u, 16u, 64u})
    for (double pfa : {1e-2, 1e-4, 1e-6}) {
      const double a = cfar_scale(pfa, k);
      EXPECT_NEAR(std::pow(1 + a / double(k), -double(k)), pfa, 1e-9 * pfa);
    }
  // Large K tends to the known-noise threshold -ln(pfa).
  EXPECT_NEAR(cfar_scale(1e-4, 1000000), -std::log(1e-4), 1e-3);
}

TEST(CaCfar, EqualCellsNeverDetect) {
  const std::vector<double> x(64, 3.0);
  for (double pfa : {1e-6, 1e-3, 0.1, 0.3}) EXPECT_TRUE(ca_cfar(x, {pfa, 8, 2}).empty()) << pfa;
}

TEST(CaCfar, IsolatedSpikeIsFound) {
  std::vector<double> x(64, 1.0);
  x[30] = 100.0;
  EXPECT_EQ(ca_cfar(x, {1e-4, 8, 2}), std::vector<std::size_t>{30});
  x[0] = 100.0;  // clipped window at the edge
  EXPECT_EQ(ca_cfar(x, {1e-4, 8, 2}), (std::vector<std::size_t>{0, 30}));
}

TEST(CaCfar, GuardCellsHideTheTargetFromItsOwnNoiseEstimate) {
  std::vector<double> x(64, 1.0);
  x[30] = 100.0;
  x[31] = 100.0;
  EXPECT_EQ(ca_cfar(x, {1e-4, 8, 2}), (std::vector<std::size_t>{30, 31}));
}

TEST(CaCfar, RejectsBadInputs) {
  EXPECT_THROW(ca_cfar(std::vector<double>(21, 1.0), {1e-4, 8, 2}), InvalidArgument);
  EXPECT_THROW(ca_cfar(std::vector<double>(64, 1.0), {0.0, 8, 2}), InvalidArgument);
  EXPECT_THROW(ca_cfar(std::vector<double>(64, 1.0), {1.0, 8, 2}), InvalidArgument);
  EXPECT_THROW(ca_cfar(std::vector<double>(64, 1.0), {1e-3, 0, 2}), InvalidArgument);
}

TEST(CaCfar, ScaleInvariant) {
  auto x = exponential(512, 3);
  const auto base = ca_cfar(x, {1e-2, 8, 2});
  for (auto& v : x) v *= 1234.5;
  EXPECT_EQ(ca_cfar(x, {1e-2, 8, 2}), base);
}

TEST(CaCfar, MorePermissivePfaFindsASuperset) {
  const auto x = exponential(4096, 4);
  std::vector<std::size_t> prev;
  for (double pfa : {1e-6, 1e-4, 1e-2, 1e-1}) {
    const auto hits = ca_cfar(x, {pfa, 8, 2});
    EXPECT_TRUE(std::includes(hits.begin(), hits.end(), prev.begin(), prev.end())) << pfa;
    prev = hits;
  }
}

TEST(CaCfar, FalseAlarmRateMatchesDesign) {
  const double pfa = 1e-2;
  std::size_t alarms = 0, cells = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto x = exponential(1000, 100 + s);
    // Interior cells only: the edges use fewer training cells.
    for (auto i : ca_cfar(x, {pfa, 8, 2})) alarms += (i >= 10 && i < 990);
    cells += 980;
  }
  const double rate = double(alarms) / double(cells);
  EXPECT_GT(rate, pfa / 1.3);
  EXPECT_LT(rate, pfa * 1.3);
}

TEST(Detect, OnGridVelocityAndPosition) {
  auto m = flat_map(5, 32, 3, 1.0);
  m.at(2, 20, 1) = 1e4;
  const auto ds = detect(m, {1e-6, 8, 2});
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].cell, (MapCell{2, 20, 1}));
  EXPECT_DOUBLE_EQ(ds[0].range_m, 11.0);
  EXPECT_DOUBLE_EQ(ds[0].velocity_mps, m.velocities_mps[20]);
  EXPECT_NEAR(ds[0].angle_deg, 0.01 * 180 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(ds[0].statistic_db, 40.0, 1e-9);
  EXPECT_GT(ds[0].statistic_db, 10 * std::log10(cfar_scale(1e-6, 16)));
}

TEST(Detect, ParabolicRefinementMovesTowardTheStrongerNeighbour) {
  auto m = flat_map(1, 32, 1, 1.0);
  m.at(0, 20, 0) = 1e4;
  m.at(0, 21, 0) = 5e3;
  m.at(0, 19, 0) = 1e2;
  const auto ds = detect(m, {1e-6, 8, 2});
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_GT(ds[0].velocity_mps, m.velocities_mps[20]);
  EXPECT_LT(ds[0].velocity_mps, 0.5 * (m.velocities_mps[20] + m.velocities_mps[21]) + 1e-12);
}

TEST(Detect, AdjacentCellsMergeIntoOneTarget) {
  auto m = flat_map(5, 32, 3, 1.0);
  m.at(2, 20, 1) = 1e4;
  m.at(2, 21, 1) = 5e3;
  m.at(3, 20, 1) = 3e3;
  m.at(2, 20, 2) = 2e3;  // same range-Doppler cell, another candidate angle
  const auto ds = detect(m, {1e-6, 8, 2});
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].cell, (MapCell{2, 20, 1}));
}

TEST(Detect, SeparatedTargetsStaySeparate) {
  auto m = flat_map(5, 64, 2, 1.0);
  m.at(1, 10, 0) = 1e4;
  m.at(3, 40, 1) = 1e4;
  const auto ds = detect(m, {1e-6, 8, 2});
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].cell, (MapCell{1, 10, 0}));
  EXPECT_EQ(ds[1].cell, (MapCell{3, 40, 1}));
}

TEST(Detect, ZeroDopplerCellIsBlankedUnlessDisabled) {
  auto m = flat_map(3, 32, 2, 1.0);
  ASSERT_EQ(zero_doppler_cell(m), 16u);
  m.at(1, 16, 0) = 1e4;  // static clutter residue
  m.at(1, 17, 1) = 1e4;  // slow mover one cell away
  const auto ds = detect(m, {1e-6, 8, 2});
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].cell, (MapCell{1, 17, 1}));
  EXPECT_EQ(detect(m, {1e-6, 8, 2, false}).size(), 1u);  // both cells touch: one cluster
  m.at(1, 17, 1) = 1.0;
  EXPECT_TRUE(detect(m, {1e-6, 8, 2}).empty());
  EXPECT_EQ(detect(m, {1e-6, 8, 2, false}).size(), 1u);
  m.doppler.assign(32, 0.3);  // no cell near zero
  EXPECT_EQ(zero_doppler_cell(m), 32u);
}

TEST(Detect, FlatMapIsEmpty) { EXPECT_TRUE(detect(flat_map(4, 32, 2, 7.0), {0.3, 8, 2}).empty()); }

TEST(ClusterCells, DiagonalNeighboursConnect) {
  const auto m = flat_map(4, 16, 1, 1.0);
  const std::vector<MapCell> cells{{0, 0, 0}, {1, 1, 0}, {3, 5, 0}};
  const auto cl = cluster_cells(m, cells);
  ASSERT_EQ(cl.size(), 2u);
  EXPECT_EQ(cl[0].size(), 2u);
  EXPECT_EQ(cl[1].size(), 1u);
}
