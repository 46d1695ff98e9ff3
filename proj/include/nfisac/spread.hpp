#pragma once

// Angular-spread descriptors and the polar-grid lookup table (coarse stage).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <tuple>
#include <vector>

#include "codebook.hpp"
#include "parallel.hpp"

namespace nfisac {

struct SpreadOptions {
  double threshold_db = 3.0;
  // Beams weaker than this (relative to the peak) are left out of the profile.
  double profile_floor_db = 30.0;
};

struct AngularSpreadDescriptor {
  std::size_t peak_index = 0;
  // Extent from the first to the last beam within threshold of the peak.
  std::size_t spread_count = 1;
  std::size_t profile_start = 0;
  std::vector<double> gain_profile_db;  // relative to the peak, <= 0

  friend bool operator==(const AngularSpreadDescriptor&, const AngularSpreadDescriptor&) = default;
};

inline constexpr double kProfileFloorClampDb = -300.0;

inline AngularSpreadDescriptor measure_spread(std::span<const double> gains, const SpreadOptions& opt = {}) {
  require(opt.threshold_db > 0, "spread threshold must be positive");
  require(opt.profile_floor_db >= opt.threshold_db, "profile floor must be at least the threshold");
  if (gains.empty()) throw CoverageError("empty beam sweep");
  std::size_t peak = 0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (!(gains[i] >= 0) || !std::isfinite(gains[i])) throw InvalidArgument("beam gains must be finite and >= 0");
    if (gains[i] > gains[peak]) peak = i;
  }
  const double top = gains[peak];
  if (!(top > 0)) throw CoverageError("no beam received any power");

  auto extent = [&](double db) {
    const double lim = top * std::pow(10.0, -db / 10.0);
    std::size_t first = peak, last = peak;
    for (std::size_t i = 0; i < gains.size(); ++i)
      if (gains[i] >= lim) {
        first = std::min(first, i);
        last = std::max(last, i);
      }
    return std::pair{first, last};
  };

  AngularSpreadDescriptor d;
  d.peak_index = peak;
  const auto [f3, l3] = extent(opt.threshold_db);
  d.spread_count = l3 - f3 + 1;
  const auto [ff, lf] = extent(opt.profile_floor_db);
  d.profile_start = ff;
  d.gain_profile_db.reserve(lf - ff + 1);
  for (std::size_t i = ff; i <= lf; ++i) {
    const double db = gains[i] > 0 ? 10.0 * std::log10(gains[i] / top) : kProfileFloorClampDb;
    d.gain_profile_db.push_back(std::max(db, kProfileFloorClampDb));
  }
  return d;
}

namespace detail {

struct LinearProfile {
  std::size_t start = 0;
  std::vector<double> v;
  double energy = 0.0;
};

inline LinearProfile linearize(const AngularSpreadDescriptor& d, double floor_db) {
  LinearProfile p;
  p.start = d.profile_start;
  p.v.reserve(d.gain_profile_db.size());
  for (double db : d.gain_profile_db) {
    const double x = db >= -floor_db ? std::pow(10.0, db / 10.0) : 0.0;
    p.v.push_back(x);
    p.energy += x * x;
  }
  return p;
}

// Squared L2 distance between normalized linear sweeps; beams outside a
// profile count as zero.
inline double profile_distance(const LinearProfile& a, const LinearProfile& b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.start + a.v.size(), b.start + b.v.size());
  double cross = 0.0;
  for (std::size_t i = lo; i < hi; ++i) cross += a.v[i - a.start] * b.v[i - b.start];
  return std::max(0.0, a.energy + b.energy - 2.0 * cross);
}

inline std::size_t abs_diff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

}  // namespace detail

class AngularSpreadTable {
 public:
  AngularSpreadTable(ArrayGeometry geom, SpreadOptions opt, double min_range, std::size_t dft_size,
                     std::vector<PolarPoint> grid, std::vector<AngularSpreadDescriptor> entries)
      : geom_(geom), opt_(opt), min_range_(min_range), dft_size_(dft_size), grid_(std::move(grid)),
        entries_(std::move(entries)) {
    require(grid_.size() == entries_.size(), "one descriptor per grid point");
    linear_.reserve(entries_.size());
    for (const auto& e : entries_) linear_.push_back(detail::linearize(e, opt_.profile_floor_db));
  }

  const ArrayGeometry& geometry() const noexcept { return geom_; }
  double carrier_freq() const noexcept { return geom_.carrier_freq(); }
  const SpreadOptions& options() const noexcept { return opt_; }
  double min_range() const noexcept { return min_range_; }
  std::size_t dft_size() const noexcept { return dft_size_; }
  std::size_t size() const noexcept { return grid_.size(); }
  const std::vector<PolarPoint>& grid() const noexcept { return grid_; }
  const std::vector<AngularSpreadDescriptor>& entries() const noexcept { return entries_; }

  /// Index of the best-matching grid point.
  std::size_t match(const AngularSpreadDescriptor& meas) const {
    if (grid_.empty()) throw InvalidArgument("spread table is empty");
    const auto m = detail::linearize(meas, opt_.profile_floor_db);
    using Key = std::tuple<double, std::size_t, std::size_t, double, double>;
    Key best{std::numeric_limits<double>::infinity(), 0, 0, 0.0, 0.0};
    std::size_t arg = 0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const Key k{detail::profile_distance(m, linear_[i]), detail::abs_diff(meas.peak_index, entries_[i].peak_index),
                  detail::abs_diff(meas.spread_count, entries_[i].spread_count), grid_[i].range,
                  std::abs(grid_[i].angle)};
      if (k < best) {
        best = k;
        arg = i;
      }
    }
    return arg;
  }

 private:
  ArrayGeometry geom_;
  SpreadOptions opt_;
  double min_range_;
  std::size_t dft_size_;
  std::vector<PolarPoint> grid_;
  std::vector<AngularSpreadDescriptor> entries_;
  std::vector<detail::LinearProfile> linear_;
};

inline PolarPoint coarse_estimate(const AngularSpreadTable& table, const AngularSpreadDescriptor& meas) {
  return table.grid()[table.match(meas)];
}

struct SpreadTableOptions {
  SpreadOptions spread;
  double min_range = 0.0;       // 0 selects 2 * aperture
  std::size_t angle_count = 0;  // 0 selects one angle per DFT beam
  std::size_t threads = 1;
};

/// Grid per angle: beam-depth-spaced polar samples plus one far-field ring at
/// the Rayleigh distance, so plane-wave users have somewhere to land.
inline std::vector<std::vector<double>> spread_table_ranges(const ArrayGeometry& g, const std::vector<double>& angles,
                                                            double min_range, std::size_t threads) {
  std::vector<std::vector<double>> ranges(angles.size());
  const double rd = rayleigh_distance(g);
  parallel_for(angles.size(), threads, [&](std::size_t k) {
    ranges[k] = polar_range_samples(g, angles[k], min_range);
    if (ranges[k].back() < rd) ranges[k].push_back(rd);
  });
  return ranges;
}

inline AngularSpreadTable build_spread_table(const ArrayGeometry& g, const Codebook& dft,
                                             const SpreadTableOptions& opt = {}) {
  require(dft.kind() == CodebookKind::Dft, "spread table needs a DFT codebook");
  require(dft.geometry() == g, "codebook geometry mismatch");
  require(opt.spread.threshold_db > 0, "spread threshold must be positive");
  const double min_range = opt.min_range > 0 ? opt.min_range : 2.0 * g.aperture();
  const std::size_t count = opt.angle_count ? opt.angle_count : dft.size();
  const auto angles = uniform_sin_angles(count);
  const auto ranges = spread_table_ranges(g, angles, min_range, opt.threads);

  std::vector<PolarPoint> grid;
  for (std::size_t k = 0; k < count; ++k)
    for (double r : ranges[k]) grid.push_back({r, angles[k]});
  std::vector<AngularSpreadDescriptor> entries(grid.size());
  parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
    const auto sweep = dft.sweep(nf_steering(g, grid[i]).coeffs());
    entries[i] = measure_spread(sweep, opt.spread);
  });
  return AngularSpreadTable(g, opt.spread, min_range, dft.size(), std::move(grid), std::move(entries));
}

}  // namespace nfisac
