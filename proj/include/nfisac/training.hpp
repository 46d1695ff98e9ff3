#pragma once

// Beam training: noisy DFT sweep -> spread lookup -> polar refinement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "spread.hpp"

namespace nfisac {

struct TrainingReport {
  PolarPoint coarse;
  PolarPoint refined;
  std::size_t beams_swept = 0;
  std::size_t refinement_beams = 0;
  std::vector<double> candidate_angles;  // radians, ascending
  std::vector<double> candidate_ranges;  // meters, ascending
};

using GainOracle = std::function<double(const PolarPoint&)>;

struct RefineOptions {
  double min_range = 0.0;  // 0 selects 2 * aperture
  std::size_t beams_swept = 0;
};

/// n_c angles cell-centered in sin(theta) across +-1 DFT beam spacing (2/N).
inline std::vector<double> candidate_angles(const ArrayGeometry& g, double coarse_angle, std::size_t n_c) {
  require(n_c >= 1, "n_c must be positive");
  const double u0 = std::sin(coarse_angle);
  const double half = 2.0 / static_cast<double>(g.n_elements());
  const double lim = 1.0 - 1e-9;
  std::vector<double> out(n_c);
  for (std::size_t i = 0; i < n_c; ++i) {
    const double u = u0 + half * (-1.0 + (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n_c));
    out[i] = std::asin(std::clamp(u, -lim, lim));
  }
  return out;
}

/// l_c ranges cell-centered in 1/r across the coarse point's beam-depth.
/// The window is clipped to (min_range, infinity), not to the EBRD: a user on
/// the far-field ring must keep nearly planar candidates.
inline std::vector<double> candidate_ranges(const ArrayGeometry& g, const PolarPoint& coarse, std::size_t l_c,
                                            double min_range) {
  require(l_c >= 1, "l_c must be positive");
  const auto bd = beam_depth_3db(g, coarse);
  const double x0 = 1.0 / coarse.range;
  const double half = 0.5 * (1.0 / bd.near_edge - (bd.far_edge ? 1.0 / *bd.far_edge : 0.0));
  const double x_min = 1e-3 / rayleigh_distance(g);
  const double x_max = 1.0 / min_range;
  double lo = std::max(x0 - half, x_min);
  double hi = std::min(x0 + half, x_max);
  if (lo >= hi) lo = hi = std::clamp(x0, x_min, x_max);
  std::vector<double> out(l_c);
  for (std::size_t i = 0; i < l_c; ++i) {
    const double x = lo + (hi - lo) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(l_c));
    out[i] = 1.0 / x;
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline TrainingReport refine_estimate(const ArrayGeometry& g, const PolarPoint& coarse, std::size_t l_c,
                                      std::size_t n_c, const GainOracle& oracle, const RefineOptions& opt = {}) {
  require_valid(coarse);
  require(static_cast<bool>(oracle), "gain oracle required");
  const double min_range = opt.min_range > 0 ? opt.min_range : 2.0 * g.aperture();
  TrainingReport rep;
  rep.coarse = coarse;
  rep.beams_swept = opt.beams_swept;
  rep.refinement_beams = l_c * n_c;
  rep.candidate_angles = candidate_angles(g, coarse.angle, n_c);
  rep.candidate_ranges = candidate_ranges(g, coarse, l_c, min_range);
  double best = -std::numeric_limits<double>::infinity();
  for (double r : rep.candidate_ranges)
    for (double th : rep.candidate_angles) {
      const double v = oracle({r, th});
      if (v > best) {
        best = v;
        rep.refined = {r, th};
      }
    }
  return rep;
}

/// Complex-Gaussian measurement noise on beam powers. sigma2 is absolute.
class SweepNoise {
 public:
  SweepNoise(double sigma2, std::uint64_t seed) : sigma2_(sigma2), rng_(seed) {}
  static SweepNoise none() { return SweepNoise(0.0, 0); }

  double measure(cd amplitude) {
    if (sigma2_ <= 0) return std::norm(amplitude);
    std::normal_distribution<double> nd(0.0, std::sqrt(sigma2_ / 2.0));
    const double re = nd(rng_);
    const double im = nd(rng_);
    return std::norm(amplitude + cd(re, im));
  }
  double sigma2() const noexcept { return sigma2_; }

 private:
  double sigma2_;
  std::mt19937_64 rng_;
};

/// Beam powers seen by a user at `user`, with noise set `snr_db` below the
/// strongest noiseless beam. Infinite snr gives the noiseless sweep.
inline std::vector<double> simulate_sweep(const Codebook& cb, const PolarPoint& user, double snr_db, std::uint64_t seed,
                                          double* sigma2_out = nullptr) {
  const auto a = nf_steering(cb.geometry(), user);
  const CVector y = cb.matrix().adjoint() * a.coeffs() * std::sqrt(static_cast<double>(cb.geometry().n_elements()));
  double peak = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) peak = std::max(peak, std::norm(y[i]));
  const double sigma2 = std::isfinite(snr_db) ? peak * std::pow(10.0, -snr_db / 10.0) : 0.0;
  if (sigma2_out) *sigma2_out = sigma2;
  SweepNoise noise(sigma2, seed);
  std::vector<double> g(static_cast<std::size_t>(y.size()));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = noise.measure(y[static_cast<Eigen::Index>(i)]);
  return g;
}

struct TrainingOptions {
  std::size_t l_c = 8;
  std::size_t n_c = 8;
  double sweep_snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;
  double min_range = 0.0;
};

/// Full coarse-then-refine pass for one user. The refinement beams see the
/// same absolute noise level as the sweep.
inline TrainingReport run_training(const Codebook& dft, const AngularSpreadTable& table, const PolarPoint& user,
                                   const TrainingOptions& opt) {
  const auto& g = dft.geometry();
  double sigma2 = 0.0;
  const auto sweep = simulate_sweep(dft, user, opt.sweep_snr_db, opt.seed, &sigma2);
  const auto meas = measure_spread(sweep, table.options());
  const auto coarse = coarse_estimate(table, meas);
  const auto a_user = nf_steering(g, user);
  SweepNoise noise(sigma2, opt.seed ^ 0x9e3779b97f4a7c15ULL);
  const double sqrt_n = std::sqrt(static_cast<double>(g.n_elements()));
  GainOracle oracle = [&](const PolarPoint& p) {
    return noise.measure(sqrt_n * nf_steering(g, p).coeffs().dot(a_user.coeffs()));
  };
  RefineOptions ro;
  ro.min_range = opt.min_range > 0 ? opt.min_range : table.min_range();
  ro.beams_swept = dft.size();
  return refine_estimate(g, coarse, opt.l_c, opt.n_c, oracle, ro);
}

}  // namespace nfisac
