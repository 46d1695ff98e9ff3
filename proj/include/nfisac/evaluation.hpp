#pragma once

// SINR-loss curves, transverse-velocity resolution, average rate per training
// scheme. Complexity bookkeeping lives in complexity.hpp.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <numbers>
#include <vector>

#include "complexity.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "stap.hpp"

namespace nfisac {

/// 10 log10(sigma_t^2 |w^H nu|^2 / (w^H R w)).
inline double sinr_of(const CVector& w, const CVector& nu, const CMatrix& R, double target_power) {
  require(w.size() == nu.size() && R.rows() == nu.size(), "SINR dimensions differ");
  const double den = w.dot(R * w).real();
  if (!(den > 0)) throw NumericalError("interference power must be positive");
  return 10.0 * std::log10(target_power * std::norm(w.dot(nu)) / den);
}

/// Known-covariance optimum 10 log10(sigma_t^2 nu^H R^-1 nu).
inline double optimal_sinr(const CVector& nu, const CMatrix& R, double target_power) {
  Eigen::LLT<CMatrix> llt(R);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  return 10.0 * std::log10(target_power * nu.dot(llt.solve(nu)).real());
}

/// Homogeneous clutter-plus-noise at one cell, in the beamspace of n_c
/// candidate codewords. Static clutter is identical across pulses, so the
/// reduced covariance is sigma^2 I + (1 1^T) kron S.
class SinrModel {
 public:
  SinrModel(ArrayGeometry g, WaveformParams w, PolarPoint cell, ClutterModel clutter, double noise_power,
            std::size_t n_c, std::size_t quadrature = 2048)
      : g_(g), w_(w), cell_(cell), clutter_(clutter), noise_(noise_power),
        T_(candidate_reduction(g, candidate_angles(g, cell.angle, n_c), cell.range)) {
    require_valid(cell);
    require(noise_power > 0, "noise power must be positive");
    require(quadrature >= 2, "need at least two quadrature nodes");
    const auto nc = static_cast<Eigen::Index>(n_c);
    S_ = CMatrix::Zero(nc, nc);
    const double cnr = clutter_.enabled ? std::pow(10.0, clutter_.cnr_db / 10.0) : 0.0;
    const double span = clutter_.sector_hi - clutter_.sector_lo;
    for (std::size_t q = 0; q < quadrature; ++q) {
      const double th = clutter_.sector_lo + span * (double(q) + 0.5) / double(quadrature);
      const CVector b = patch_signature(th);
      S_.noalias() += b * b.adjoint();
    }
    S_ *= noise_ * cnr / double(quadrature);
  }

  std::size_t dimension() const { return w_.n_pulses * T_.beams(); }
  const ReductionMatrix& reduction() const { return T_; }
  double noise_power() const { return noise_; }

  CMatrix covariance() const {
    const auto M = static_cast<Eigen::Index>(w_.n_pulses), nc = static_cast<Eigen::Index>(T_.beams());
    CMatrix R(M * nc, M * nc);
    for (Eigen::Index a = 0; a < M; ++a)
      for (Eigen::Index b = 0; b < M; ++b) R.block(a * nc, b * nc, nc, nc) = S_;
    R.diagonal().array() += noise_;
    return R;
  }

  /// Reduced, unit-norm steering of a radially moving target at the cell.
  CVector steering(double radial_mps) const {
    const auto s = T_.reduce(space_time_steering_nf(g_, w_, cell_, {radial_mps, 0.0}, w_.n_pulses));
    return s.coeffs.normalized();
  }

  /// K independent snapshots (columns) drawn patch by patch, noise added in
  /// beamspace (exact since T has orthonormal columns).
  CMatrix snapshots(std::size_t K, std::uint64_t seed) const {
    const auto M = static_cast<Eigen::Index>(w_.n_pulses), nc = static_cast<Eigen::Index>(T_.beams());
    CMatrix X(M * nc, static_cast<Eigen::Index>(K));
    const double cnr = clutter_.enabled ? std::pow(10.0, clutter_.cnr_db / 10.0) : 0.0;
    const std::size_t P = clutter_.patches_per_bin;
    for (std::size_t k = 0; k < K; ++k) {
      CounterRng rng{seed, k, 7};
      std::uniform_real_distribution<double> ang(clutter_.sector_lo, clutter_.sector_hi);
      NormalDistribution nc_amp(0.0, std::sqrt(noise_ * cnr / double(P) / 2.0));
      NormalDistribution nd(0.0, std::sqrt(noise_ / 2.0));
      CVector u = CVector::Zero(nc);
      if (cnr > 0)
        for (std::size_t p = 0; p < P; ++p) {
          const double th = ang(rng);
          const double re = nc_amp(rng);
          u += cd(re, nc_amp(rng)) * patch_signature(th);
        }
      auto col = X.col(static_cast<Eigen::Index>(k));
      for (Eigen::Index m = 0; m < M; ++m) col.segment(m * nc, nc) = u;
      for (Eigen::Index i = 0; i < col.size(); ++i) {
        const double re = nd(rng);
        col[i] += cd(re, nd(rng));
      }
    }
    return X;
  }

 private:
  // sqrt(N) T^H a(r, theta): one unit-power patch seen in beamspace.
  CVector patch_signature(double th) const {
    const double lim = std::numbers::pi / 2 * (1.0 - 1e-12);
    CVector ph;
    detail::nf_phasors(g_, cell_.range, std::sin(std::clamp(th, -lim, lim)), ph);
    return T_.matrix().adjoint() * ph;
  }

  ArrayGeometry g_;
  WaveformParams w_;
  PolarPoint cell_;
  ClutterModel clutter_;
  double noise_;
  ReductionMatrix T_;
  CMatrix S_;
};

/// n points spanning [-v_max, v_max]. An even n keeps v = 0 off the grid:
/// there the target sits on the clutter ridge, optimal and matched filtering
/// coincide, and finite-K adaptation can only lose.
inline std::vector<double> velocity_grid(double v_max = 10.0, std::size_t n = 42) {
  require(v_max > 0 && n >= 2, "velocity grid needs v_max > 0 and two points");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = -v_max + 2.0 * v_max * double(i) / double(n - 1);
  return v;
}

struct SinrCurve {
  std::vector<double> velocities;  // m/s
  std::vector<double> optimal_db, nf_stap_db, conventional_db;
  std::size_t k_cells = 0;
  std::size_t seeds = 0;
};

/// SINR relative to the noise-only matched output (target power = noise power),
/// i.e. SINR loss. The sample method averages dB over seeds.
inline SinrCurve sinr_loss_curve(const SinrModel& model, const std::vector<double>& velocities, std::size_t K,
                                 const std::vector<std::uint64_t>& seeds, double loading,
                                 std::size_t threads = 1) {
  require(!velocities.empty() && K >= 1 && !seeds.empty(), "SINR curve needs velocities, K and seeds");
  const CMatrix R = model.covariance();
  const double st = model.noise_power();
  SinrCurve c;
  c.velocities = velocities;
  c.k_cells = K;
  c.seeds = seeds.size();
  std::vector<CVector> nus;
  for (double v : velocities) {
    nus.push_back(model.steering(v));
    c.optimal_db.push_back(optimal_sinr(nus.back(), R, st));
    c.conventional_db.push_back(sinr_of(nus.back(), nus.back(), R, st));
  }
  std::vector<std::vector<double>> per_seed(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t s) {
    const CMatrix X = model.snapshots(K, seeds[s]);
    CMatrix Rh = CMatrix::Zero(X.rows(), X.rows());
    Rh.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / double(K));
    Rh.diagonal().array() += loading;
    Eigen::LLT<CMatrix> llt(Rh);
    if (llt.info() != Eigen::Success) throw NumericalError("sample covariance is not positive definite");
    for (std::size_t i = 0; i < velocities.size(); ++i) per_seed[s].push_back(sinr_of(llt.solve(nus[i]), nus[i], R, st));
  });
  // Ordered reduction keeps the mean bit-identical for any thread count.
  c.nf_stap_db.assign(velocities.size(), 0.0);
  for (const auto& row : per_seed)
    for (std::size_t i = 0; i < row.size(); ++i) c.nf_stap_db[i] += row[i] / double(seeds.size());
  return c;
}

struct TransverseOptions {
  double angle = 0.0;           // radians
  double threshold = 0.5;       // correlation that counts as resolved
  double cap_mps = 0.0;         // 0 selects the unambiguous radial speed lambda f_r / 4
  std::size_t scan_points = 400;
};

/// Smallest transverse speed whose NF space-time steering correlates <= 0.5
/// with the static one; +inf past the Rayleigh distance or above the cap.
inline std::vector<double> transverse_resolution(const ArrayGeometry& g, const WaveformParams& w,
                                                 const std::vector<double>& distances,
                                                 const TransverseOptions& opt = {}) {
  const double cap = opt.cap_mps > 0 ? opt.cap_mps : w.wavelength() * w.prf / 4.0;
  const double rd = rayleigh_distance(g);
  const auto M = w.n_pulses;
  std::vector<double> out;
  for (double r : distances) {
    require(r > 0, "distances must be positive");
    if (r >= rd) {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const PolarPoint p{r, opt.angle};
    const auto v0 = space_time_steering_nf(g, w, p, {}, M);
    auto corr = [&](double vt) {
      return std::abs(v0.coeffs.dot(space_time_steering_nf(g, w, p, {0.0, vt}, M).coeffs));
    };
    double lo = 0.0, hi = -1.0;
    for (std::size_t i = 1; i <= opt.scan_points; ++i) {
      const double v = cap * double(i) / double(opt.scan_points);
      if (corr(v) <= opt.threshold) {
        hi = v;
        break;
      }
      lo = v;
    }
    if (hi < 0) {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    while (hi - lo > 1e-6 * hi) {
      const double mid = 0.5 * (lo + hi);
      (corr(mid) <= opt.threshold ? hi : lo) = mid;
    }
    out.push_back(hi);
  }
  return out;
}

struct RateOptions {
  double snr_ref_db = 20.0;
  std::size_t frame_budget = 2048;
  // Six extra beams, all spent on range: the test user sits on a DFT angle,
  // so angle candidates would only repeat the coarse angle.
  std::size_t l_c = 6;
  std::size_t n_c = 1;
  double angle = 0.0;   // test direction; snapped to the nearest DFT beam
  std::size_t users_per_distance = 16;
  double range_jitter = 0.1;  // users spread over r * (1 +- jitter / 2)
  std::size_t threads = 1;
};

struct RateCurve {
  std::vector<double> distances;
  std::vector<double> perfect_csi, proposed_nf_stap, proposed_dft, far_field;  // bps/Hz
  std::vector<double> gain_perfect_db, gain_nf_stap_db, gain_dft_db, gain_far_field_db;
  std::size_t overhead_dft = 0, overhead_nf_stap = 0;
  double test_angle = 0.0;
  double calibration_range = 0.0;
};

/// rate = (1 - overhead / budget) log2(1 + gamma (r_cal / r)^2 G(r)), gamma set so
/// perfect CSI reaches snr_ref at the EBRD midpoint. Averages over users
/// spread around each distance; the sweep is noiseless.
inline RateCurve average_rate_curve(const Codebook& dft, const AngularSpreadTable& table,
                                    const std::vector<double>& distances, const RateOptions& opt = {}) {
  const auto& g = dft.geometry();
  const std::size_t N = g.n_elements();
  require(opt.frame_budget > N + opt.l_c * opt.n_c, "frame budget must exceed the training overhead");
  require(opt.users_per_distance >= 1, "need at least one user per distance");
  const double u = std::sin(opt.angle);
  std::size_t best = 0;
  for (std::size_t k = 0; k < dft.size(); ++k)
    if (std::abs(dft.labels()[k].sin_theta - u) < std::abs(dft.labels()[best].sin_theta - u)) best = k;
  const double theta = dft.labels()[best].angle();

  RateCurve c;
  c.distances = distances;
  c.test_angle = theta;
  c.overhead_dft = N;
  c.overhead_nf_stap = N + opt.l_c * opt.n_c;
  c.calibration_range = 0.5 * ebrd(g, theta);
  const double gamma = std::pow(10.0, opt.snr_ref_db / 10.0) / double(N);
  auto rate = [&](double r, double gain, std::size_t overhead) {
    const double snr = gamma * std::pow(c.calibration_range / r, 2) * gain;
    return (1.0 - double(overhead) / double(opt.frame_budget)) * std::log2(1.0 + snr);
  };
  const double dbn = 10.0 * std::log10(double(N));
  for (double r0 : distances) require(r0 > 0, "distances must be positive");
  const std::size_t D = distances.size();
  for (auto* v : {&c.perfect_csi, &c.proposed_nf_stap, &c.proposed_dft, &c.far_field, &c.gain_perfect_db,
                  &c.gain_nf_stap_db, &c.gain_dft_db, &c.gain_far_field_db})
    v->assign(D, 0.0);
  parallel_for(D, opt.threads, [&](std::size_t di) {
    const double r0 = distances[di];
    double rp = 0, rn = 0, rd = 0, rf = 0, gp = 0, gn = 0, gd = 0, gf = 0;
    const std::size_t U = opt.users_per_distance;
    for (std::size_t i = 0; i < U; ++i) {
      const double off = U > 1 ? opt.range_jitter * ((double(i) + 0.5) / double(U) - 0.5) : 0.0;
      const PolarPoint user{r0 * (1.0 + off), theta};
      const auto a = nf_steering(g, user);
      const auto sweep = dft.sweep(a.coeffs());
      const double g_ff = *std::max_element(sweep.begin(), sweep.end());
      const auto coarse = coarse_estimate(table, measure_spread(sweep, table.options()));
      const double g_dft = array_gain(nf_steering(g, coarse), g, user);
      RefineOptions ro;
      ro.min_range = table.min_range();
      ro.beams_swept = N;
      const auto rep = refine_estimate(g, coarse, opt.l_c, opt.n_c,
                                       [&](const PolarPoint& p) { return array_gain(nf_steering(g, p), g, user); }, ro);
      const double g_nf = array_gain(nf_steering(g, rep.refined), g, user);
      const double r = user.range;
      rp += rate(r, double(N), 0);
      rn += rate(r, g_nf, c.overhead_nf_stap);
      rd += rate(r, g_dft, c.overhead_dft);
      rf += rate(r, g_ff, c.overhead_dft);
      gp += double(N);
      gn += g_nf;
      gd += g_dft;
      gf += g_ff;
    }
    const double inv = 1.0 / double(U);
    c.perfect_csi[di] = rp * inv;
    c.proposed_nf_stap[di] = rn * inv;
    c.proposed_dft[di] = rd * inv;
    c.far_field[di] = rf * inv;
    c.gain_perfect_db[di] = 10.0 * std::log10(gp * inv) - dbn;
    c.gain_nf_stap_db[di] = 10.0 * std::log10(gn * inv) - dbn;
    c.gain_dft_db[di] = 10.0 * std::log10(gd * inv) - dbn;
    c.gain_far_field_db[di] = 10.0 * std::log10(gf * inv) - dbn;
  });
  return c;
}

}  // namespace nfisac
