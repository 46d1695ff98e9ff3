#pragma once

// Space-time steering, beamspace reduction, training covariance, weights and
// the candidate-window scan.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>
#include <vector>

#include "complexity.hpp"
#include "scene.hpp"
#include "training.hpp"

namespace nfisac {

/// Pulse-major layout: coeffs[m * spatial_dim + n].
struct SpaceTimeSteering {
  CVector coeffs;
  std::size_t pulses = 0;
  std::size_t spatial_dim = 0;
};

namespace detail {

// a_n exp(j 2 pi f_n m), built with a per-element phasor recurrence.
inline void space_time_block(const CVector& a, const double* fbar, std::size_t M, cd* out) {
  const auto N = static_cast<std::size_t>(a.size());
  for (std::size_t n = 0; n < N; ++n) {
    const cd step = std::polar(1.0, 2.0 * std::numbers::pi * fbar[n]);
    cd z = a[static_cast<Eigen::Index>(n)];
    for (std::size_t m = 0; m < M; ++m) {
      out[m * N + n] = z;
      z *= step;
    }
  }
}

inline SpaceTimeSteering normalized(CVector v, std::size_t M, std::size_t dim) {
  const double nrm = v.norm();
  if (!(nrm > 0)) throw NumericalError("space-time steering vanished");
  v /= nrm;
  return {std::move(v), M, dim};
}

}  // namespace detail

inline SpaceTimeSteering space_time_steering_nf(const ArrayGeometry& g, const WaveformParams& w, const PolarPoint& p,
                                                const VelocityVector& vel, std::size_t M) {
  require(M >= 1, "need at least one pulse");
  const auto fbar = per_element_doppler(g, {p, vel, {1.0, 0.0}}, w.prf);
  for (double f : fbar)
    if (std::abs(f) >= 0.5) throw InvalidArgument("per-element Doppler aliases (|f| >= 0.5)");
  const auto a = nf_steering(g, p);
  const std::size_t N = g.n_elements();
  CVector v(static_cast<Eigen::Index>(M * N));
  detail::space_time_block(a.coeffs(), fbar.data(), M, v.data());
  return detail::normalized(std::move(v), M, N);
}

inline SpaceTimeSteering space_time_steering_ff(const ArrayGeometry& g, const WaveformParams&, double angle,
                                                double omega, std::size_t M) {
  require(M >= 1, "need at least one pulse");
  require(std::abs(omega) < 0.5, "normalized Doppler must satisfy |omega| < 0.5");
  const auto a = ff_steering(g, angle);
  const std::size_t N = g.n_elements();
  const double bm = 1.0 / std::sqrt(static_cast<double>(M));
  CVector v(static_cast<Eigen::Index>(M * N));
  for (std::size_t m = 0; m < M; ++m) {
    const cd b = std::polar(bm, 2.0 * std::numbers::pi * omega * double(m));
    v.segment(static_cast<Eigen::Index>(m * N), static_cast<Eigen::Index>(N)) = b * a.coeffs();
  }
  return {std::move(v), M, N};
}

/// N x n_c beamspace projection with orthonormal columns.
class ReductionMatrix {
 public:
  static ReductionMatrix from_codewords(const CMatrix& cols) {
    require(cols.cols() >= 1 && cols.rows() >= cols.cols(), "reduction needs 1 <= n_c <= N columns");
    Eigen::HouseholderQR<CMatrix> qr(cols);
    const auto& r = qr.matrixQR();
    double top = 0.0;
    for (Eigen::Index i = 0; i < cols.cols(); ++i) top = std::max(top, std::abs(r(i, i)));
    for (Eigen::Index i = 0; i < cols.cols(); ++i)
      if (!(std::abs(r(i, i)) > 1e-14 * top)) throw NumericalError("reduction codewords are linearly dependent");
    CMatrix q = qr.householderQ() * CMatrix::Identity(cols.rows(), cols.cols());
    return ReductionMatrix(std::move(q));
  }
  static ReductionMatrix identity(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return ReductionMatrix(CMatrix::Identity(k, k));
  }

  const CMatrix& matrix() const noexcept { return t_; }
  const CMatrix& conjugate() const noexcept { return tc_; }
  std::size_t elements() const noexcept { return static_cast<std::size_t>(t_.rows()); }
  std::size_t beams() const noexcept { return static_cast<std::size_t>(t_.cols()); }

  /// Per-pulse projection T^H x_m of an M x N slab.
  Slab reduce(const Slab& x) const {
    require(static_cast<std::size_t>(x.cols()) == elements(), "slab width must equal element count");
    return x * tc_;
  }
  SpaceTimeSteering reduce(const SpaceTimeSteering& s) const {
    require(s.spatial_dim == elements(), "steering spatial size must equal element count");
    const auto M = static_cast<Eigen::Index>(s.pulses), N = static_cast<Eigen::Index>(s.spatial_dim);
    const Slab y = Eigen::Map<const Slab>(s.coeffs.data(), M, N) * tc_;
    return {Eigen::Map<const CVector>(y.data(), y.size()), s.pulses, beams()};
  }

 private:
  explicit ReductionMatrix(CMatrix t) : t_(std::move(t)), tc_(t_.conjugate()) {}
  CMatrix t_;
  CMatrix tc_;
};

/// Pulse-major snapshot of bin l, optionally projected pulse by pulse.
/// `out` must already have length M * (n_c or N).
template <SlabSource S>
void extract_snapshot_into(const S& src, std::size_t l, const ReductionMatrix* reduction,
                           Eigen::Ref<CVector> out) {
  require(l < src.bins(), "range bin out of range");
  // Reused per thread: slabs are large enough that fresh allocations cost page faults.
  thread_local Slab x, y;
  src.slab(l, x);
  if (reduction) {
    require(static_cast<std::size_t>(x.cols()) == reduction->elements(), "slab width must equal element count");
    y.noalias() = x * reduction->conjugate();
    out = Eigen::Map<const CVector>(y.data(), y.size());
  } else {
    out = Eigen::Map<const CVector>(x.data(), x.size());
  }
}

template <SlabSource S>
CVector extract_snapshot(const S& src, std::size_t l, const ReductionMatrix* reduction = nullptr) {
  CVector v(static_cast<Eigen::Index>(src.pulses() * (reduction ? reduction->beams() : src.elements())));
  extract_snapshot_into(src, l, reduction, v);
  return v;
}

struct TrainingWindow {
  std::vector<std::size_t> bins;
  bool shifted = false;
};

/// K bins split evenly around the CUT beyond G guards; pushed inward at the edges.
inline TrainingWindow training_window(std::size_t L, std::size_t l, std::size_t K, std::size_t G) {
  require(K >= 2 && K % 2 == 0, "training cell count must be even and positive");
  require(l < L, "cell under test out of range");
  const std::size_t avail_left = l > G ? l - G : 0;
  const std::size_t avail_right = L > l + G + 1 ? L - l - G - 1 : 0;
  if (avail_left + avail_right < K) throw InvalidArgument("not enough range bins for the training window");
  std::size_t left = K / 2, right = K / 2;
  TrainingWindow tw;
  if (left > avail_left) {
    right += left - avail_left;
    left = avail_left;
    tw.shifted = true;
  }
  if (right > avail_right) {
    left += right - avail_right;
    right = avail_right;
    tw.shifted = true;
  }
  tw.bins.reserve(K);
  for (std::size_t b = l - G - left; b < l - G; ++b) tw.bins.push_back(b);
  for (std::size_t b = l + G + 1; b <= l + G + right; ++b) tw.bins.push_back(b);
  return tw;
}

struct CovarianceEstimate {
  CMatrix matrix;
  double loading = 0.0;
  std::size_t k_cells = 0;
  bool window_shifted = false;
  bool rank_deficient = false;  // K below the dimension; loading keeps R invertible
};

namespace detail {

template <SlabSource S>
CMatrix collect_snapshots(const S& src, const std::vector<std::size_t>& bins, const ReductionMatrix* red,
                          std::size_t threads) {
  const std::size_t dim = src.pulses() * (red ? red->beams() : src.elements());
  CMatrix X(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(bins.size()));
  parallel_for(bins.size(), threads, [&](std::size_t i) {
    extract_snapshot_into(src, bins[i], red, X.col(static_cast<Eigen::Index>(i)));
  });
  return X;
}

inline void fill_upper(CMatrix& R) { R.triangularView<Eigen::StrictlyUpper>() = R.adjoint(); }

}  // namespace detail

template <SlabSource S>
CovarianceEstimate estimate_covariance(const S& src, std::size_t l, std::size_t k_cells, std::size_t guard,
                                       const ReductionMatrix* reduction, double loading, std::size_t threads = 1) {
  require(loading >= 0, "diagonal loading must be >= 0");
  const auto tw = training_window(src.bins(), l, k_cells, guard);
  const CMatrix X = detail::collect_snapshots(src, tw.bins, reduction, threads);
  CovarianceEstimate est;
  est.matrix = CMatrix::Zero(X.rows(), X.rows());
  est.matrix.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / double(k_cells));
  est.matrix.diagonal().array() += loading;
  detail::fill_upper(est.matrix);
  est.loading = loading;
  est.k_cells = k_cells;
  est.window_shifted = tw.shifted;
  est.rank_deficient = k_cells < static_cast<std::size_t>(X.rows());
  return est;
}

enum class WeightNormalization {
  Mvdr,           // w^H nu = 1
  UnitNoiseGain,  // w^H w scaled so white noise passes at unit power (AMF)
};

inline CVector stap_weights(const CMatrix& R, const CVector& nu, WeightNormalization norm = WeightNormalization::Mvdr) {
  require(R.rows() == R.cols() && R.rows() == nu.size(), "covariance and steering dimensions differ");
  Eigen::LLT<CMatrix> llt(R);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not numerically positive definite");
  const CVector u = llt.solve(nu);
  const double q = nu.dot(u).real();
  if (!(q > 0) || !std::isfinite(q) || !u.allFinite()) throw NumericalError("covariance solve failed");
  return norm == WeightNormalization::Mvdr ? CVector(u / q) : CVector(u / std::sqrt(q));
}

inline CVector stap_weights(const CovarianceEstimate& R, const SpaceTimeSteering& nu,
                            WeightNormalization norm = WeightNormalization::Mvdr) {
  return stap_weights(R.matrix, nu.coeffs, norm);
}

inline double stap_statistic(const CVector& w, const CVector& x) {
  require(w.size() == x.size(), "weight and snapshot dimensions differ");
  return std::norm(w.dot(x));
}

/// Statistic over (range bin, Doppler, angle); values[(i * D + j) * A + k].
struct DetectionMap {
  std::vector<std::size_t> range_bins;
  std::vector<double> ranges_m;
  std::vector<double> doppler;  // cycles/pulse
  std::vector<double> velocities_mps;
  std::vector<double> angles;  // radians
  std::vector<double> values;  // linear, noise-normalized
  double velocity_per_cycle = 0.0;  // m/s per cycle/pulse

  std::size_t n_range() const { return range_bins.size(); }
  std::size_t n_doppler() const { return doppler.size(); }
  std::size_t n_angle() const { return angles.size(); }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * n_doppler() + j) * n_angle() + k; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[index(i, j, k)]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) { return values[index(i, j, k)]; }
};

inline std::vector<double> default_doppler_grid(std::size_t M) {
  std::vector<double> w(M);
  for (std::size_t k = 0; k < M; ++k) w[k] = -0.5 + double(k) / double(M);
  return w;
}

struct ScanOptions {
  std::size_t k_cells = 4096;
  std::size_t guard = 2;
  double loading = 1.0;  // absolute, same units as the noise power
  std::size_t threads = 1;
  std::size_t doppler_chunk = 16;
};

struct ScanBinInfo {
  std::size_t bin = 0;
  bool window_shifted = false;
  bool rank_deficient = false;
};

struct ScanResult {
  DetectionMap map;
  ComplexityReport ops;
  std::vector<ScanBinInfo> bins;
};

/// Adaptive scan over explicit cells. The statistic is the unit-noise-gain
/// (AMF) output |nu^H R^-1 x|^2 / (nu^H R^-1 nu): white noise maps to mean 1.
/// Training Gram matrices share one pass over the union of windows.
template <SlabSource S>
ScanResult scan_cells(const S& src, const ArrayGeometry& g, const WaveformParams& w,
                      const std::vector<std::size_t>& bins, const std::vector<double>& angles,
                      const std::vector<double>& doppler, const ReductionMatrix* red, const ScanOptions& opt) {
  require(!bins.empty() && !angles.empty() && !doppler.empty(), "scan needs bins, angles and Doppler cells");
  require(src.elements() == g.n_elements() && src.pulses() == w.n_pulses, "source dimensions disagree");
  require(!red || red->elements() == g.n_elements(), "reduction width must equal element count");
  require(opt.loading >= 0, "diagonal loading must be >= 0");
  const std::size_t M = w.n_pulses, N = g.n_elements();
  const std::size_t beams = red ? red->beams() : N;
  const auto dim = static_cast<Eigen::Index>(M * beams);
  const std::size_t D = doppler.size(), A = angles.size();

  std::vector<TrainingWindow> windows;
  std::set<std::size_t> train_union;
  for (auto l : bins) {
    windows.push_back(training_window(src.bins(), l, opt.k_cells, opt.guard));
    train_union.insert(windows.back().bins.begin(), windows.back().bins.end());
  }
  std::set<std::size_t> all(train_union);
  all.insert(bins.begin(), bins.end());
  const std::vector<std::size_t> all_bins(all.begin(), all.end());
  std::unordered_map<std::size_t, Eigen::Index> col;
  for (std::size_t i = 0; i < all_bins.size(); ++i) col[all_bins[i]] = static_cast<Eigen::Index>(i);

  const CMatrix X = detail::collect_snapshots(src, all_bins, red, opt.threads);
  CMatrix Xt(dim, static_cast<Eigen::Index>(train_union.size()));
  {
    Eigen::Index j = 0;
    for (auto b : train_union) Xt.col(j++) = X.col(col.at(b));
  }
  CMatrix gram = CMatrix::Zero(dim, dim);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(Xt);

  ScanResult res;
  auto& map = res.map;
  map.range_bins = bins;
  map.doppler = doppler;
  map.angles = angles;
  for (auto l : bins) map.ranges_m.push_back(w.bin_range(l));
  map.velocity_per_cycle = w.velocity_per_cycle();
  for (double om : doppler) map.velocities_mps.push_back(om * w.velocity_per_cycle());
  map.values.assign(bins.size() * D * A, 0.0);
  res.ops = complexity_report(w.range_bins(), M, N, bins.size(), beams);
  res.bins.resize(bins.size());

  parallel_for(bins.size(), opt.threads, [&](std::size_t i) {
    const std::size_t l = bins[i];
    const auto& tw = windows[i];
    std::set<std::size_t> keep(tw.bins.begin(), tw.bins.end());
    std::vector<Eigen::Index> drop;
    for (auto b : train_union)
      if (!keep.count(b)) drop.push_back(col.at(b));
    CMatrix R = gram;
    if (!drop.empty()) {
      CMatrix Xd(dim, static_cast<Eigen::Index>(drop.size()));
      for (std::size_t j = 0; j < drop.size(); ++j) Xd.col(static_cast<Eigen::Index>(j)) = X.col(drop[j]);
      R.selfadjointView<Eigen::Lower>().rankUpdate(Xd, -1.0);
    }
    R /= double(opt.k_cells);
    R.diagonal().array() += opt.loading;
    Eigen::LLT<CMatrix> llt(R);
    if (llt.info() != Eigen::Success) throw NumericalError("training covariance is not positive definite");
    const auto L = llt.matrixL();
    const CVector z = L.solve(X.col(col.at(l)));
    res.bins[i] = {l, tw.shifted, opt.k_cells < static_cast<std::size_t>(dim)};

    const double r = std::max(w.bin_range(l), 0.5 * w.bin_width());
    const std::size_t chunk = std::max<std::size_t>(1, opt.doppler_chunk);
    std::vector<double> cosn(N), fbar(N);
    Slab E(static_cast<Eigen::Index>(chunk * M), static_cast<Eigen::Index>(N)), Er;
    CMatrix V;
    for (std::size_t k = 0; k < A; ++k) {
      const PolarPoint p{r, angles[k]};
      const auto a = nf_steering(g, p);
      const double s = std::sin(p.angle);
      for (std::size_t n = 0; n < N; ++n) {
        const double dn = g.element_position(n);
        cosn[n] = (r - dn * s) / std::sqrt(r * r + dn * dn - 2.0 * r * dn * s);
      }
      for (std::size_t j0 = 0; j0 < D; j0 += chunk) {
        const std::size_t nj = std::min(chunk, D - j0);
        for (std::size_t j = 0; j < nj; ++j) {
          for (std::size_t n = 0; n < N; ++n) fbar[n] = doppler[j0 + j] * cosn[n];
          detail::space_time_block(a.coeffs(), fbar.data(), M, E.data() + j * M * N);
        }
        const auto rows = static_cast<Eigen::Index>(nj * M);
        if (red) Er.noalias() = E.topRows(rows) * red->conjugate();
        const cd* B = red ? Er.data() : E.data();
        V = Eigen::Map<const CMatrix>(B, dim, static_cast<Eigen::Index>(nj));
        L.solveInPlace(V);
        for (std::size_t j = 0; j < nj; ++j) {
          const auto y = V.col(static_cast<Eigen::Index>(j));
          const double den = y.squaredNorm();
          map.at(i, j0 + j, k) = den > 0 ? std::norm(y.dot(z)) / den : 0.0;
        }
      }
    }
  });
  return res;
}

/// Beamspace from the candidate-angle codewords focused at `range`.
inline ReductionMatrix candidate_reduction(const ArrayGeometry& g, const std::vector<double>& angles, double range) {
  CMatrix cols(static_cast<Eigen::Index>(g.n_elements()), static_cast<Eigen::Index>(angles.size()));
  for (std::size_t k = 0; k < angles.size(); ++k)
    cols.col(static_cast<Eigen::Index>(k)) = nf_steering(g, {range, angles[k]}).coeffs();
  return ReductionMatrix::from_codewords(cols);
}

/// l_c contiguous bins centered on the bin of `range`, kept inside the axis.
inline std::vector<std::size_t> sensing_bins(const WaveformParams& w, double range, std::size_t l_c) {
  require(l_c >= 1 && l_c <= w.range_bins(), "l_c must fit the range axis");
  const std::size_t c = range_bin_of(w, range);
  std::size_t start = c >= l_c / 2 ? c - l_c / 2 : 0;
  start = std::min(start, w.range_bins() - l_c);
  std::vector<std::size_t> out(l_c);
  for (std::size_t i = 0; i < l_c; ++i) out[i] = start + i;
  return out;
}

template <SlabSource S>
ScanResult reduced_scan(const S& src, const ArrayGeometry& g, const WaveformParams& w, const TrainingReport& report,
                        const std::vector<double>& doppler, const ScanOptions& opt) {
  require(!report.candidate_angles.empty() && !report.candidate_ranges.empty(), "training report has no candidates");
  const auto T = candidate_reduction(g, report.candidate_angles, report.refined.range);
  const auto bins = sensing_bins(w, report.refined.range, report.candidate_ranges.size());
  return scan_cells(src, g, w, bins, report.candidate_angles, doppler, &T, opt);
}

}  // namespace nfisac
