#pragma once

// Range-compressed L x M x N cube synthesis: point targets with per-element
// Doppler, static clutter patches and white noise.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "nearfield.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace nfisac {

struct WaveformParams {
  double prf = 10e3;            // f_r, Hz
  std::size_t n_pulses = 128;   // M
  double sample_rate = 400e6;   // f_s, Hz
  double bandwidth = 400e6;     // B, Hz
  double carrier_freq = 28e9;   // Hz

  std::size_t range_bins() const { return static_cast<std::size_t>(std::llround(sample_rate / prf)); }
  double bin_width() const { return kSpeedOfLight / (2.0 * sample_rate); }
  double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth); }
  double doppler_resolution() const { return prf / static_cast<double>(n_pulses); }
  double max_range() const { return bin_width() * static_cast<double>(range_bins()); }
  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  /// Radial speed of one normalized Doppler cycle per pulse.
  double velocity_per_cycle() const { return wavelength() * prf / 2.0; }
  double bin_range(std::size_t l) const { return static_cast<double>(l) * bin_width(); }

  void validate() const {
    require(prf > 0 && sample_rate > 0 && bandwidth > 0 && carrier_freq > 0, "waveform rates must be positive");
    require(n_pulses >= 1, "need at least one pulse");
    require(range_bins() >= 1, "sample_rate / prf must round to at least one range bin");
  }
  friend bool operator==(const WaveformParams&, const WaveformParams&) = default;
};

struct VelocityVector {
  double radial = 0.0;      // m/s, positive away from the array
  double transverse = 0.0;  // m/s, positive toward increasing angle
};

struct Target {
  PolarPoint position;
  VelocityVector velocity;
  cd amplitude{1.0, 0.0};
};

struct ClutterModel {
  std::size_t patches_per_bin = 181;
  double cnr_db = 30.0;
  double sector_lo = -std::numbers::pi / 2;
  double sector_hi = std::numbers::pi / 2;
  double doppler_jitter = 0.0;  // std of per-patch normalized Doppler; 0 = ideal static
  bool enabled = true;
};

inline std::size_t range_bin_of(const WaveformParams& w, double r) {
  if (!(r > 0) || !(r < w.max_range())) throw InvalidArgument("range outside the unambiguous interval");
  const auto l = std::llround(2.0 * r * w.sample_rate / kSpeedOfLight);
  return static_cast<std::size_t>(std::clamp<long long>(l, 0, static_cast<long long>(w.range_bins()) - 1));
}

/// Normalized two-way Doppler (cycles/pulse) seen by each element: the target
/// velocity projected on the element-to-target line of sight.
inline std::vector<double> per_element_doppler(const ArrayGeometry& g, const Target& t, double prf) {
  require_valid(t.position);
  require(prf > 0, "prf must be positive");
  const double r = t.position.range, s = std::sin(t.position.angle), c = std::cos(t.position.angle);
  const double lam = g.wavelength();
  std::vector<double> f(g.n_elements());
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double dn = g.element_position(n);
    const double rn = std::sqrt(r * r + dn * dn - 2.0 * r * dn * s);
    if (!(rn > 1e-12 * std::max(r, 1.0))) throw InvalidArgument("target coincides with an array element");
    const double v = (t.velocity.radial * (r - dn * s) - t.velocity.transverse * dn * c) / rn;
    f[n] = 2.0 * v / (lam * prf);
  }
  return f;
}

/// Row-major M x N slab: row m is the pulse-m array snapshot, so the flat
/// buffer is already in pulse-major layout.
using Slab = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class S>
concept SlabSource = requires(const S& s, std::size_t l, Slab& out) {
  { s.bins() } -> std::convertible_to<std::size_t>;
  { s.pulses() } -> std::convertible_to<std::size_t>;
  { s.elements() } -> std::convertible_to<std::size_t>;
  s.slab(l, out);
};

struct SynthesisOptions {
  bool allow_alias = false;
  std::size_t memory_cap_bytes = std::size_t{2} << 30;
};

class SceneSynthesizer {
 public:
  SceneSynthesizer(ArrayGeometry g, WaveformParams w, std::vector<Target> targets, ClutterModel clutter,
                   double noise_power, std::uint64_t seed, SynthesisOptions opt = {})
      : g_(g), w_(w), clutter_(clutter), noise_power_(noise_power), seed_(seed), opt_(opt) {
    w_.validate();
    require(noise_power >= 0 && std::isfinite(noise_power), "noise power must be finite and >= 0");
    require(clutter.patches_per_bin >= 1, "clutter needs at least one patch per bin");
    require(clutter.sector_lo < clutter.sector_hi && clutter.sector_lo >= -std::numbers::pi / 2 &&
                clutter.sector_hi <= std::numbers::pi / 2,
            "clutter sector must be an increasing interval inside [-pi/2, pi/2]");
    require(std::abs(g.carrier_freq() - w.carrier_freq) <= 1e-9 * w.carrier_freq, "geometry and waveform carriers differ");
    const double cpi = static_cast<double>(w_.n_pulses) / w_.prf;
    for (auto& t : targets) {
      require_valid(t.position);
      require(std::hypot(t.velocity.radial, t.velocity.transverse) < kSpeedOfLight, "target faster than light");
      const std::size_t l = range_bin_of(w_, t.position.range);
      const double drift = std::hypot(t.velocity.radial, t.velocity.transverse) * cpi;
      if (drift >= 0.5 * w_.bin_width())
        throw InvalidArgument("target migrates across range bins within the CPI; model invalid");
      Prepared p;
      p.fbar = per_element_doppler(g_, t, w_.prf);
      if (!opt_.allow_alias)
        for (double f : p.fbar)
          if (std::abs(f) >= 0.5) throw InvalidArgument("target Doppler aliases (|f| >= 0.5 cycles/pulse)");
      p.spatial = nf_steering(g_, t.position).coeffs() * (t.amplitude * std::sqrt(double(g_.n_elements())));
      by_bin_[l].push_back(std::move(p));
    }
  }

  std::size_t bins() const { return w_.range_bins(); }
  std::size_t pulses() const { return w_.n_pulses; }
  std::size_t elements() const { return g_.n_elements(); }
  const ArrayGeometry& geometry() const { return g_; }
  const WaveformParams& params() const { return w_; }
  double noise_power() const { return noise_power_; }
  std::uint64_t seed() const { return seed_; }
  const SynthesisOptions& options() const { return opt_; }

  void slab(std::size_t l, Slab& out) const {
    require(l < bins(), "range bin out of range");
    const auto M = static_cast<Eigen::Index>(pulses()), N = static_cast<Eigen::Index>(elements());
    out.resize(M, N);
    out.setZero();
    add_noise(l, out);
    if (clutter_.enabled) add_clutter(l, out);
    if (auto it = by_bin_.find(l); it != by_bin_.end())
      for (const auto& p : it->second) add_target(p, out);
  }

 private:
  struct Prepared {
    std::vector<double> fbar;
    CVector spatial;
  };

  CounterRng stream(std::size_t l, std::uint64_t tag) const { return CounterRng{seed_, l, tag}; }

  void add_noise(std::size_t l, Slab& out) const {
    if (noise_power_ <= 0) return;
    auto rng = stream(l, 1);
    NormalDistribution nd(0.0, std::sqrt(noise_power_ / 2.0));
    cd* p = out.data();
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      const double re = nd(rng);
      p[i] += cd(re, nd(rng));
    }
  }

  void add_clutter(std::size_t l, Slab& out) const {
    const double cnr = std::pow(10.0, clutter_.cnr_db / 10.0);
    if (noise_power_ <= 0 || cnr <= 0) return;
    auto rng = stream(l, 2);
    const std::size_t P = clutter_.patches_per_bin;
    NormalDistribution nd(0.0, std::sqrt(noise_power_ * cnr / static_cast<double>(P) / 2.0));
    NormalDistribution jit(0.0, 1.0);
    // Bin 0 sits on the array; keep the patch geometry well defined there.
    const double r = std::max(w_.bin_range(l), 0.5 * w_.bin_width());
    const auto N = static_cast<Eigen::Index>(elements());
    const double lim = std::numbers::pi / 2 * (1.0 - 1e-12);
    CVector sum = CVector::Zero(N);
    CVector phasors(N);
    // Patches sit on a fixed midpoint grid over the sector, the same layout
    // the analytic clutter covariance integrates over.
    const double span = clutter_.sector_hi - clutter_.sector_lo;
    for (std::size_t p = 0; p < P; ++p) {
      const double th = std::clamp(clutter_.sector_lo + span * (double(p) + 0.5) / double(P), -lim, lim);
      const double re = nd(rng);
      const cd c(re, nd(rng));
      const double jitter = clutter_.doppler_jitter > 0 ? clutter_.doppler_jitter * jit(rng) : 0.0;
      detail::nf_phasors(g_, r, std::sin(th), phasors);
      const CVector a = phasors * c;
      if (jitter == 0.0) {
        sum += a;
      } else {
        for (Eigen::Index m = 0; m < out.rows(); ++m)
          out.row(m) += a.transpose() * std::polar(1.0, 2.0 * std::numbers::pi * jitter * double(m));
      }
    }
    out.rowwise() += sum.transpose();
  }

  void add_target(const Prepared& p, Slab& out) const {
    const auto N = static_cast<Eigen::Index>(elements());
    for (Eigen::Index n = 0; n < N; ++n) {
      const double w = 2.0 * std::numbers::pi * p.fbar[static_cast<std::size_t>(n)];
      for (Eigen::Index m = 0; m < out.rows(); ++m) out(m, n) += p.spatial[n] * std::polar(1.0, w * double(m));
    }
  }

  ArrayGeometry g_;
  WaveformParams w_;
  ClutterModel clutter_;
  double noise_power_;
  std::uint64_t seed_;
  SynthesisOptions opt_;
  std::map<std::size_t, std::vector<Prepared>> by_bin_;
};

/// Materialized cube, possibly a contiguous window [first_bin, first_bin + count).
class RadarCube {
 public:
  RadarCube(WaveformParams w, std::size_t n_elements, double noise_power, std::size_t first_bin, std::size_t count)
      : w_(w), n_(n_elements), noise_power_(noise_power), first_(first_bin), count_(count),
        data_(count * w.n_pulses * n_elements) {
    require(first_bin + count <= w.range_bins(), "cube window exceeds the range axis");
  }

  std::size_t bins() const { return w_.range_bins(); }
  std::size_t pulses() const { return w_.n_pulses; }
  std::size_t elements() const { return n_; }
  std::size_t first_bin() const { return first_; }
  std::size_t stored_bins() const { return count_; }
  const WaveformParams& params() const { return w_; }
  double noise_power() const { return noise_power_; }
  std::vector<cd>& data() { return data_; }
  const std::vector<cd>& data() const { return data_; }

  cd& at(std::size_t l, std::size_t m, std::size_t n) { return data_[index(l, m, n)]; }
  cd at(std::size_t l, std::size_t m, std::size_t n) const { return data_[index(l, m, n)]; }

  void slab(std::size_t l, Slab& out) const {
    require(l >= first_ && l < first_ + count_, "range bin not stored in this cube");
    const auto M = static_cast<Eigen::Index>(pulses()), N = static_cast<Eigen::Index>(n_);
    out = Eigen::Map<const Slab>(data_.data() + (l - first_) * pulses() * n_, M, N);
  }
  void set_slab(std::size_t l, const Slab& s) {
    require(l >= first_ && l < first_ + count_, "range bin not stored in this cube");
    std::copy(s.data(), s.data() + s.size(), data_.begin() + static_cast<std::ptrdiff_t>((l - first_) * pulses() * n_));
  }

 private:
  std::size_t index(std::size_t l, std::size_t m, std::size_t n) const {
    require(l >= first_ && l < first_ + count_ && m < pulses() && n < n_, "cube index out of range");
    return ((l - first_) * pulses() + m) * n_ + n;
  }

  WaveformParams w_;
  std::size_t n_;
  double noise_power_;
  std::size_t first_, count_;
  std::vector<cd> data_;
};

/// Materialize bins [first, first + count); count 0 means through the last bin.
inline RadarCube synthesize_cube(const SceneSynthesizer& s, std::size_t first = 0, std::size_t count = 0,
                                 std::size_t threads = 1) {
  if (count == 0) {
    require(first < s.bins(), "first bin out of range");
    count = s.bins() - first;
  }
  const double bytes = double(count) * double(s.pulses()) * double(s.elements()) * double(sizeof(cd));
  if (bytes > double(s.options().memory_cap_bytes))
    throw ConfigError("cube of " + std::to_string(count) + " x " + std::to_string(s.pulses()) + " x " +
                      std::to_string(s.elements()) + " exceeds the memory cap");
  RadarCube cube(s.params(), s.elements(), s.noise_power(), first, count);
  parallel_for(count, threads, [&](std::size_t i) {
    Slab slab;
    s.slab(first + i, slab);
    cube.set_slab(first + i, slab);
  });
  return cube;
}

inline RadarCube synthesize_cube(const ArrayGeometry& g, const WaveformParams& w, const std::vector<Target>& targets,
                                 const ClutterModel& clutter, double noise_power, std::uint64_t seed,
                                 SynthesisOptions opt = {}) {
  return synthesize_cube(SceneSynthesizer(g, w, targets, clutter, noise_power, seed, opt));
}

}  // namespace nfisac
