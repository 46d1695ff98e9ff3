#pragma once

#include <nfisac/nfisac.hpp>

#include <random>

namespace nfisac::testing {

inline constexpr double kDeg = std::numbers::pi / 180.0;

// The 256-element, 28 GHz array used throughout, and a small one for the
// tests that need full-dimension processing.
inline ArrayGeometry case_geometry() { return ArrayGeometry::with_spacing_wavelengths(256, 0.5, 28e9); }
inline ArrayGeometry small_geometry(std::size_t n = 32) { return ArrayGeometry::with_spacing_wavelengths(n, 0.5, 28e9); }

inline WaveformParams small_waveform(std::size_t M = 8, double fs = 2e6) {
  WaveformParams w;
  w.n_pulses = M;
  w.sample_rate = fs;
  w.bandwidth = fs;
  return w;
}

inline CVector random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cd(nd(rng), nd(rng));
  return v;
}

inline CMatrix random_pd(std::mt19937_64& rng, Eigen::Index n) {
  CMatrix A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) A.col(j) = random_vector(rng, n);
  CMatrix R = A * A.adjoint() / double(n);
  R.diagonal().array() += 0.1;
  return R;
}

// Spread table for the case-study array, cached on disk across test runs.
inline const AngularSpreadTable& case_table() {
  static const AngularSpreadTable t = [] {
    ScenarioConfig cfg;
    return load_or_build_table(cfg, build_dft_codebook(cfg.geometry()), default_cache_dir()).table;
  }();
  return t;
}

}  // namespace nfisac::testing
