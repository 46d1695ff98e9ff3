#pragma once

// End-to-end steps shared by the CLI, the samples and the acceptance suite.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <system_error>

#include "config.hpp"
#include "cube_io.hpp"
#include "export.hpp"

namespace nfisac {

// ---- spread-table cache ---------------------------------------------------------

/// Content address of a table: everything that changes its entries.
inline std::string table_cache_key(const ScenarioConfig& c) {
  const auto g = c.geometry();
  const json key{{"geometry", to_json(g)},
                 {"threshold_db", c.spread_threshold_db},
                 {"profile_floor_db", c.profile_floor_db},
                 {"min_range_m", c.min_range_m > 0 ? c.min_range_m : 2.0 * g.aperture()},
                 {"format", kFormatVersion}};
  return hex64(fnv1a64(key.dump()));
}

/// NFISAC_CACHE_DIR, else $XDG_CACHE_HOME/nfisac, else ~/.cache/nfisac, else
/// a directory under the system temp path.
inline std::filesystem::path default_cache_dir() {
  if (const char* d = std::getenv("NFISAC_CACHE_DIR"); d && *d) return d;
  if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return std::filesystem::path(x) / "nfisac";
  if (const char* h = std::getenv("HOME"); h && *h) return std::filesystem::path(h) / ".cache" / "nfisac";
  return std::filesystem::temp_directory_path() / "nfisac-cache";
}

struct TableLoad {
  AngularSpreadTable table;
  std::filesystem::path path;
  bool from_cache = false;
};

/// Reads the cached table when present and consistent, else builds and stores it.
/// An empty cache_dir disables caching.
inline TableLoad load_or_build_table(const ScenarioConfig& c, const Codebook& dft, const std::filesystem::path& cache_dir,
                                     std::size_t threads = 1) {
  const auto g = c.geometry();
  std::filesystem::path file;
  if (!cache_dir.empty()) {
    file = cache_dir / "tables" / (table_cache_key(c) + ".json");
    std::error_code ec;
    if (std::filesystem::exists(file, ec)) {
      try {
        auto t = table_from_json(read_json_file(file));
        if (t.geometry() == g && t.dft_size() == dft.size()) return {std::move(t), file, true};
      } catch (const Error&) {
        // Corrupt or stale entry: rebuild below and overwrite it.
      }
    }
  }
  auto t = build_spread_table(g, dft, c.table_options(threads));
  if (!file.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
    // Write to a temp name first so a concurrent reader never sees half a file.
    const auto tmp = file.string() + ".tmp" + std::to_string(c.seed);
    if (!ec) {
      try {
        write_json_file(tmp, to_json(t, Provenance::of(json{{"table", table_cache_key(c)}}, 0)), -1);
        std::filesystem::rename(tmp, file, ec);
      } catch (const Error&) {
        // Caching is best effort.
      }
    }
  }
  return {std::move(t), file, false};
}

// ---- train ------------------------------------------------------------------------

inline PolarPoint user_point(const ScenarioConfig& c) {
  const auto u = c.effective_user();
  return {u.range_m, u.angle_deg * std::numbers::pi / 180.0};
}

inline TrainingReport train(const ScenarioConfig& c, const Codebook& dft, const AngularSpreadTable& table, bool noiseless) {
  TrainingOptions o;
  o.l_c = c.l_c;
  o.n_c = c.n_c;
  o.sweep_snr_db = noiseless ? std::numeric_limits<double>::infinity() : c.effective_user().sweep_snr_db;
  o.seed = c.seed;
  o.min_range = table.min_range();
  return run_training(dft, table, user_point(c), o);
}

// ---- sense ------------------------------------------------------------------------

struct SenseResult {
  ScanResult scan;
  std::vector<Detection> detections;
  std::vector<std::size_t> covered_targets;  // indices into config targets
};

/// Targets whose range bin and direction fall inside the candidate window.
inline std::vector<std::size_t> covered_targets(const ScenarioConfig& c, const TrainingReport& r) {
  const auto g = c.geometry();
  const auto w = c.waveform();
  const auto bins = sensing_bins(w, r.refined.range, r.candidate_ranges.size());
  const double u_lo = std::sin(r.candidate_angles.front()), u_hi = std::sin(r.candidate_angles.back());
  const double pad = 1.0 / double(g.n_elements());  // half a DFT beam
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < c.targets.size(); ++i) {
    const auto& t = c.targets[i];
    const std::size_t l = range_bin_of(w, t.range_m);
    const double u = std::sin(t.angle_deg * std::numbers::pi / 180.0);
    if (l >= bins.front() && l <= bins.back() && u >= u_lo - pad && u <= u_hi + pad) out.push_back(i);
  }
  return out;
}

/// Synthesizes the scene lazily (only the bins the scan touches) and runs the
/// reduced scan plus CFAR. Throws CoverageError when targets exist but none is
/// inside the candidate window.
inline SenseResult sense(const ScenarioConfig& c, const TrainingReport& r, std::size_t threads = 1) {
  SenseResult out;
  out.covered_targets = covered_targets(c, r);
  if (!c.targets.empty() && out.covered_targets.empty())
    throw CoverageError("candidate window excludes every target; retrain or widen l_c / n_c");
  const auto g = c.geometry();
  const auto w = c.waveform();
  SceneSynthesizer synth(g, w, c.scene_targets(), c.clutter(), c.noise_power(), c.seed);
  out.scan = reduced_scan(synth, g, w, r, default_doppler_grid(w.n_pulses), c.scan_options(threads));
  out.detections = detect(out.scan.map, c.cfar());
  return out;
}

// ---- evaluation panels ------------------------------------------------------------

inline SinrModel sinr_model(const ScenarioConfig& c) {
  auto cl = c.clutter();
  cl.cnr_db = c.evaluation.sinr_cnr_db;
  const PolarPoint cell{c.evaluation.sinr_range_m, c.evaluation.sinr_angle_deg * std::numbers::pi / 180.0};
  return SinrModel(c.geometry(), c.waveform(), cell, cl, c.noise_power(), c.n_c);
}

inline std::vector<std::uint64_t> sinr_seeds(const ScenarioConfig& c) {
  std::vector<std::uint64_t> s;
  for (std::size_t i = 0; i < c.evaluation.sinr_seeds; ++i) s.push_back(c.seed + i);
  return s;
}

inline SinrCurve sinr_panel(const ScenarioConfig& c, std::size_t K, std::size_t threads = 1) {
  const auto m = sinr_model(c);
  return sinr_loss_curve(m, velocity_grid(c.evaluation.velocity_max_mps, c.evaluation.velocity_points), K, sinr_seeds(c),
                         c.loading(), threads);
}

/// Evenly spaced points strictly inside (2 * aperture, EBRD), then the Rayleigh
/// distance and twice it.
inline std::vector<double> transverse_distances(const ScenarioConfig& c) {
  const auto g = c.geometry();
  const double a = 2.0 * g.aperture();
  const double e = ebrd(g, c.evaluation.transverse_angle_deg * std::numbers::pi / 180.0);
  const std::size_t n = c.evaluation.transverse_points;
  std::vector<double> d;
  for (std::size_t i = 0; i < n; ++i) d.push_back(a + (e - a) * (double(i) + 0.5) / double(n));
  d.push_back(rayleigh_distance(g));
  d.push_back(2.0 * rayleigh_distance(g));
  return d;
}

/// Log-spaced from just beyond 2 * aperture to 1.5 x the Rayleigh distance.
inline std::vector<double> rate_distances(const ScenarioConfig& c) {
  const auto g = c.geometry();
  const double lo = 1.1 * 2.0 * g.aperture(), hi = 1.5 * rayleigh_distance(g);
  const std::size_t n = c.evaluation.rate_points;
  std::vector<double> d;
  for (std::size_t i = 0; i < n; ++i) d.push_back(lo * std::pow(hi / lo, double(i) / double(n - 1)));
  return d;
}

inline RateOptions rate_options(const ScenarioConfig& c, std::size_t threads = 1) {
  RateOptions o;
  const auto& e = c.evaluation;
  o.snr_ref_db = e.rate_snr_ref_db;
  o.frame_budget = e.rate_frame_budget;
  o.l_c = e.rate_l_c;
  o.n_c = e.rate_n_c;
  o.angle = e.rate_angle_deg * std::numbers::pi / 180.0;
  o.users_per_distance = e.rate_users;
  o.threads = threads;
  return o;
}

inline std::vector<LabelledComplexity> complexity_panel(const ScenarioConfig& c) {
  const auto w = c.waveform();
  return {{"config", complexity_report(w.range_bins(), w.n_pulses, c.n_elements, c.l_c, c.n_c)},
          {"reference", complexity_report(256, 128, 256, 8, 8)}};
}

}  // namespace nfisac
