#pragma once

// Scenario configuration: JSON in, typed structs out. Unknown keys, wrong
// types and out-of-range values all raise ConfigError.

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "detection.hpp"
#include "evaluation.hpp"
#include "provenance.hpp"
#include "serialization.hpp"

namespace nfisac {

struct TargetConfig {
  double range_m = 15.0;
  double angle_deg = 5.0;
  double v_radial_mps = 0.0;
  double v_transverse_mps = 0.0;
  double amplitude_db = 0.0;
};

struct UserConfig {
  double range_m = 15.5;
  double angle_deg = 5.0;
  double sweep_snr_db = 30.0;  // per-beam SNR at the strongest DFT beam
};

struct EvaluationConfig {
  double sinr_cnr_db = 45.0;
  double sinr_range_m = 15.5;
  double sinr_angle_deg = 5.0;
  double velocity_max_mps = 10.0;
  std::size_t velocity_points = 42;
  std::size_t sinr_seeds = 4;
  std::size_t transverse_points = 10;
  double transverse_angle_deg = 0.0;
  double rate_snr_ref_db = 20.0;
  std::size_t rate_frame_budget = 2048;
  std::size_t rate_l_c = 6;
  std::size_t rate_n_c = 1;
  double rate_angle_deg = 5.0;
  std::size_t rate_points = 24;
  std::size_t rate_users = 16;
};

struct ScenarioConfig {
  // geometry
  std::size_t n_elements = 256;
  double spacing_wavelengths = 0.5;
  double carrier_ghz = 28.0;
  // waveform
  double prf_hz = 1e4;
  std::size_t m_pulses = 128;
  double fs_mhz = 400.0;
  double bandwidth_mhz = 400.0;
  // scene
  std::vector<TargetConfig> targets{{15.0, 5.0, 5.0, 0.0, 0.0}, {16.0, 5.0, -5.0, 0.0, 0.0}};
  double cnr_db = 30.0;
  std::size_t patches = 181;
  double sector_lo_deg = -90.0, sector_hi_deg = 90.0;
  bool clutter_enabled = true;
  double noise_power_db = 0.0;
  // adaptive processing
  std::size_t k_cells = 0;  // 0 selects 4 M n_c
  std::size_t guard = 2;
  double loading_db = 0.0;  // relative to the noise power
  std::size_t l_c = 8, n_c = 8;
  // detection
  double pfa = 1e-6;
  std::size_t cfar_train = 8, cfar_guard = 2;
  bool cfar_blank_zero_doppler = true;
  // beam training
  std::optional<UserConfig> user;
  double spread_threshold_db = 3.0;
  double profile_floor_db = 30.0;
  double min_range_m = 0.0;  // 0 selects 2 * aperture
  EvaluationConfig evaluation;
  std::uint64_t seed = 1;

  ArrayGeometry geometry() const {
    return ArrayGeometry::with_spacing_wavelengths(n_elements, spacing_wavelengths, carrier_ghz * 1e9);
  }
  WaveformParams waveform() const {
    return {prf_hz, m_pulses, fs_mhz * 1e6, bandwidth_mhz * 1e6, carrier_ghz * 1e9};
  }
  double noise_power() const { return std::pow(10.0, noise_power_db / 10.0); }
  double loading() const { return noise_power() * std::pow(10.0, loading_db / 10.0); }
  std::size_t training_cells() const { return k_cells ? k_cells : 4 * m_pulses * n_c; }

  ClutterModel clutter() const {
    ClutterModel c;
    c.patches_per_bin = patches;
    c.cnr_db = cnr_db;
    c.sector_lo = sector_lo_deg * std::numbers::pi / 180.0;
    c.sector_hi = sector_hi_deg * std::numbers::pi / 180.0;
    c.enabled = clutter_enabled;
    return c;
  }

  std::vector<Target> scene_targets() const {
    std::vector<Target> out;
    for (const auto& t : targets)
      out.push_back({{t.range_m, t.angle_deg * std::numbers::pi / 180.0},
                     {t.v_radial_mps, t.v_transverse_mps},
                     cd(std::pow(10.0, t.amplitude_db / 20.0), 0.0)});
    return out;
  }

  /// Explicit user, else the centroid of the targets.
  UserConfig effective_user() const {
    if (user) return *user;
    if (targets.empty()) throw ConfigError("no user given and no targets to place one at");
    UserConfig u;
    u.range_m = u.angle_deg = 0.0;
    for (const auto& t : targets) {
      u.range_m += t.range_m / double(targets.size());
      u.angle_deg += t.angle_deg / double(targets.size());
    }
    return u;
  }

  SpreadTableOptions table_options(std::size_t threads = 1) const {
    SpreadTableOptions o;
    o.spread = {spread_threshold_db, profile_floor_db};
    o.min_range = min_range_m;
    o.threads = threads;
    return o;
  }

  CfarConfig cfar() const { return {pfa, cfar_train, cfar_guard, cfar_blank_zero_doppler}; }

  ScanOptions scan_options(std::size_t threads = 1) const {
    ScanOptions o;
    o.k_cells = training_cells();
    o.guard = guard;
    o.loading = loading();
    o.threads = threads;
    return o;
  }
};

namespace detail {

inline void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + where + "." + k + "'");
}

template <class T>
void opt_field(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(where + "." + key + " must be a non-negative integer");
  } else {
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  }
  out = v.get<T>();
}

inline void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace detail

inline void validate(const ScenarioConfig& c) {
  using detail::check;
  auto finite = [](double v) { return std::isfinite(v); };
  check(c.n_elements >= 2, "geometry.n_elements must be >= 2");
  check(c.spacing_wavelengths > 0 && finite(c.spacing_wavelengths), "geometry.spacing_wavelengths must be > 0");
  check(c.carrier_ghz > 0 && finite(c.carrier_ghz), "geometry.carrier_ghz must be > 0");
  check(c.prf_hz > 0 && finite(c.prf_hz), "waveform.prf_hz must be > 0");
  check(c.m_pulses >= 1, "waveform.m_pulses must be >= 1");
  check(c.fs_mhz > 0 && finite(c.fs_mhz), "waveform.fs_mhz must be > 0");
  check(c.bandwidth_mhz > 0 && finite(c.bandwidth_mhz), "waveform.bandwidth_mhz must be > 0");
  check(c.fs_mhz * 1e6 / c.prf_hz >= 1.0, "waveform needs at least one range bin (fs >= prf)");
  const double max_range = kSpeedOfLight / (2.0 * c.prf_hz);
  for (const auto& t : c.targets) {
    check(t.range_m > 0 && t.range_m < max_range, "targets[].range_m must lie inside the unambiguous range");
    check(std::abs(t.angle_deg) < 90.0, "targets[].angle_deg must lie in (-90, 90)");
    check(finite(t.v_radial_mps) && finite(t.v_transverse_mps) && finite(t.amplitude_db), "targets[] values must be finite");
  }
  check(c.patches >= 1, "clutter.patches must be >= 1");
  check(finite(c.cnr_db), "clutter.cnr_db must be finite");
  check(c.sector_lo_deg < c.sector_hi_deg && c.sector_lo_deg >= -90.0 && c.sector_hi_deg <= 90.0,
        "clutter.sector_deg must be an increasing pair inside [-90, 90]");
  check(finite(c.noise_power_db), "noise.power_db must be finite");
  check(c.k_cells % 2 == 0, "training.k_cells must be even");
  check(finite(c.loading_db), "training.loading_db must be finite");
  check(c.l_c >= 1 && c.n_c >= 1, "candidates.l_c and candidates.n_c must be >= 1");
  check(c.n_c <= c.n_elements, "candidates.n_c cannot exceed the element count");
  check(c.pfa > 0 && c.pfa < 1, "cfar.pfa must lie in (0, 1)");
  check(c.cfar_train >= 1, "cfar.train must be >= 1");
  check(2 * (c.cfar_train + c.cfar_guard) + 1 < c.m_pulses, "cfar window must fit the Doppler axis");
  if (c.user) {
    check(c.user->range_m > 0 && finite(c.user->range_m), "user.range_m must be > 0");
    check(std::abs(c.user->angle_deg) < 90.0, "user.angle_deg must lie in (-90, 90)");
    check(!std::isnan(c.user->sweep_snr_db), "user.sweep_snr_db must be a number");
  }
  check(c.spread_threshold_db > 0 && c.profile_floor_db >= c.spread_threshold_db,
        "spread.threshold_db must be > 0 and <= spread.profile_floor_db");
  check(c.min_range_m >= 0, "spread.min_range_m must be >= 0");
  const auto& e = c.evaluation;
  check(finite(e.sinr_cnr_db), "evaluation.sinr_cnr_db must be finite");
  check(e.sinr_range_m > 0 && std::abs(e.sinr_angle_deg) < 90.0, "evaluation SINR cell must be a valid point");
  check(e.velocity_max_mps >= 10.0, "evaluation.velocity_max_mps must be >= 10 (grid spans at least +-10 m/s)");
  check(e.velocity_points >= 2 && e.sinr_seeds >= 1, "evaluation needs >= 2 velocities and >= 1 seed");
  check(e.transverse_points >= 2 && std::abs(e.transverse_angle_deg) < 90.0, "evaluation transverse grid invalid");
  check(e.rate_l_c >= 1 && e.rate_n_c >= 1 && e.rate_points >= 2 && e.rate_users >= 1, "evaluation rate grid invalid");
  check(e.rate_frame_budget > c.n_elements + e.rate_l_c * e.rate_n_c, "evaluation.rate_frame_budget must exceed the overhead");
  check(std::abs(e.rate_angle_deg) < 90.0 && finite(e.rate_snr_ref_db), "evaluation rate angle/SNR invalid");
}

inline ScenarioConfig config_from_json(const json& j) {
  using detail::allow_keys;
  using detail::opt_field;
  ScenarioConfig c;
  allow_keys(j, {"geometry", "waveform", "targets", "clutter", "noise", "training", "candidates", "cfar", "user", "spread",
                 "evaluation", "seed"},
             "config");
  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    allow_keys(g, {"n_elements", "spacing_wavelengths", "carrier_ghz"}, "geometry");
    opt_field(g, "n_elements", c.n_elements, "geometry");
    opt_field(g, "spacing_wavelengths", c.spacing_wavelengths, "geometry");
    opt_field(g, "carrier_ghz", c.carrier_ghz, "geometry");
  }
  if (j.contains("waveform")) {
    const auto& w = j["waveform"];
    allow_keys(w, {"prf_hz", "m_pulses", "fs_mhz", "bandwidth_mhz"}, "waveform");
    opt_field(w, "prf_hz", c.prf_hz, "waveform");
    opt_field(w, "m_pulses", c.m_pulses, "waveform");
    opt_field(w, "fs_mhz", c.fs_mhz, "waveform");
    opt_field(w, "bandwidth_mhz", c.bandwidth_mhz, "waveform");
  }
  if (j.contains("targets")) {
    if (!j["targets"].is_array()) throw ConfigError("targets must be an array");
    c.targets.clear();
    for (const auto& t : j["targets"]) {
      allow_keys(t, {"range_m", "angle_deg", "v_radial_mps", "v_transverse_mps", "amplitude_db"}, "targets[]");
      if (!t.contains("range_m") || !t.contains("angle_deg")) throw ConfigError("targets[] need range_m and angle_deg");
      TargetConfig tc;
      opt_field(t, "range_m", tc.range_m, "targets[]");
      opt_field(t, "angle_deg", tc.angle_deg, "targets[]");
      opt_field(t, "v_radial_mps", tc.v_radial_mps, "targets[]");
      opt_field(t, "v_transverse_mps", tc.v_transverse_mps, "targets[]");
      opt_field(t, "amplitude_db", tc.amplitude_db, "targets[]");
      c.targets.push_back(tc);
    }
  }
  if (j.contains("clutter")) {
    const auto& cl = j["clutter"];
    allow_keys(cl, {"cnr_db", "patches", "sector_deg", "enabled"}, "clutter");
    opt_field(cl, "cnr_db", c.cnr_db, "clutter");
    opt_field(cl, "patches", c.patches, "clutter");
    opt_field(cl, "enabled", c.clutter_enabled, "clutter");
    if (cl.contains("sector_deg")) {
      const auto& s = cl["sector_deg"];
      if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
        throw ConfigError("clutter.sector_deg must be [lo, hi]");
      c.sector_lo_deg = s[0].get<double>();
      c.sector_hi_deg = s[1].get<double>();
    }
  }
  if (j.contains("noise")) {
    allow_keys(j["noise"], {"power_db"}, "noise");
    opt_field(j["noise"], "power_db", c.noise_power_db, "noise");
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    allow_keys(t, {"k_cells", "guard", "loading_db"}, "training");
    opt_field(t, "k_cells", c.k_cells, "training");
    opt_field(t, "guard", c.guard, "training");
    opt_field(t, "loading_db", c.loading_db, "training");
  }
  if (j.contains("candidates")) {
    allow_keys(j["candidates"], {"l_c", "n_c"}, "candidates");
    opt_field(j["candidates"], "l_c", c.l_c, "candidates");
    opt_field(j["candidates"], "n_c", c.n_c, "candidates");
  }
  if (j.contains("cfar")) {
    const auto& f = j["cfar"];
    allow_keys(f, {"pfa", "train", "guard", "blank_zero_doppler"}, "cfar");
    opt_field(f, "pfa", c.pfa, "cfar");
    opt_field(f, "train", c.cfar_train, "cfar");
    opt_field(f, "guard", c.cfar_guard, "cfar");
    opt_field(f, "blank_zero_doppler", c.cfar_blank_zero_doppler, "cfar");
  }
  if (j.contains("user")) {
    const auto& u = j["user"];
    allow_keys(u, {"range_m", "angle_deg", "sweep_snr_db"}, "user");
    UserConfig uc;
    opt_field(u, "range_m", uc.range_m, "user");
    opt_field(u, "angle_deg", uc.angle_deg, "user");
    if (u.contains("sweep_snr_db") && u["sweep_snr_db"].is_null())
      uc.sweep_snr_db = std::numeric_limits<double>::infinity();
    else
      opt_field(u, "sweep_snr_db", uc.sweep_snr_db, "user");
    c.user = uc;
  }
  if (j.contains("spread")) {
    const auto& s = j["spread"];
    allow_keys(s, {"threshold_db", "profile_floor_db", "min_range_m"}, "spread");
    opt_field(s, "threshold_db", c.spread_threshold_db, "spread");
    opt_field(s, "profile_floor_db", c.profile_floor_db, "spread");
    opt_field(s, "min_range_m", c.min_range_m, "spread");
  }
  if (j.contains("evaluation")) {
    const auto& e = j["evaluation"];
    auto& ev = c.evaluation;
    allow_keys(e, {"sinr_cnr_db", "sinr_range_m", "sinr_angle_deg", "velocity_max_mps", "velocity_points", "sinr_seeds",
                   "transverse_points", "transverse_angle_deg", "rate_snr_ref_db", "rate_frame_budget", "rate_l_c",
                   "rate_n_c", "rate_angle_deg", "rate_points", "rate_users"},
               "evaluation");
    opt_field(e, "sinr_cnr_db", ev.sinr_cnr_db, "evaluation");
    opt_field(e, "sinr_range_m", ev.sinr_range_m, "evaluation");
    opt_field(e, "sinr_angle_deg", ev.sinr_angle_deg, "evaluation");
    opt_field(e, "velocity_max_mps", ev.velocity_max_mps, "evaluation");
    opt_field(e, "velocity_points", ev.velocity_points, "evaluation");
    opt_field(e, "sinr_seeds", ev.sinr_seeds, "evaluation");
    opt_field(e, "transverse_points", ev.transverse_points, "evaluation");
    opt_field(e, "transverse_angle_deg", ev.transverse_angle_deg, "evaluation");
    opt_field(e, "rate_snr_ref_db", ev.rate_snr_ref_db, "evaluation");
    opt_field(e, "rate_frame_budget", ev.rate_frame_budget, "evaluation");
    opt_field(e, "rate_l_c", ev.rate_l_c, "evaluation");
    opt_field(e, "rate_n_c", ev.rate_n_c, "evaluation");
    opt_field(e, "rate_angle_deg", ev.rate_angle_deg, "evaluation");
    opt_field(e, "rate_points", ev.rate_points, "evaluation");
    opt_field(e, "rate_users", ev.rate_users, "evaluation");
  }
  opt_field(j, "seed", c.seed, "config");
  validate(c);
  return c;
}

/// Effective configuration with every default filled in; the input to the hash.
inline json to_json(const ScenarioConfig& c) {
  json targets = json::array();
  for (const auto& t : c.targets)
    targets.push_back({{"range_m", t.range_m},
                       {"angle_deg", t.angle_deg},
                       {"v_radial_mps", t.v_radial_mps},
                       {"v_transverse_mps", t.v_transverse_mps},
                       {"amplitude_db", t.amplitude_db}});
  const auto& e = c.evaluation;
  json j{{"geometry", {{"n_elements", c.n_elements}, {"spacing_wavelengths", c.spacing_wavelengths}, {"carrier_ghz", c.carrier_ghz}}},
         {"waveform", {{"prf_hz", c.prf_hz}, {"m_pulses", c.m_pulses}, {"fs_mhz", c.fs_mhz}, {"bandwidth_mhz", c.bandwidth_mhz}}},
         {"targets", targets},
         {"clutter",
          {{"cnr_db", c.cnr_db}, {"patches", c.patches}, {"sector_deg", {c.sector_lo_deg, c.sector_hi_deg}}, {"enabled", c.clutter_enabled}}},
         {"noise", {{"power_db", c.noise_power_db}}},
         {"training", {{"k_cells", c.training_cells()}, {"guard", c.guard}, {"loading_db", c.loading_db}}},
         {"candidates", {{"l_c", c.l_c}, {"n_c", c.n_c}}},
         {"cfar",
          {{"pfa", c.pfa}, {"train", c.cfar_train}, {"guard", c.cfar_guard}, {"blank_zero_doppler", c.cfar_blank_zero_doppler}}},
         {"spread", {{"threshold_db", c.spread_threshold_db}, {"profile_floor_db", c.profile_floor_db}, {"min_range_m", c.min_range_m}}},
         {"evaluation",
          {{"sinr_cnr_db", e.sinr_cnr_db},
           {"sinr_range_m", e.sinr_range_m},
           {"sinr_angle_deg", e.sinr_angle_deg},
           {"velocity_max_mps", e.velocity_max_mps},
           {"velocity_points", e.velocity_points},
           {"sinr_seeds", e.sinr_seeds},
           {"transverse_points", e.transverse_points},
           {"transverse_angle_deg", e.transverse_angle_deg},
           {"rate_snr_ref_db", e.rate_snr_ref_db},
           {"rate_frame_budget", e.rate_frame_budget},
           {"rate_l_c", e.rate_l_c},
           {"rate_n_c", e.rate_n_c},
           {"rate_angle_deg", e.rate_angle_deg},
           {"rate_points", e.rate_points},
           {"rate_users", e.rate_users}}},
         {"seed", c.seed}};
  if (c.user) {
    // JSON has no infinity; a noiseless sweep is recorded as null.
    const double s = c.user->sweep_snr_db;
    j["user"] = {{"range_m", c.user->range_m}, {"angle_deg", c.user->angle_deg},
                 {"sweep_snr_db", std::isfinite(s) ? json(s) : json(nullptr)}};
  }
  return j;
}

inline ScenarioConfig load_config(const std::filesystem::path& p) { return config_from_json(read_json_file(p)); }

/// Hash of the effective configuration without the seed, so seed sweeps of
/// one scenario share a hash.
inline Provenance provenance_of(const ScenarioConfig& c) {
  json j = to_json(c);
  j.erase("seed");
  return Provenance::of(j, c.seed);
}

}  // namespace nfisac
