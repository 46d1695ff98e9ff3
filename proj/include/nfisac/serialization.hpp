#pragma once

// Versioned JSON for geometry, codebooks, spread tables and training reports.
// Doubles are written with 17 significant digits, so reads are bit-exact.

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "provenance.hpp"
#include "training.hpp"

namespace nfisac {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

inline void check_header(const json& j, const char* kind) {
  if (get<std::string>(j, "kind") != kind) throw ConfigError(std::string("expected a ") + kind + " document");
  if (get<int>(j, "version") != kFormatVersion)
    throw ConfigError("unsupported " + std::string(kind) + " version " + field(j, "version").dump());
}

inline json header(const char* kind, const Provenance& prov) {
  return {{"kind", kind}, {"version", kFormatVersion}, {"provenance", prov.to_json()}};
}

}  // namespace detail

inline json to_json(const ArrayGeometry& g) {
  return {{"n_elements", g.n_elements()}, {"spacing_m", g.spacing()}, {"carrier_hz", g.carrier_freq()}};
}

inline ArrayGeometry geometry_from_json(const json& j) {
  return ArrayGeometry(detail::get<std::size_t>(j, "n_elements"), detail::get<double>(j, "spacing_m"),
                       detail::get<double>(j, "carrier_hz"));
}

inline json to_json(const PolarPoint& p) {
  return {{"r", p.range}, {"theta", p.angle}, {"theta_deg", p.angle * 180.0 / std::numbers::pi}};
}

inline PolarPoint point_from_json(const json& j) {
  return {detail::get<double>(j, "r"), detail::get<double>(j, "theta")};
}

// ---- codebooks: labels fully determine the codewords --------------------------

inline json to_json(const Codebook& cb, const Provenance& prov = {}) {
  json j = detail::header("codebook", prov);
  j["geometry"] = to_json(cb.geometry());
  j["type"] = cb.kind() == CodebookKind::Dft ? "dft" : "polar";
  j["oversampling"] = cb.oversampling();
  json words = json::array();
  for (const auto& l : cb.labels()) {
    json w{{"index", l.beam_index}, {"sin_theta", l.sin_theta}};
    if (l.range) w["r"] = *l.range;
    words.push_back(std::move(w));
  }
  j["codewords"] = std::move(words);
  return j;
}

inline Codebook codebook_from_json(const json& j) {
  detail::check_header(j, "codebook");
  const auto g = geometry_from_json(detail::field(j, "geometry"));
  const auto type = detail::get<std::string>(j, "type");
  if (type != "dft" && type != "polar") throw ConfigError("codebook type must be dft or polar");
  Codebook cb(type == "dft" ? CodebookKind::Dft : CodebookKind::Polar, g, detail::get<std::size_t>(j, "oversampling"));
  for (const auto& w : detail::field(j, "codewords")) {
    CodewordLabel l{detail::get<std::size_t>(w, "index"), detail::get<double>(w, "sin_theta"), std::nullopt};
    if (cb.kind() == CodebookKind::Dft) {
      cb.add(ff_steering_sin(g, l.sin_theta), l);
    } else {
      l.range = detail::get<double>(w, "r");
      cb.add(nf_steering(g, {*l.range, std::asin(l.sin_theta)}), l);
    }
  }
  return cb;
}

// ---- spread tables ------------------------------------------------------------

inline json to_json(const AngularSpreadTable& t, const Provenance& prov = {}) {
  json j = detail::header("spread_table", prov);
  j["geometry"] = to_json(t.geometry());
  j["threshold_db"] = t.options().threshold_db;
  j["profile_floor_db"] = t.options().profile_floor_db;
  j["min_range_m"] = t.min_range();
  j["dft_size"] = t.dft_size();
  json grid = json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = t.entries()[i];
    grid.push_back({{"r", t.grid()[i].range},
                    {"theta", t.grid()[i].angle},
                    {"peak", e.peak_index},
                    {"count", e.spread_count},
                    {"start", e.profile_start},
                    {"profile", e.gain_profile_db}});
  }
  j["grid"] = std::move(grid);
  return j;
}

inline AngularSpreadTable table_from_json(const json& j) {
  detail::check_header(j, "spread_table");
  SpreadOptions opt{detail::get<double>(j, "threshold_db"), detail::get<double>(j, "profile_floor_db")};
  std::vector<PolarPoint> grid;
  std::vector<AngularSpreadDescriptor> entries;
  for (const auto& e : detail::field(j, "grid")) {
    grid.push_back(point_from_json(e));
    AngularSpreadDescriptor d;
    d.peak_index = detail::get<std::size_t>(e, "peak");
    d.spread_count = detail::get<std::size_t>(e, "count");
    d.profile_start = detail::get<std::size_t>(e, "start");
    d.gain_profile_db = detail::get<std::vector<double>>(e, "profile");
    entries.push_back(std::move(d));
  }
  return AngularSpreadTable(geometry_from_json(detail::field(j, "geometry")), opt, detail::get<double>(j, "min_range_m"),
                            detail::get<std::size_t>(j, "dft_size"), std::move(grid), std::move(entries));
}

// ---- training reports -----------------------------------------------------------

inline json to_json(const TrainingReport& r, const Provenance& prov = {}) {
  json j = detail::header("training_report", prov);
  j["coarse"] = to_json(r.coarse);
  j["refined"] = to_json(r.refined);
  j["beams_swept"] = r.beams_swept;
  j["refinement_beams"] = r.refinement_beams;
  j["candidate_angles"] = r.candidate_angles;
  j["candidate_ranges"] = r.candidate_ranges;
  return j;
}

inline TrainingReport report_from_json(const json& j) {
  detail::check_header(j, "training_report");
  TrainingReport r;
  r.coarse = point_from_json(detail::field(j, "coarse"));
  r.refined = point_from_json(detail::field(j, "refined"));
  r.beams_swept = detail::get<std::size_t>(j, "beams_swept");
  r.refinement_beams = detail::get<std::size_t>(j, "refinement_beams");
  r.candidate_angles = detail::get<std::vector<double>>(j, "candidate_angles");
  r.candidate_ranges = detail::get<std::vector<double>>(j, "candidate_ranges");
  if (r.candidate_angles.empty() || r.candidate_ranges.empty()) throw ConfigError("training report has no candidates");
  return r;
}

// ---- files --------------------------------------------------------------------

inline json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& p, const json& j, int indent = 1) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << j.dump(indent) << '\n';
  if (!out) throw ConfigError("write failed: " + p.string());
}

}  // namespace nfisac
