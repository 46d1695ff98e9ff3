#pragma once

// CSV, PPM and JSON writers for maps, curves and detections.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "detection.hpp"
#include "evaluation.hpp"
#include "provenance.hpp"
#include "serialization.hpp"

namespace nfisac {

struct Rgb {
  std::uint8_t r, g, b;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

namespace detail {

// Viridis sampled at 0, 32, ..., 224, 255; entries in between are linear.
inline constexpr std::array<Rgb, 9> kViridisAnchors{{{68, 1, 84},
                                                     {71, 45, 123},
                                                     {59, 82, 139},
                                                     {44, 114, 142},
                                                     {33, 145, 140},
                                                     {40, 174, 128},
                                                     {94, 201, 98},
                                                     {173, 220, 48},
                                                     {253, 231, 37}}};

inline std::string num(double v, int digits = 9) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::ofstream open_text(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw ConfigError("write failed: " + p.string());
}

}  // namespace detail

/// 256-entry viridis-like table; docs/colormap.md lists every entry.
inline const std::array<Rgb, 256>& colormap() {
  static const std::array<Rgb, 256> table = [] {
    std::array<Rgb, 256> t{};
    constexpr std::array<int, 9> at{0, 32, 64, 96, 128, 160, 192, 224, 255};
    for (int i = 0; i < 256; ++i) {
      std::size_t s = 0;
      while (s + 2 < at.size() && i > at[s + 1]) ++s;
      const double f = double(i - at[s]) / double(at[s + 1] - at[s]);
      const auto& a = detail::kViridisAnchors[s];
      const auto& b = detail::kViridisAnchors[s + 1];
      auto mix = [f](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(double(x) + f * (double(y) - double(x))));
      };
      t[std::size_t(i)] = {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
    }
    return t;
  }();
  return table;
}

inline double to_db(double v) { return 10.0 * std::log10(std::max(v, 1e-300)); }

// ---- detection maps -----------------------------------------------------------

inline void write_map_csv(std::ostream& out, const DetectionMap& m, const Provenance& prov) {
  out << prov.comment() << '\n';
  out << "range_bin,range_m,doppler_bin,velocity_mps,angle_index,angle_deg,statistic_db\n";
  for (std::size_t i = 0; i < m.n_range(); ++i)
    for (std::size_t j = 0; j < m.n_doppler(); ++j)
      for (std::size_t k = 0; k < m.n_angle(); ++k)
        out << m.range_bins[i] << ',' << detail::num(m.ranges_m[i]) << ',' << j << ',' << detail::num(m.velocities_mps[j])
            << ',' << k << ',' << detail::num(m.angles[k] * 180.0 / std::numbers::pi) << ','
            << detail::num(to_db(m.at(i, j, k))) << '\n';
}

inline void write_map_csv(const std::filesystem::path& p, const DetectionMap& m, const Provenance& prov) {
  auto out = detail::open_text(p);
  write_map_csv(out, m, prov);
  detail::finish(out, p);
}

/// Row-major dB image, rows x cols.
struct Heatmap {
  std::size_t rows = 0, cols = 0;
  std::vector<double> db;
};

/// Max over angle: rows = range bins, cols = Doppler.
inline Heatmap range_doppler_marginal(const DetectionMap& m) {
  Heatmap h{m.n_range(), m.n_doppler(), std::vector<double>(m.n_range() * m.n_doppler(), -300.0)};
  for (std::size_t i = 0; i < m.n_range(); ++i)
    for (std::size_t j = 0; j < m.n_doppler(); ++j)
      for (std::size_t k = 0; k < m.n_angle(); ++k) h.db[i * h.cols + j] = std::max(h.db[i * h.cols + j], to_db(m.at(i, j, k)));
  return h;
}

/// Max over range: rows = candidate angles, cols = Doppler.
inline Heatmap angle_doppler_marginal(const DetectionMap& m) {
  Heatmap h{m.n_angle(), m.n_doppler(), std::vector<double>(m.n_angle() * m.n_doppler(), -300.0)};
  for (std::size_t i = 0; i < m.n_range(); ++i)
    for (std::size_t j = 0; j < m.n_doppler(); ++j)
      for (std::size_t k = 0; k < m.n_angle(); ++k) h.db[k * h.cols + j] = std::max(h.db[k * h.cols + j], to_db(m.at(i, j, k)));
  return h;
}

/// Binary P6. Colors span [max - dynamic_range_db, max]; each cell is drawn
/// as a scale x scale block.
inline void write_ppm(const std::filesystem::path& p, const Heatmap& h, const Provenance& prov,
                      double dynamic_range_db = 40.0, std::size_t scale = 4) {
  require(h.rows > 0 && h.cols > 0 && h.db.size() == h.rows * h.cols, "heatmap shape mismatch");
  require(dynamic_range_db > 0 && scale >= 1, "need a positive dynamic range and scale");
  const double top = *std::max_element(h.db.begin(), h.db.end());
  const double bottom = top - dynamic_range_db;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << "P6\n" << prov.comment() << " top_db=" << detail::num(top, 6) << " range_db=" << detail::num(dynamic_range_db, 6)
      << '\n' << h.cols * scale << ' ' << h.rows * scale << "\n255\n";
  const auto& cm = colormap();
  std::vector<std::uint8_t> row(h.cols * scale * 3);
  for (std::size_t r = 0; r < h.rows; ++r) {
    for (std::size_t c = 0; c < h.cols; ++c) {
      const double t = std::clamp((h.db[r * h.cols + c] - bottom) / dynamic_range_db, 0.0, 1.0);
      const Rgb px = cm[static_cast<std::size_t>(std::lround(t * 255.0))];
      for (std::size_t s = 0; s < scale; ++s) {
        const std::size_t o = (c * scale + s) * 3;
        row[o] = px.r, row[o + 1] = px.g, row[o + 2] = px.b;
      }
    }
    for (std::size_t s = 0; s < scale; ++s) out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
  }
  out.flush();
  if (!out) throw ConfigError("write failed: " + p.string());
}

// ---- detections ---------------------------------------------------------------

inline json detections_to_json(const std::vector<Detection>& ds) {
  json a = json::array();
  for (const auto& d : ds)
    a.push_back({{"range_m", d.range_m},
                 {"velocity_mps", d.velocity_mps},
                 {"angle_deg", d.angle_deg},
                 {"statistic_db", d.statistic_db}});
  return a;
}

// ---- curves -------------------------------------------------------------------

inline void write_sinr_csv(const std::filesystem::path& p, const SinrCurve& c, const Provenance& prov) {
  auto out = detail::open_text(p);
  out << prov.comment() << " k_cells=" << c.k_cells << " seeds=" << c.seeds << '\n';
  out << "velocity_mps,optimal_sinr_db,nf_stap_sinr_db,conventional_sinr_db\n";
  for (std::size_t i = 0; i < c.velocities.size(); ++i)
    out << detail::num(c.velocities[i]) << ',' << detail::num(c.optimal_db[i]) << ',' << detail::num(c.nf_stap_db[i]) << ','
        << detail::num(c.conventional_db[i]) << '\n';
  detail::finish(out, p);
}

inline void write_rate_csv(const std::filesystem::path& p, const RateCurve& c, const Provenance& prov) {
  auto out = detail::open_text(p);
  out << prov.comment() << " test_angle_deg=" << detail::num(c.test_angle * 180.0 / std::numbers::pi)
      << " overhead_dft=" << c.overhead_dft << " overhead_nf_stap=" << c.overhead_nf_stap << '\n';
  out << "distance_m,perfect_csi_rate_bps_per_hz,proposed_nf_stap_rate_bps_per_hz,proposed_dft_rate_bps_per_hz,"
         "far_field_rate_bps_per_hz,perfect_csi_gain_db,proposed_nf_stap_gain_db,proposed_dft_gain_db,far_field_gain_db\n";
  for (std::size_t i = 0; i < c.distances.size(); ++i)
    out << detail::num(c.distances[i]) << ',' << detail::num(c.perfect_csi[i]) << ',' << detail::num(c.proposed_nf_stap[i])
        << ',' << detail::num(c.proposed_dft[i]) << ',' << detail::num(c.far_field[i]) << ','
        << detail::num(c.gain_perfect_db[i]) << ',' << detail::num(c.gain_nf_stap_db[i]) << ','
        << detail::num(c.gain_dft_db[i]) << ',' << detail::num(c.gain_far_field_db[i]) << '\n';
  detail::finish(out, p);
}

inline void write_transverse_csv(const std::filesystem::path& p, const std::vector<double>& distances,
                                 const std::vector<double>& resolution, const Provenance& prov) {
  require(distances.size() == resolution.size(), "one resolution per distance");
  auto out = detail::open_text(p);
  out << prov.comment() << '\n' << "distance_m,transverse_resolution_mps\n";
  for (std::size_t i = 0; i < distances.size(); ++i)
    out << detail::num(distances[i]) << ',' << detail::num(resolution[i]) << '\n';
  detail::finish(out, p);
}

struct LabelledComplexity {
  std::string label;
  ComplexityReport report;
};

inline void write_complexity_csv(const std::filesystem::path& p, const std::vector<LabelledComplexity>& rows,
                                 const Provenance& prov) {
  auto out = detail::open_text(p);
  out << prov.comment() << '\n' << "case,L,M,N,l_c,n_c,full_ops,reduced_ops,reduction_factor\n";
  for (const auto& [label, r] : rows)
    out << label << ',' << r.L << ',' << r.M << ',' << r.N << ',' << r.l_c << ',' << r.n_c << ',' << to_string(r.full_ops)
        << ',' << to_string(r.reduced_ops) << ',' << detail::num(r.reduction_factor, 17) << '\n';
  detail::finish(out, p);
}

}  // namespace nfisac
