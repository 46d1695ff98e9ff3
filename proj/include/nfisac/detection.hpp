#pragma once

// CA-CFAR along Doppler, 26-connected clustering and peak parameter estimates.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "stap.hpp"

namespace nfisac {

struct CfarConfig {
  double pfa = 1e-6;
  std::size_t train_cells = 8;  // per side
  std::size_t guard_cells = 2;  // per side
  // Static clutter occupies only the zero-Doppler cell; its residue there is
  // not a target.
  bool blank_zero_doppler = true;
};

inline void validate(const CfarConfig& c) {
  require(c.pfa > 0 && c.pfa < 1, "pfa must lie in (0, 1)");
  require(c.train_cells >= 1, "CFAR needs at least one training cell per side");
}

/// Exact CA-CFAR scale for exponential (square-law) cells: P_fa = (1 + a/K)^-K.
inline double cfar_scale(double pfa, std::size_t k) {
  const double kt = static_cast<double>(k);
  return kt * (std::pow(pfa, -1.0 / kt) - 1.0);
}

/// Mean of the training cells around `i`; the window is clipped at the edges.
inline double cfar_noise(std::span<const double> x, std::size_t i, const CfarConfig& c, std::size_t* count = nullptr) {
  const std::size_t reach = c.guard_cells + c.train_cells;
  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t off = c.guard_cells + 1; off <= reach; ++off) {
    if (i >= off) {
      sum += x[i - off];
      ++k;
    }
    if (i + off < x.size()) {
      sum += x[i + off];
      ++k;
    }
  }
  if (count) *count = k;
  return k ? sum / double(k) : 0.0;
}

inline std::vector<std::size_t> ca_cfar(std::span<const double> x, const CfarConfig& c) {
  validate(c);
  if (x.size() <= 2 * (c.train_cells + c.guard_cells) + 1) throw InvalidArgument("CFAR slice too short for the window");
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t k = 0;
    const double mu = cfar_noise(x, i, c, &k);
    if (x[i] > cfar_scale(c.pfa, k) * mu) hits.push_back(i);
  }
  return hits;
}

struct MapCell {
  std::size_t range = 0, doppler = 0, angle = 0;
  friend bool operator==(const MapCell&, const MapCell&) = default;
};

struct Detection {
  double range_m = 0.0;
  double velocity_mps = 0.0;
  double angle_deg = 0.0;
  double statistic_db = 0.0;  // over the local CFAR noise estimate
  MapCell cell;
};

namespace detail {

inline std::vector<double> doppler_slice(const DetectionMap& m, std::size_t i, std::size_t k) {
  std::vector<double> s(m.n_doppler());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = m.at(i, j, k);
  return s;
}

}  // namespace detail

/// Index of the Doppler cell within half a cell of zero, or n_doppler() if none.
inline std::size_t zero_doppler_cell(const DetectionMap& m) {
  const std::size_t D = m.n_doppler();
  if (D == 0) return 0;
  std::size_t j0 = 0;
  for (std::size_t j = 1; j < D; ++j)
    if (std::abs(m.doppler[j]) < std::abs(m.doppler[j0])) j0 = j;
  const double half = D > 1 ? 0.5 * std::abs(m.doppler[1] - m.doppler[0]) : 0.5;
  return std::abs(m.doppler[j0]) < half ? j0 : D;
}

/// CFAR over every (range, angle) Doppler slice.
inline std::vector<MapCell> detect_cells(const DetectionMap& m, const CfarConfig& c) {
  const std::size_t blank = c.blank_zero_doppler ? zero_doppler_cell(m) : m.n_doppler();
  std::vector<MapCell> cells;
  for (std::size_t i = 0; i < m.n_range(); ++i)
    for (std::size_t k = 0; k < m.n_angle(); ++k) {
      const auto s = detail::doppler_slice(m, i, k);
      for (auto j : ca_cfar(s, c))
        if (j != blank) cells.push_back({i, j, k});
    }
  std::sort(cells.begin(), cells.end(), [](const MapCell& a, const MapCell& b) {
    return std::array{a.range, a.doppler, a.angle} < std::array{b.range, b.doppler, b.angle};
  });
  return cells;
}

/// Groups cells that touch in range and Doppler (8-connectivity). The angle
/// axis is treated as one neighbourhood: the candidate angles span a single
/// DFT beam, so hits at different candidate angles in the same range-Doppler
/// cell are one target (a beam sidelobe past the null otherwise splits it).
inline std::vector<std::vector<MapCell>> cluster_cells(const DetectionMap& m, const std::vector<MapCell>& cells) {
  std::vector<int> label(m.values.size(), -1);
  std::vector<char> hit(m.values.size(), 0);
  for (const auto& c : cells) hit[m.index(c.range, c.doppler, c.angle)] = 1;
  std::vector<std::vector<MapCell>> out;
  auto near = [](std::size_t a, long d, std::size_t n, std::size_t& r) {
    const long v = static_cast<long>(a) + d;
    if (v < 0 || v >= static_cast<long>(n)) return false;
    r = static_cast<std::size_t>(v);
    return true;
  };
  for (const auto& seed : cells) {
    if (label[m.index(seed.range, seed.doppler, seed.angle)] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<MapCell> stack{seed};
    label[m.index(seed.range, seed.doppler, seed.angle)] = id;
    while (!stack.empty()) {
      const MapCell c = stack.back();
      stack.pop_back();
      out.back().push_back(c);
      for (long di = -1; di <= 1; ++di)
        for (long dj = -1; dj <= 1; ++dj)
          for (std::size_t k = 0; k < m.n_angle(); ++k) {
            MapCell n;
            n.angle = k;
            if (!near(c.range, di, m.n_range(), n.range) || !near(c.doppler, dj, m.n_doppler(), n.doppler)) continue;
            const auto idx = m.index(n.range, n.doppler, n.angle);
            if (hit[idx] && label[idx] < 0) {
              label[idx] = id;
              stack.push_back(n);
            }
          }
    }
  }
  return out;
}

/// One Detection per cluster, at its strongest cell. Velocity is refined by a
/// parabola through the dB statistic of the Doppler neighbours.
inline std::vector<Detection> estimate_parameters(const DetectionMap& m, const std::vector<MapCell>& cells,
                                                  const CfarConfig& c) {
  std::vector<Detection> out;
  for (const auto& cluster : cluster_cells(m, cells)) {
    const MapCell best = *std::max_element(cluster.begin(), cluster.end(), [&](const MapCell& a, const MapCell& b) {
      return m.at(a.range, a.doppler, a.angle) < m.at(b.range, b.doppler, b.angle);
    });
    const auto slice = detail::doppler_slice(m, best.range, best.angle);
    const std::size_t j = best.doppler;
    double shift = 0.0;
    if (j > 0 && j + 1 < slice.size() && slice[j - 1] > 0 && slice[j + 1] > 0 && slice[j] > 0) {
      const double ym = 10 * std::log10(slice[j - 1]), y0 = 10 * std::log10(slice[j]), yp = 10 * std::log10(slice[j + 1]);
      const double den = ym - 2 * y0 + yp;
      if (den < 0) shift = std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
    }
    const double step = m.n_doppler() > 1 ? m.doppler[1] - m.doppler[0] : 0.0;
    Detection d;
    d.cell = best;
    d.range_m = m.ranges_m[best.range];
    d.angle_deg = m.angles[best.angle] * 180.0 / std::numbers::pi;
    d.velocity_mps = m.velocities_mps[j] + shift * step * m.velocity_per_cycle;
    const double noise = cfar_noise(slice, j, c);
    d.statistic_db = 10.0 * std::log10(slice[j] / std::max(noise, 1e-300));
    out.push_back(d);
  }
  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return std::array{a.cell.range, a.cell.doppler, a.cell.angle} < std::array{b.cell.range, b.cell.doppler, b.cell.angle};
  });
  return out;
}

inline std::vector<Detection> detect(const DetectionMap& m, const CfarConfig& c) {
  const auto cells = detect_cells(m, c);
  if (cells.empty()) return {};
  return estimate_parameters(m, cells, c);
}

}  // namespace nfisac
