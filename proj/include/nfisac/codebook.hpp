#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "nearfield.hpp"

namespace nfisac {

enum class CodebookKind { Dft, Polar };

struct CodewordLabel {
  std::size_t beam_index = 0;
  double sin_theta = 0.0;
  std::optional<double> range;  // set for polar codewords only

  double angle() const { return std::asin(sin_theta); }
  PolarPoint point() const { return {range.value_or(std::numeric_limits<double>::infinity()), angle()}; }
  friend bool operator==(const CodewordLabel&, const CodewordLabel&) = default;
};

/// Codewords are the columns of `words` (N x size). Labels fully determine them,
/// which is what the JSON format relies on.
class Codebook {
 public:
  Codebook(CodebookKind kind, ArrayGeometry geom, std::size_t oversampling = 1)
      : kind_(kind), geom_(geom), oversampling_(oversampling) {}

  void add(const SteeringVector& w, CodewordLabel label) {
    require(w.size() == geom_.n_elements(), "codeword length must equal element count");
    const auto n = static_cast<Eigen::Index>(geom_.n_elements());
    words_.conservativeResize(n, words_.cols() + 1);
    words_.col(words_.cols() - 1) = w.coeffs();
    labels_.push_back(label);
  }

  CodebookKind kind() const noexcept { return kind_; }
  const ArrayGeometry& geometry() const noexcept { return geom_; }
  std::size_t oversampling() const noexcept { return oversampling_; }
  std::size_t size() const noexcept { return labels_.size(); }
  const CMatrix& matrix() const noexcept { return words_; }
  const std::vector<CodewordLabel>& labels() const noexcept { return labels_; }
  SteeringVector codeword(std::size_t i) const {
    return SteeringVector::from_coefficients(words_.col(static_cast<Eigen::Index>(i)));
  }

  /// Noiseless power sweep N |W^H a|^2 for a unit-norm incident vector.
  std::vector<double> sweep(const CVector& incident) const {
    const CVector y = words_.adjoint() * incident;
    std::vector<double> g(size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = static_cast<double>(geom_.n_elements()) * std::norm(y[static_cast<Eigen::Index>(i)]);
    return g;
  }

 private:
  CodebookKind kind_;
  ArrayGeometry geom_;
  std::size_t oversampling_;
  CMatrix words_;
  std::vector<CodewordLabel> labels_;
};

inline double dft_sin_theta(std::size_t k, std::size_t size) {
  return (2.0 * static_cast<double>(k) - static_cast<double>(size) + 1.0) / static_cast<double>(size);
}

inline Codebook build_dft_codebook(const ArrayGeometry& g, std::size_t oversampling = 1) {
  require(oversampling >= 1, "oversampling must be at least 1");
  const std::size_t s = oversampling * g.n_elements();
  Codebook cb(CodebookKind::Dft, g, oversampling);
  for (std::size_t k = 0; k < s; ++k) {
    const double u = dft_sin_theta(k, s);
    cb.add(ff_steering_sin(g, u), {k, u, std::nullopt});
  }
  return cb;
}

/// Range samples along one angle, stepping by the far beam-depth edge until
/// the EBRD is crossed. Samples at or past the Rayleigh distance are dropped.
inline std::vector<double> polar_range_samples(const ArrayGeometry& g, double angle, double min_range) {
  require(min_range >= g.aperture(), "min_range must be at least the aperture");
  const double rd = rayleigh_distance(g);
  const double limit = ebrd(g, angle);
  std::vector<double> out{min_range};
  double r = min_range;
  while (r < limit) {
    const auto bd = beam_depth_3db(g, {r, angle});
    if (!bd.far_edge || *bd.far_edge >= rd) break;
    r = *bd.far_edge;
    out.push_back(r);
  }
  return out;
}

inline std::vector<double> uniform_sin_angles(std::size_t count) {
  std::vector<double> a(count);
  for (std::size_t k = 0; k < count; ++k) a[k] = std::asin(dft_sin_theta(k, count));
  return a;
}

inline Codebook build_polar_codebook(const ArrayGeometry& g, std::size_t angle_count, double min_range) {
  require(angle_count >= 1, "angle_count must be positive");
  require(min_range >= g.aperture(), "min_range must be at least the aperture");
  Codebook cb(CodebookKind::Polar, g);
  std::size_t idx = 0;
  for (std::size_t k = 0; k < angle_count; ++k) {
    const double u = dft_sin_theta(k, angle_count);
    const double th = std::asin(u);
    for (double r : polar_range_samples(g, th, min_range)) cb.add(nf_steering(g, {r, th}), {idx++, u, r});
  }
  return cb;
}

}  // namespace nfisac
