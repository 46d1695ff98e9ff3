#pragma once

// NFCUBE01: little-endian binary cube.
//   8 B magic "NFCUBE01" | u64 L, M, N | f64 f_r, f_s, B, f_c | L*M*N x (f64 re, f64 im), [l][m][n]

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "scene.hpp"

namespace nfisac {

static_assert(std::endian::native == std::endian::little, "NFCUBE01 I/O assumes a little-endian host");

inline constexpr std::array<char, 8> kCubeMagic{'N', 'F', 'C', 'U', 'B', 'E', '0', '1'};
inline constexpr std::size_t kCubeHeaderBytes = 8 + 3 * 8 + 4 * 8;

struct CubeHeader {
  std::uint64_t L = 0, M = 0, N = 0;
  double prf = 0, sample_rate = 0, bandwidth = 0, carrier_freq = 0;
};

/// Streams slabs in bin order. The header's L is the number of slabs that
/// will be written, which may be a prefix of the full range axis.
class CubeWriter {
 public:
  CubeWriter(const std::filesystem::path& p, const CubeHeader& h) : out_(p, std::ios::binary), h_(h) {
    if (!out_) throw ConfigError("cannot write " + p.string());
    out_.write(kCubeMagic.data(), 8);
    for (std::uint64_t v : {h.L, h.M, h.N}) put(v);
    for (double v : {h.prf, h.sample_rate, h.bandwidth, h.carrier_freq}) put(v);
  }

  void write(const Slab& s) {
    require(std::uint64_t(s.rows()) == h_.M && std::uint64_t(s.cols()) == h_.N, "slab shape differs from header");
    require(written_ < h_.L, "more slabs than the header declares");
    // std::complex<double> is layout-compatible with double[2]; Slab is row-major [m][n].
    out_.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(s.size() * sizeof(cd)));
    ++written_;
  }

  void close() {
    if (written_ != h_.L) throw InvalidArgument("cube closed before all declared slabs were written");
    out_.flush();
    if (!out_) throw ConfigError("cube write failed");
    out_.close();
  }

 private:
  template <class T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  std::ofstream out_;
  CubeHeader h_;
  std::uint64_t written_ = 0;
};

inline CubeHeader cube_header(const WaveformParams& w, std::size_t bins, std::size_t n_elements) {
  return {bins, w.n_pulses, n_elements, w.prf, w.sample_rate, w.bandwidth, w.carrier_freq};
}

inline void write_cube(const std::filesystem::path& p, const RadarCube& c) {
  CubeWriter wr(p, cube_header(c.params(), c.stored_bins(), c.elements()));
  Slab s;
  for (std::size_t l = c.first_bin(); l < c.first_bin() + c.stored_bins(); ++l) {
    c.slab(l, s);
    wr.write(s);
  }
  wr.close();
}

inline CubeHeader read_cube_header(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), 8);
  if (!in || magic != kCubeMagic) throw ConfigError("not an NFCUBE01 file");
  CubeHeader h;
  auto get = [&](auto& v) { in.read(reinterpret_cast<char*>(&v), sizeof v); };
  get(h.L), get(h.M), get(h.N), get(h.prf), get(h.sample_rate), get(h.bandwidth), get(h.carrier_freq);
  if (!in) throw ConfigError("truncated NFCUBE01 header");
  return h;
}

/// Loads a file written by CubeWriter. The cube covers bins [0, L) of a range
/// axis rebuilt from the stored waveform parameters.
inline RadarCube read_cube(const std::filesystem::path& p, double noise_power = 1.0) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  const auto h = read_cube_header(in);
  WaveformParams w;
  w.prf = h.prf;
  w.n_pulses = h.M;
  w.sample_rate = h.sample_rate;
  w.bandwidth = h.bandwidth;
  w.carrier_freq = h.carrier_freq;
  const auto expect = kCubeHeaderBytes + h.L * h.M * h.N * sizeof(cd);
  if (std::filesystem::file_size(p) != expect) throw ConfigError("NFCUBE01 payload size does not match header");
  RadarCube c(w, h.N, noise_power, 0, h.L);
  in.read(reinterpret_cast<char*>(c.data().data()), static_cast<std::streamsize>(c.data().size() * sizeof(cd)));
  if (!in) throw ConfigError("truncated NFCUBE01 payload");
  return c;
}

}  // namespace nfisac
