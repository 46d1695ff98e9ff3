#pragma once

#include <cstdint>
#include <string>

#include "error.hpp"

namespace nfisac {

using OpCount = unsigned __int128;

inline std::string to_string(OpCount v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.insert(s.begin(), char('0' + int(v % 10)));
    v /= 10;
  }
  return s;
}

/// Cubic-cost bookkeeping for full versus beamspace-reduced STAP.
struct ComplexityReport {
  std::uint64_t L = 0, M = 0, N = 0, l_c = 0, n_c = 0;
  OpCount full_ops = 0;     // L (M N)^3
  OpCount reduced_ops = 0;  // l_c (M n_c)^3
  double reduction_factor = 0.0;
};

inline ComplexityReport complexity_report(std::uint64_t L, std::uint64_t M, std::uint64_t N, std::uint64_t l_c,
                                          std::uint64_t n_c) {
  require(L > 0 && M > 0 && N > 0 && l_c > 0 && n_c > 0, "complexity inputs must be positive");
  ComplexityReport r{L, M, N, l_c, n_c};
  const OpCount mn = OpCount(M) * N, mnc = OpCount(M) * n_c;
  r.full_ops = OpCount(L) * mn * mn * mn;
  r.reduced_ops = OpCount(l_c) * mnc * mnc * mnc;
  // M cancels; the ratio is formed from the smaller integers to stay exact.
  const OpCount num = OpCount(L) * N * N * N, den = OpCount(l_c) * n_c * n_c * n_c;
  const OpCount q = num / den, rem = num % den;
  r.reduction_factor = static_cast<double>(q) + static_cast<double>(rem) / static_cast<double>(den);
  return r;
}

}  // namespace nfisac
