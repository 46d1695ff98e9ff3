#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#ifndef NFISAC_VERSION
#define NFISAC_VERSION "0.0.0"
#endif

namespace nfisac {

inline constexpr std::string_view kVersion = NFISAC_VERSION;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Stamped on every artifact. config_hash is FNV-1a over the canonical
/// (sorted-key, compact) JSON dump of the effective configuration.
struct Provenance {
  std::string config_hash = "0000000000000000";
  std::uint64_t seed = 0;
  std::string version{kVersion};

  static Provenance of(const nlohmann::json& effective_config, std::uint64_t seed) {
    return {hex64(fnv1a64(effective_config.dump())), seed, std::string(kVersion)};
  }

  nlohmann::json to_json() const { return {{"config_hash", config_hash}, {"seed", seed}, {"version", version}}; }

  /// "# nfisac <version> config=<hash> seed=<seed>" for text formats.
  std::string comment(char lead = '#') const {
    return std::string(1, lead) + " nfisac " + version + " config=" + config_hash + " seed=" + std::to_string(seed);
  }
};

}  // namespace nfisac
