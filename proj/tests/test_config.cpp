#include <gtest/gtest.h>

#include "support.hpp"

using namespace nfisac;
using namespace nfisac::testing;
namespace fs = std::filesystem;

TEST(Config, DefaultsAreTheCaseStudy) {
  const ScenarioConfig c;
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(c.geometry(), case_geometry());
  EXPECT_EQ(c.waveform(), WaveformParams{});
  EXPECT_EQ(c.training_cells(), 4096u);
  EXPECT_DOUBLE_EQ(c.noise_power(), 1.0);
  EXPECT_DOUBLE_EQ(c.loading(), 1.0);
  EXPECT_EQ(c.targets.size(), 2u);
  EXPECT_EQ(range_bin_of(c.waveform(), c.targets[0].range_m), 40u);
}

TEST(Config, EmptyDocumentGivesDefaults) {
  EXPECT_EQ(to_json(config_from_json(json::object())), to_json(ScenarioConfig{}));
}

TEST(Config, EffectiveJsonRoundTrips) {
  auto c = config_from_json(json::parse(R"({"candidates": {"l_c": 6, "n_c": 3}, "clutter": {"sector_deg": [-60, 45.5]},
                                            "user": {"range_m": 12.25, "angle_deg": -7.5}, "seed": 99})"));
  const auto j = to_json(c);
  EXPECT_EQ(to_json(config_from_json(j)), j);
  EXPECT_EQ(j["training"]["k_cells"], 4 * 128 * 3);
  EXPECT_DOUBLE_EQ(c.clutter().sector_lo, -60 * kDeg);
}

TEST(Config, UnknownKeysAreRejected) {
  for (const char* doc : {R"({"geometry": {"n_elements": 8}, "bogus": 1})", R"({"geometry": {"elements": 8}})",
                          R"({"targets": [{"range_m": 5, "angle_deg": 0, "speed": 2}]})", R"({"evaluation": {"k": 1}})"})
    EXPECT_THROW(config_from_json(json::parse(doc)), ConfigError) << doc;
}

TEST(Config, WrongTypesAreRejected) {
  for (const char* doc : {R"({"geometry": {"n_elements": "256"}})", R"({"geometry": {"n_elements": -4}})",
                          R"({"geometry": {"n_elements": 2.5}})", R"({"clutter": {"enabled": 1}})",
                          R"({"clutter": {"sector_deg": [0]}})", R"({"targets": {"range_m": 5}})", R"({"geometry": 3})",
                          R"({"cfar": {"pfa": "small"}})", R"([1, 2])"})
    EXPECT_THROW(config_from_json(json::parse(doc)), ConfigError) << doc;
}

TEST(Config, OutOfRangeValuesAreRejected) {
  for (const char* doc :
       {R"({"geometry": {"n_elements": 1}})", R"({"cfar": {"pfa": 1.5}})", R"({"cfar": {"pfa": 0}})",
        R"({"targets": [{"range_m": -1, "angle_deg": 0}]})", R"({"targets": [{"range_m": 5, "angle_deg": 90}]})",
        R"({"targets": [{"range_m": 5}]})", R"({"training": {"k_cells": 7}})", R"({"candidates": {"n_c": 0}})",
        R"({"candidates": {"n_c": 300}})", R"({"waveform": {"m_pulses": 16}})", R"({"spread": {"threshold_db": 40}})",
        R"({"evaluation": {"velocity_max_mps": 5}})", R"({"clutter": {"sector_deg": [30, -30]}})",
        R"({"waveform": {"fs_mhz": 0.001}})"})
    EXPECT_THROW(config_from_json(json::parse(doc)), ConfigError) << doc;
}

TEST(Config, NullSweepSnrMeansNoiseless) {
  const auto c = config_from_json(json::parse(R"({"user": {"range_m": 10, "angle_deg": 0, "sweep_snr_db": null}})"));
  ASSERT_TRUE(c.user.has_value());
  EXPECT_TRUE(std::isinf(c.user->sweep_snr_db));
  EXPECT_TRUE(to_json(c)["user"]["sweep_snr_db"].is_null());
}

TEST(Config, UserDefaultsToTheTargetCentroid) {
  const ScenarioConfig c;
  const auto u = c.effective_user();
  EXPECT_DOUBLE_EQ(u.range_m, 15.5);
  EXPECT_DOUBLE_EQ(u.angle_deg, 5.0);
  ScenarioConfig empty;
  empty.targets.clear();
  EXPECT_THROW(empty.effective_user(), ConfigError);
}

TEST(Config, HashIgnoresTheSeedOnly) {
  ScenarioConfig a, b;
  b.seed = 12345;
  const auto pa = provenance_of(a), pb = provenance_of(b);
  EXPECT_EQ(pa.config_hash, pb.config_hash);
  EXPECT_NE(pa.seed, pb.seed);
  b.pfa = 1e-5;
  EXPECT_NE(provenance_of(b).config_hash, pa.config_hash);
  EXPECT_EQ(pa.version, std::string(kVersion));
}

TEST(Config, CacheKeyTracksTableInputs) {
  ScenarioConfig a, b;
  b.pfa = 1e-3;
  b.seed = 5;
  EXPECT_EQ(table_cache_key(a), table_cache_key(b));
  b.profile_floor_db = 20;
  EXPECT_NE(table_cache_key(a), table_cache_key(b));
}

TEST(Config, MissingFileIsAConfigError) { EXPECT_THROW(load_config("/nonexistent/cfg.json"), ConfigError); }

TEST(Presets, AllLoadAndKeepAThousandfoldReduction) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(NFISAC_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    ++n;
    ScenarioConfig c;
    ASSERT_NO_THROW(c = load_config(e.path())) << e.path();
    const auto w = c.waveform();
    EXPECT_GE(complexity_report(w.range_bins(), w.n_pulses, c.n_elements, c.l_c, c.n_c).reduction_factor, 1000.0)
        << e.path();
  }
  EXPECT_GE(n, 4u);
}

TEST(Presets, CaseStudyFileEqualsBuiltInDefaultsApartFromTheUser) {
  auto c = load_config(fs::path(NFISAC_CONFIG_DIR) / "case_study.json");
  ASSERT_TRUE(c.user.has_value());
  EXPECT_DOUBLE_EQ(c.user->range_m, ScenarioConfig{}.effective_user().range_m);
  c.user.reset();
  EXPECT_EQ(to_json(c), to_json(ScenarioConfig{}));
}
