// nfisac: train / sense / evaluate / cube-dump front end.

#include <CLI11.hpp>

#include <nfisac/nfisac.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace nfisac;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Numerical: return 3;
    case ErrorKind::Coverage: return 4;
    default: return 2;
  }
}

ScenarioConfig load(const Common& c) {
  auto cfg = c.config.empty() ? ScenarioConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

fs::path prepare_out(const Common& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + c.out + ": " + ec.message());
  return c.out;
}

void write_manifest(const fs::path& dir, const std::string& command, const Provenance& prov, const json& artifacts,
                    const json& extra = json::object()) {
  json m{{"command", command}, {"provenance", prov.to_json()}, {"artifacts", artifacts}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  // One manifest per command so train and sense can share a directory.
  const auto name = command.substr(0, command.find(' '));
  write_json_file(dir / ("manifest_" + name + ".json"), m);
}

void log(const std::string& s) { std::cerr << "nfisac: " << s << '\n'; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_train(const Common& c, bool noiseless) {
  const auto cfg = load(c);
  const auto dir = prepare_out(c);
  const auto prov = provenance_of(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto dft = build_dft_codebook(cfg.geometry());
  const auto tl = load_or_build_table(cfg, dft, default_cache_dir(), c.threads);
  log(std::string("spread table ") + (tl.from_cache ? "loaded from " : "built, cached at ") + tl.path.string());
  const auto rep = train(cfg, dft, tl.table, noiseless);
  write_json_file(dir / "training_report.json", to_json(rep, prov));
  write_json_file(dir / "dft_codebook.json", to_json(dft, prov));
  write_json_file(dir / "spread_table.json", to_json(tl.table, prov), -1);
  write_manifest(dir, "train", prov, {"training_report.json", "dft_codebook.json", "spread_table.json"},
                 {{"noiseless", noiseless}, {"table_cache", tl.path.string()}});
  std::printf("coarse  r=%.4f m theta=%.4f deg\nrefined r=%.4f m theta=%.4f deg\nbeams   %zu + %zu\n", rep.coarse.range,
              rep.coarse.angle * 180 / std::numbers::pi, rep.refined.range, rep.refined.angle * 180 / std::numbers::pi,
              rep.beams_swept, rep.refinement_beams);
  log("train done in " + detail::num(seconds_since(t0), 3) + " s");
  return 0;
}

int cmd_sense(const Common& c, const std::string& report_path) {
  const auto cfg = load(c);
  const auto dir = prepare_out(c);
  const auto prov = provenance_of(cfg);
  const fs::path rp = report_path.empty() ? dir / "training_report.json" : fs::path(report_path);
  if (!fs::exists(rp)) throw ConfigError("training report " + rp.string() + " not found; run 'nfisac train' first");
  const auto rep = report_from_json(read_json_file(rp));
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = sense(cfg, rep, c.threads);
  const auto& map = res.scan.map;
  write_map_csv(dir / "map.csv", map, prov);
  write_ppm(dir / "range_doppler.ppm", range_doppler_marginal(map), prov);
  write_ppm(dir / "angle_doppler.ppm", angle_doppler_marginal(map), prov);
  write_json_file(dir / "detections.json", detections_to_json(res.detections));
  write_manifest(dir, "sense", prov, {"map.csv", "range_doppler.ppm", "angle_doppler.ppm", "detections.json"},
                 {{"training_report", rp.string()},
                  {"detections", res.detections.size()},
                  {"covered_targets", res.covered_targets},
                  {"full_ops", to_string(res.scan.ops.full_ops)},
                  {"reduced_ops", to_string(res.scan.ops.reduced_ops)},
                  {"reduction_factor", res.scan.ops.reduction_factor}});
  for (const auto& d : res.detections)
    std::printf("target r=%.3f m v=%+.3f m/s theta=%.3f deg stat=%.1f dB\n", d.range_m, d.velocity_mps, d.angle_deg,
                d.statistic_db);
  log(std::to_string(res.detections.size()) + " detections in " + detail::num(seconds_since(t0), 3) + " s");
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& panel) {
  const auto cfg = load(c);
  const auto dir = prepare_out(c);
  const auto prov = provenance_of(cfg);
  if (panel == "sinr") {
    const auto curve = sinr_panel(cfg, cfg.training_cells(), c.threads);
    write_sinr_csv(dir / "sinr.csv", curve, prov);
    write_manifest(dir, "evaluate sinr", prov, {"sinr.csv"});
    for (std::size_t i = 0; i < curve.velocities.size(); ++i)
      if (curve.optimal_db[i] + 0.1 < curve.nf_stap_db[i] || curve.nf_stap_db[i] + 0.1 < curve.conventional_db[i])
        throw NumericalError("SINR ordering violated at v=" + detail::num(curve.velocities[i]) + " m/s");
  } else if (panel == "rate") {
    const auto dft = build_dft_codebook(cfg.geometry());
    const auto tl = load_or_build_table(cfg, dft, default_cache_dir(), c.threads);
    const auto curve = average_rate_curve(dft, tl.table, rate_distances(cfg), rate_options(cfg, c.threads));
    write_rate_csv(dir / "rate.csv", curve, prov);
    write_manifest(dir, "evaluate rate", prov, {"rate.csv"});
  } else if (panel == "transverse") {
    const auto d = transverse_distances(cfg);
    TransverseOptions o;
    o.angle = cfg.evaluation.transverse_angle_deg * std::numbers::pi / 180.0;
    write_transverse_csv(dir / "transverse.csv", d, transverse_resolution(cfg.geometry(), cfg.waveform(), d, o), prov);
    write_manifest(dir, "evaluate transverse", prov, {"transverse.csv"});
  } else if (panel == "complexity") {
    write_complexity_csv(dir / "complexity.csv", complexity_panel(cfg), prov);
    write_manifest(dir, "evaluate complexity", prov, {"complexity.csv"});
  } else {
    throw ConfigError("unknown panel '" + panel + "' (expected sinr, rate, transverse or complexity)");
  }
  log("wrote " + panel + " panel to " + dir.string());
  return 0;
}

int cmd_cube_dump(const Common& c, std::size_t max_bins) {
  const auto cfg = load(c);
  const auto dir = prepare_out(c);
  const auto prov = provenance_of(cfg);
  const auto g = cfg.geometry();
  const auto w = cfg.waveform();
  SceneSynthesizer synth(g, w, cfg.scene_targets(), cfg.clutter(), cfg.noise_power(), cfg.seed);
  const std::size_t bins = max_bins ? std::min(max_bins, synth.bins()) : synth.bins();
  CubeWriter out(dir / "cube.nfcube", cube_header(w, bins, g.n_elements()));
  Slab s;
  for (std::size_t l = 0; l < bins; ++l) {
    synth.slab(l, s);
    out.write(s);
  }
  out.close();
  write_manifest(dir, "cube-dump", prov, {"cube.nfcube"}, {{"bins", bins}, {"pulses", w.n_pulses}, {"elements", g.n_elements()}});
  log("wrote " + std::to_string(bins) + " x " + std::to_string(w.n_pulses) + " x " + std::to_string(g.n_elements()) +
      " cube");
  return 0;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Scenario JSON (defaults to the built-in case study)")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "Override the config seed");
  sub->add_option("--threads", c.threads, "Worker cap (0 = all cores)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-field ISAC beam training and NF-STAP sensing"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;
  bool noiseless = false;
  std::string report, panel;
  std::size_t max_bins = 64;

  auto* tr = app.add_subcommand("train", "DFT sweep, spread lookup and polar refinement for the user");
  add_common(tr, common);
  tr->add_flag("--noiseless", noiseless, "Sweep without measurement noise");

  auto* se = app.add_subcommand("sense", "Reduced NF-STAP scan and CFAR over the trained candidate window");
  add_common(se, common);
  se->add_option("--report", report, "Training report (default: OUT/training_report.json)");

  auto* ev = app.add_subcommand("evaluate", "Write one evaluation panel as CSV");
  add_common(ev, common);
  ev->add_option("--panel", panel, "sinr | rate | transverse | complexity")->required();

  auto* cd = app.add_subcommand("cube-dump", "Write the synthesized cube as NFCUBE01");
  add_common(cd, common);
  cd->add_option("--max-bins", max_bins, "Leading range bins to write (0 = all)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*tr) return cmd_train(common, noiseless);
    if (*se) return cmd_sense(common, report);
    if (*ev) return cmd_evaluate(common, panel);
    if (*cd) return cmd_cube_dump(common, max_bins);
  } catch (const Error& e) {
    log(std::string("error: ") + e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 3;
  }
  return 2;
}
