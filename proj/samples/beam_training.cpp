// Coarse-then-refine beam training for a handful of users, printed as a table.
//
//   sample_beam_training [snr_db]

#include <nfisac/nfisac.hpp>

#include <cstdio>
#include <cstdlib>

using namespace nfisac;

int main(int argc, char** argv) {
  const double snr = argc > 1 ? std::atof(argv[1]) : 30.0;
  ScenarioConfig cfg;  // 256 elements at 28 GHz
  const auto g = cfg.geometry();
  const auto dft = build_dft_codebook(g);
  const auto table = load_or_build_table(cfg, dft, default_cache_dir()).table;

  std::printf("RD %.2f m, EBRD(0) %.2f m, %zu table points\n", rayleigh_distance(g), ebrd(g, 0.0), table.size());
  std::printf("%8s %8s | %8s %8s | %8s %8s | %7s\n", "r", "deg", "coarse", "deg", "refined", "deg", "gain dB");

  const double deg = std::numbers::pi / 180.0;
  const PolarPoint users[] = {{4.0, -30 * deg}, {9.5, 12 * deg}, {15.5, 5 * deg}, {27.0, -3 * deg}, {45.0, 40 * deg}};
  std::uint64_t seed = 7;
  for (const auto& u : users) {
    TrainingOptions o;
    o.sweep_snr_db = snr;
    o.seed = seed++;
    const auto rep = run_training(dft, table, u, o);
    const double gain = 10 * std::log10(array_gain(nf_steering(g, rep.refined), g, u) / double(g.n_elements()));
    std::printf("%8.2f %8.2f | %8.2f %8.2f | %8.2f %8.2f | %7.2f\n", u.range, u.angle / deg, rep.coarse.range,
                rep.coarse.angle / deg, rep.refined.range, rep.refined.angle / deg, gain);
  }
}
