// Command-line front end: synthetic image generation, detection, threshold
// calibration, SNR sweeps and complexity benchmarks.

#include "beamcurve/beamtree.hpp"
#include "beamcurve/canny.hpp"
#include "beamcurve/edgemap.hpp"
#include "beamcurve/eval.hpp"
#include "beamcurve/image.hpp"
#include "beamcurve/pgm.hpp"
#include "beamcurve/random.hpp"
#include "beamcurve/scoring.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace beamcurve;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string config_echo(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
  return os.str();
}

struct SynthArgs {
  std::string out;
  std::string pattern_file;
  int size = 129;
  double snr = 2.0;
  bool clean = false;
  double sigma = 0.1;
  double sp_fraction = 0.01;
  std::uint64_t seed = 1;
};

int run_synth(const SynthArgs& a) {
  const PatternSpec spec = a.pattern_file.empty()
                               ? simulation_pattern(a.size)
                               : load_pattern_spec(a.pattern_file);
  Raster img = synth_pattern(spec);
  double contrast = 1.0;
  if (!a.clean) {
    contrast = a.snr * a.sigma;
    img *= contrast;
    NoiseSpec ns;
    ns.sigma = a.sigma;
    ns.sp_fraction = a.sp_fraction;
    ns.seed = a.seed;
    img = add_noise(img, ns);
  }
  save_pgm(img, a.out, 16);
  std::ostringstream meta;
  meta << "sigma " << (a.clean ? 0.0 : a.sigma) << "\n"
       << "snr " << (a.clean ? std::numeric_limits<double>::infinity() : a.snr)
       << "\n"
       << "contrast " << contrast << "\n"
       << "seed " << a.seed << "\n"
       << "sp_fraction " << (a.clean ? 0.0 : a.sp_fraction) << "\n";
  write_file(a.out + ".meta", meta.str());
  std::cout << "wrote " << a.out << " (" << spec.size << "x" << spec.size
            << ", contrast " << contrast << ")\n";
  return 0;
}

struct DetectArgs {
  std::string in;
  std::string out = "edges.pgm";
  std::string curves_out;
  std::string mode = "basic";
  int k = 2;
  int w = 4;
  double sigma = 0.0;  // 0 = estimate from the image
  double beta = 0.65;
  int n_min = 5;
  double overlap = 0.35;
  int threads = 0;
};

int run_detect(const DetectArgs& a) {
  const Raster img = load_pgm(a.in);
  DetectorParams dp;
  dp.filter.width = a.w;
  dp.sigma = a.sigma > 0.0 ? a.sigma : estimate_sigma(img);
  if (dp.sigma <= 0.0) {
    throw std::runtime_error("estimated noise level is zero; pass --sigma");
  }
  dp.beta = a.beta;
  dp.n_min = a.n_min;
  dp.threads = a.threads;
  dp.mode = a.mode == "fast" ? MergeMode::best_k(a.k) : MergeMode::basic();
  const BeamTree tree = build_beam_tree(img, dp);
  const std::vector<ScoredCurve> curves = collect_curves(tree);
  const Raster map =
      build_edge_map(curves, width(img), height(img), a.overlap);
  save_edge_map(map, a.out);
  if (!a.curves_out.empty()) write_file(a.curves_out, format_curves(curves));
  std::cout << "sigma " << dp.sigma << "\n";
  std::cout << "curves " << curves.size() << "\n";
  for (std::size_t i = 0; i < curves.size() && i < 5; ++i) {
    std::cout << "  score " << curves[i].score << " length "
              << curves[i].length << "\n";
  }
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

struct CalibrateArgs {
  std::string out_dir = "calibration";
  int size = 129;
  double sigma = 1.0;
  int trials = 20;
  int w = 4;
  int n_min = 5;
  int threads = 0;
  std::uint64_t seed = 1;
};

int run_calibrate(const CalibrateArgs& a) {
  fs::create_directories(a.out_dir);
  const CalibrationResult r = calibrate_beta(a.size, a.sigma, a.trials, a.seed,
                                             a.w, a.n_min, a.threads);
  write_file(fs::path(a.out_dir) / "max_contrast.txt", format_calibration(r));
  write_file(fs::path(a.out_dir) / "config.txt",
             config_echo({{"command", "calibrate"},
                          {"size", std::to_string(a.size)},
                          {"sigma", std::to_string(a.sigma)},
                          {"trials", std::to_string(a.trials)},
                          {"w", std::to_string(a.w)},
                          {"n_min", std::to_string(a.n_min)},
                          {"seed", std::to_string(a.seed)}}));
  std::cout << "beta " << r.beta << " (" << r.bins.size() << " length bins)\n";
  std::cout << "wrote " << a.out_dir << "/max_contrast.txt\n";
  return 0;
}

struct SweepArgs {
  std::string out_dir = "sweep";
  std::string pattern_file;
  int size = 129;
  double snr_from = 0.6, snr_to = 2.6, snr_step = 0.2;
  int seeds = 10;
  double sigma = 0.1;
  int k = 2;
  int w = 4;
  double beta = 0.65;
  int n_min = 5;
  double overlap = 0.35;
  int threads = 0;
  std::uint64_t seed = 1;
};

int run_sweep(const SweepArgs& a) {
  fs::create_directories(a.out_dir);
  const PatternSpec spec = a.pattern_file.empty()
                               ? simulation_pattern(a.size)
                               : load_pattern_spec(a.pattern_file);
  std::vector<double> grid;
  for (double v = a.snr_from; v <= a.snr_to + 1e-9; v += a.snr_step) {
    grid.push_back(v);
  }
  DetectorConfig cfg;
  cfg.filter.width = a.w;
  cfg.beta = a.beta;
  cfg.n_min = a.n_min;
  cfg.k = a.k;
  cfg.overlap_fraction = a.overlap;
  cfg.threads = a.threads;
  const SweepReport r = snr_sweep(spec, grid, a.seeds, a.sigma, cfg, a.seed);
  write_file(fs::path(a.out_dir) / "sweep.txt", format_sweep(r));
  write_file(fs::path(a.out_dir) / "sweep.csv", sweep_csv(r));
  write_file(fs::path(a.out_dir) / "config.txt",
             config_echo({{"command", "sweep"},
                          {"size", std::to_string(spec.size)},
                          {"snr_from", std::to_string(a.snr_from)},
                          {"snr_to", std::to_string(a.snr_to)},
                          {"snr_step", std::to_string(a.snr_step)},
                          {"seeds", std::to_string(a.seeds)},
                          {"sigma", std::to_string(a.sigma)},
                          {"k", std::to_string(a.k)},
                          {"w", std::to_string(a.w)},
                          {"beta", std::to_string(a.beta)},
                          {"seed", std::to_string(a.seed)}}));
  std::cout << format_sweep(r);
  std::cout << "wrote " << a.out_dir << "/sweep.csv\n";
  return 0;
}

struct BenchArgs {
  std::string out_dir = "bench";
  std::vector<int> sizes = {65, 129, 257};
  int k = 2;
  int repeats = 1;
  int threads = 0;
  std::uint64_t seed = 1;
};

int run_bench(const BenchArgs& a) {
  fs::create_directories(a.out_dir);
  const BenchReport r = benchmark(a.sizes, a.k, a.repeats, a.threads, a.seed);
  write_file(fs::path(a.out_dir) / "bench.txt", format_bench(r));
  write_file(fs::path(a.out_dir) / "bench.csv", bench_csv(r));
  std::ostringstream sizes;
  for (std::size_t i = 0; i < a.sizes.size(); ++i) {
    sizes << (i ? "," : "") << a.sizes[i];
  }
  write_file(fs::path(a.out_dir) / "config.txt",
             config_echo({{"command", "bench"},
                          {"sizes", sizes.str()},
                          {"k", std::to_string(a.k)},
                          {"repeats", std::to_string(a.repeats)},
                          {"seed", std::to_string(a.seed)}}));
  std::cout << format_bench(r);
  std::cout << "wrote " << a.out_dir << "/bench.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curved-edge detector over a hierarchical binary partition"};
  app.require_subcommand(1);

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "Render a test pattern, optionally noisy");
  synth->add_option("--out", sa.out, "output PGM path")->required();
  synth->add_option("--pattern", sa.pattern_file, "pattern spec file (default: built-in)");
  synth->add_option("--size", sa.size, "canvas side, default 129");
  synth->add_option("--snr", sa.snr, "edge contrast / sigma, default 2.0");
  synth->add_flag("--clean", sa.clean, "skip noise, keep unit contrast");
  synth->add_option("--sigma", sa.sigma, "noise level, default 0.1");
  synth->add_option("--sp-fraction", sa.sp_fraction, "salt-and-pepper fraction, default 0.01");
  synth->add_option("--seed", sa.seed, "noise seed");

  DetectArgs da;
  CLI::App* detect = app.add_subcommand("detect", "Detect curved edges in an image");
  detect->add_option("--in", da.in, "input PGM path")->required();
  detect->add_option("--out", da.out, "edge map PGM path");
  detect->add_option("--curves", da.curves_out, "accepted-curve dump path");
  detect->add_option("--mode", da.mode, "basic | fast")
      ->check(CLI::IsMember({"basic", "fast"}));
  detect->add_option("--k", da.k, "interface pixels scanned in fast mode, default 2");
  detect->add_option("--w", da.w, "filter samples per side, default 4");
  detect->add_option("--sigma", da.sigma, "noise level; 0 estimates it from the image");
  detect->add_option("--beta", da.beta, "search-space exponent, default 0.65");
  detect->add_option("--n-min", da.n_min, "leaf tile side bound, default 5");
  detect->add_option("--overlap", da.overlap, "overlap fraction for suppression, default 0.35");
  detect->add_option("--threads", da.threads, "worker threads; 0 = all cores");

  CalibrateArgs ca;
  CLI::App* calibrate = app.add_subcommand("calibrate", "Fit the search-space exponent on pure noise");
  calibrate->add_option("--out-dir", ca.out_dir, "run directory");
  calibrate->add_option("--size", ca.size, "image side, default 129");
  calibrate->add_option("--sigma", ca.sigma, "noise level, default 1.0");
  calibrate->add_option("--trials", ca.trials, "noise images, default 20");
  calibrate->add_option("--w", ca.w, "filter samples per side, default 4");
  calibrate->add_option("--n-min", ca.n_min, "leaf tile side bound, default 5");
  calibrate->add_option("--threads", ca.threads, "worker threads; 0 = all cores");
  calibrate->add_option("--seed", ca.seed, "master seed");

  SweepArgs wa;
  CLI::App* sweep = app.add_subcommand("sweep", "F-measure across an SNR grid");
  sweep->add_option("--out-dir", wa.out_dir, "run directory");
  sweep->add_option("--pattern", wa.pattern_file, "pattern spec file (default: built-in)");
  sweep->add_option("--size", wa.size, "canvas side, default 129");
  sweep->add_option("--snr-from", wa.snr_from, "grid start, default 0.6");
  sweep->add_option("--snr-to", wa.snr_to, "grid end, default 2.6");
  sweep->add_option("--snr-step", wa.snr_step, "grid step, default 0.2");
  sweep->add_option("--seeds", wa.seeds, "noise seeds per SNR, default 10");
  sweep->add_option("--sigma", wa.sigma, "noise level, default 0.1");
  sweep->add_option("--k", wa.k, "fast-mode k, default 2");
  sweep->add_option("--w", wa.w, "filter samples per side, default 4");
  sweep->add_option("--beta", wa.beta, "search-space exponent, default 0.65");
  sweep->add_option("--n-min", wa.n_min, "leaf tile side bound, default 5");
  sweep->add_option("--overlap", wa.overlap, "overlap fraction, default 0.35");
  sweep->add_option("--threads", wa.threads, "worker threads; 0 = all cores");
  sweep->add_option("--seed", wa.seed, "master seed");

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "Operation counts and wall time per image size");
  bench->add_option("--out-dir", ba.out_dir, "run directory");
  bench->add_option("--sizes", ba.sizes, "image sides, default 65 129 257");
  bench->add_option("--k", ba.k, "fast-mode k, default 2");
  bench->add_option("--repeats", ba.repeats, "repeats per size, default 1");
  bench->add_option("--threads", ba.threads, "worker threads; 0 = all cores");
  bench->add_option("--seed", ba.seed, "noise seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (synth->parsed()) return run_synth(sa);
    if (detect->parsed()) return run_detect(da);
    if (calibrate->parsed()) return run_calibrate(ca);
    if (sweep->parsed()) return run_sweep(wa);
    if (bench->parsed()) return run_bench(ba);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
