#include "beamcurve/image.hpp"
#include "beamcurve/pgm.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace beamcurve;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(BEAMCURVE_CLI_PATH) + " " + args +
                          " > /tmp/beamcurve_cli_out.txt 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool exists(const std::string& path) {
  std::ifstream f(path);
  return f.good();
}

}  // namespace

TEST_CASE("synth is reproducible and writes a metadata sidecar") {
  REQUIRE(run("synth --out /tmp/bc_a.pgm --snr 2 --seed 5") == 0);
  REQUIRE(run("synth --out /tmp/bc_b.pgm --snr 2 --seed 5") == 0);
  CHECK(slurp("/tmp/bc_a.pgm") == slurp("/tmp/bc_b.pgm"));
  CHECK(exists("/tmp/bc_a.pgm.meta"));
  const std::string meta = slurp("/tmp/bc_a.pgm.meta");
  CHECK(meta.find("sigma 0.1") != std::string::npos);
  CHECK(meta.find("seed 5") != std::string::npos);
  // different seed changes the file
  REQUIRE(run("synth --out /tmp/bc_c.pgm --snr 2 --seed 6") == 0);
  CHECK(slurp("/tmp/bc_a.pgm") != slurp("/tmp/bc_c.pgm"));

  const Raster img = load_pgm("/tmp/bc_a.pgm");
  CHECK(img.rows() == 129);
  CHECK(img.cols() == 129);
}

TEST_CASE("synth --clean emits the unscaled binary pattern") {
  REQUIRE(run("synth --out /tmp/bc_clean.pgm --clean --size 65") == 0);
  const Raster img = load_pgm("/tmp/bc_clean.pgm");
  CHECK(img.rows() == 65);
  CHECK(img.maxCoeff() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(img.minCoeff() == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("detect produces an edge map, curve dump and sidecar") {
  REQUIRE(run("synth --out /tmp/bc_in.pgm --size 65 --snr 2.4 --seed 3") == 0);
  REQUIRE(run("detect --in /tmp/bc_in.pgm --out /tmp/bc_edges.pgm "
              "--curves /tmp/bc_curves.txt --sigma 0.1 --threads 2") == 0);
  CHECK(exists("/tmp/bc_edges.pgm"));
  CHECK(exists("/tmp/bc_edges.pgm.scale"));
  CHECK(exists("/tmp/bc_curves.txt"));
  const std::string out = slurp("/tmp/beamcurve_cli_out.txt");
  CHECK(out.find("curves") != std::string::npos);
  const Raster edges = load_pgm("/tmp/bc_edges.pgm");
  CHECK(edges.maxCoeff() > 0.0);  // the pattern produces detections
}

TEST_CASE("detect on a missing input exits nonzero and writes nothing") {
  std::remove("/tmp/bc_missing_edges.pgm");
  CHECK(run("detect --in /tmp/does_not_exist.pgm --out /tmp/bc_missing_edges.pgm") != 0);
  CHECK(!exists("/tmp/bc_missing_edges.pgm"));
}

TEST_CASE("fast mode flag is accepted") {
  REQUIRE(run("detect --in /tmp/bc_in.pgm --out /tmp/bc_edges_fast.pgm "
              "--mode fast --k 2 --sigma 0.1 --threads 2") == 0);
  CHECK(exists("/tmp/bc_edges_fast.pgm"));
}

TEST_CASE("bench writes csv, text and an echoed config") {
  REQUIRE(run("bench --sizes 33 65 --out-dir /tmp/bc_bench --threads 2") == 0);
  CHECK(exists("/tmp/bc_bench/bench.csv"));
  CHECK(exists("/tmp/bc_bench/bench.txt"));
  const std::string cfg = slurp("/tmp/bc_bench/config.txt");
  CHECK(cfg.find("command = bench") != std::string::npos);
  CHECK(cfg.find("sizes = 33,65") != std::string::npos);
}

TEST_CASE("calibrate writes the two-column table") {
  REQUIRE(run("calibrate --size 65 --trials 2 --out-dir /tmp/bc_cal "
              "--threads 2 --seed 9") == 0);
  const std::string table = slurp("/tmp/bc_cal/max_contrast.txt");
  CHECK(table.find("# length max_contrast") == 0);
  CHECK(table.find("# beta ") != std::string::npos);
  CHECK(slurp("/tmp/bc_cal/config.txt").find("command = calibrate") !=
        std::string::npos);
}

TEST_CASE("sweep writes a table over the requested grid") {
  REQUIRE(run("sweep --size 65 --snr-from 2.0 --snr-to 2.4 --snr-step 0.4 "
              "--seeds 1 --out-dir /tmp/bc_sweep --threads 2") == 0);
  const std::string csv = slurp("/tmp/bc_sweep/sweep.csv");
  CHECK(csv.find("snr,f_basic") == 0);
  // two grid points -> header + two rows
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 3);
  CHECK(slurp("/tmp/bc_sweep/config.txt").find("seeds = 1") != std::string::npos);
}

TEST_CASE("unknown subcommand fails") {
  CHECK(run("frobnicate") != 0);
}
