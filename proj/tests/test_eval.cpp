#include "beamcurve/eval.hpp"

#include "beamcurve/canny.hpp"
#include "beamcurve/edgemap.hpp"
#include "beamcurve/image.hpp"

#include <doctest.h>

using namespace beamcurve;

namespace {

Mask from_pixels(int size, const std::vector<Pixel>& px) {
  Mask m = Mask::Zero(size, size);
  for (const Pixel& p : px) m(p.y, p.x) = 1;
  return m;
}

}  // namespace

TEST_CASE("perfect detection scores one") {
  const Mask t = from_pixels(16, {{2, 2}, {3, 2}, {4, 2}, {10, 11}});
  const MatchResult m = f_measure(t, t);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f == 1.0);
}

TEST_CASE("empty detection scores zero") {
  const Mask t = from_pixels(16, {{2, 2}, {3, 2}});
  const Mask d = Mask::Zero(16, 16);
  const MatchResult m = f_measure(d, t);
  CHECK(m.f == 0.0);
  CHECK(m.recall == 0.0);
}

TEST_CASE("a one-pixel shift inside the tolerance still scores one") {
  std::vector<Pixel> line, shifted;
  for (int x = 2; x <= 13; ++x) {
    line.push_back({x, 5});
    shifted.push_back({x, 6});
  }
  const MatchResult m = f_measure(from_pixels(16, shifted), from_pixels(16, line), 2.0);
  CHECK(m.f == 1.0);
}

TEST_CASE("swapping detected and truth swaps precision and recall") {
  const Mask a = from_pixels(16, {{2, 2}, {3, 2}, {4, 2}, {8, 8}});
  const Mask b = from_pixels(16, {{2, 2}, {3, 3}});
  const MatchResult ab = f_measure(a, b);
  const MatchResult ba = f_measure(b, a);
  CHECK(ab.precision == doctest::Approx(ba.recall));
  CHECK(ab.recall == doctest::Approx(ba.precision));
  CHECK(ab.f == doctest::Approx(ba.f));
}

TEST_CASE("matching is one-to-one") {
  // two detections next to a single truth pixel: only one may match
  const Mask t = from_pixels(16, {{5, 5}});
  const Mask d = from_pixels(16, {{5, 5}, {6, 5}});
  const MatchResult m = f_measure(d, t);
  CHECK(m.matched == 1);
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == 1.0);
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(f_measure(Mask::Zero(8, 8), Mask::Zero(9, 9)),
                  std::invalid_argument);
}

TEST_CASE("best_f_measure picks the stronger level") {
  // strong truthful line at value 2, weak garbage at value 1
  Raster soft = Raster::Zero(16, 16);
  std::vector<Pixel> line;
  for (int x = 2; x <= 13; ++x) {
    soft(5, x) = 2.0;
    line.push_back({x, 5});
  }
  soft(12, 2) = soft(12, 7) = soft(12, 12) = 1.0;
  const Mask truth = from_pixels(16, line);
  const MatchResult best = best_f_measure(soft, truth);
  CHECK(best.f == 1.0);
  // the support-level F is lower
  CHECK(f_measure(binarize(soft, 0.0), truth).f < 1.0);
}

TEST_CASE("canny on a constant image is empty") {
  const Mask m = canny(Raster::Constant(33, 33, 0.4), 0.26, 0.65, 1.0);
  CHECK(m.cast<int>().sum() == 0);
}

TEST_CASE("canny self-consistency on the clean pattern") {
  const PatternSpec spec = simulation_pattern(129);
  const Mask truth = pattern_ground_truth(spec);
  const Mask redo = canny(synth_pattern(spec), 0.26, 0.65, 1.0);
  const MatchResult m = f_measure(redo, truth);
  CHECK(m.f >= 0.95);
  // the clean pattern yields a sensible number of thin edge pixels
  const int n = truth.cast<int>().sum();
  CHECK(n > 500);
  CHECK(n < 3000);
}

TEST_CASE("canny argument validation") {
  CHECK_THROWS_AS(canny(Raster::Zero(9, 9), -0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(canny(Raster::Zero(9, 9), 0.7, 0.5), std::invalid_argument);
}

TEST_CASE("sweep is deterministic and carries range aggregates") {
  const PatternSpec spec = simulation_pattern(65);
  DetectorConfig cfg;
  cfg.threads = 2;
  cfg.run_basic = false;  // keep the unit test quick
  const std::vector<double> grid = {1.4, 2.6};
  const SweepReport a = snr_sweep(spec, grid, 1, 0.1, cfg, 42);
  const SweepReport b = snr_sweep(spec, grid, 1, 0.1, cfg, 42);
  REQUIRE(a.rows.size() == 2);
  CHECK(a.rows[0].optimized.mean_f == b.rows[0].optimized.mean_f);
  CHECK(a.rows[1].canny.mean_f == b.rows[1].canny.mean_f);
  const std::string text = format_sweep(a);
  CHECK(text.find("range") != std::string::npos);
  const std::string csv = sweep_csv(a);
  CHECK(csv.find("snr,f_basic") == 0);
}

TEST_CASE("sweep input validation") {
  const PatternSpec spec = simulation_pattern(65);
  DetectorConfig cfg;
  CHECK_THROWS_AS(snr_sweep(spec, {}, 1, 0.1, cfg), std::invalid_argument);
  CHECK_THROWS_AS(snr_sweep(spec, {1.0}, 0, 0.1, cfg), std::invalid_argument);
}

TEST_CASE("benchmark requires ascending sizes") {
  CHECK_THROWS_AS(benchmark({129, 65}, 2), std::invalid_argument);
  CHECK_THROWS_AS(benchmark({}, 2), std::invalid_argument);
}

TEST_CASE("benchmark reports counters and slopes") {
  const BenchReport r = benchmark({33, 65}, 2, 1, 2, 7);
  REQUIRE(r.rows.size() == 4);
  for (const BenchRow& row : r.rows) {
    CHECK(row.concatenations > 0);
    CHECK(row.stored > 0);
  }
  // doubling the side multiplies basic concatenations by roughly 2^3
  const double ratio = static_cast<double>(r.rows[2].concatenations) /
                       static_cast<double>(r.rows[0].concatenations);
  const double expect = std::pow(65.0 * 65.0 / (33.0 * 33.0), 1.5);
  CHECK(ratio > 0.7 * expect);
  CHECK(ratio < 1.3 * expect);
  CHECK(r.basic_loglog_slope > 1.3);
  CHECK(r.basic_loglog_slope < 1.7);
  CHECK(bench_csv(r).find("size,mode") == 0);
  CHECK(format_bench(r).find("log-log slope") != std::string::npos);
}
