#include "beamcurve/edgemap.hpp"

#include "beamcurve/pgm.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

using namespace beamcurve;

namespace {

ScoredCurve make_curve(double score, std::vector<Pixel> pixels) {
  ScoredCurve c;
  c.score = score;
  c.a = pixels.front();
  c.b = pixels.back();
  c.length = static_cast<double>(pixels.size() - 1);
  c.pixels = std::move(pixels);
  return c;
}

std::vector<Pixel> hline(int y, int x0, int x1) {
  std::vector<Pixel> out;
  for (int x = x0; x <= x1; ++x) out.push_back({x, y});
  return out;
}

}  // namespace

TEST_CASE("empty curve list paints nothing") {
  const Raster map = build_edge_map({}, 16, 16, 0.5);
  CHECK((map == 0.0).all());
}

TEST_CASE("duplicate curve is suppressed, first score wins") {
  const std::vector<ScoredCurve> curves = {make_curve(5.0, hline(4, 2, 12)),
                                           make_curve(3.0, hline(4, 2, 12))};
  const Raster map = build_edge_map(curves, 16, 16, 0.5);
  for (int x = 2; x <= 12; ++x) CHECK(map(4, x) == 5.0);
  CHECK((map > 0.0).count() == 11);
}

TEST_CASE("disjoint curves both paint with their own scores") {
  const std::vector<ScoredCurve> curves = {make_curve(5.0, hline(2, 1, 10)),
                                           make_curve(3.0, hline(12, 1, 10))};
  const Raster map = build_edge_map(curves, 16, 16, 0.5);
  CHECK(map(2, 5) == 5.0);
  CHECK(map(12, 5) == 3.0);
}

TEST_CASE("painting never lowers a pixel") {
  // crossing curves: the lower-scoring one keeps the higher value at the
  // crossing pixel
  std::vector<Pixel> vertical;
  for (int y = 0; y <= 10; ++y) vertical.push_back({5, y});
  const std::vector<ScoredCurve> curves = {make_curve(7.0, hline(5, 0, 10)),
                                           make_curve(2.0, vertical)};
  const Raster map = build_edge_map(curves, 16, 16, 0.5);
  CHECK(map(5, 5) == 7.0);
  CHECK(map(0, 5) == 2.0);
}

TEST_CASE("every positive value equals an accepted curve score") {
  const std::vector<ScoredCurve> curves = {make_curve(4.5, hline(3, 0, 9)),
                                           make_curve(2.25, hline(9, 2, 13)),
                                           make_curve(1.0, hline(3, 0, 9))};
  const Raster map = build_edge_map(curves, 16, 16, 0.5);
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    const double v = map.data()[i];
    CHECK((v == 0.0 || v == 4.5 || v == 2.25));
  }
}

TEST_CASE("mostly-covered curve is discarded whole") {
  // second curve shares 8 of 11 pixels: above the 0.5 overlap fraction, so
  // its fresh tail must not appear
  const std::vector<ScoredCurve> curves = {make_curve(5.0, hline(4, 0, 10)),
                                           make_curve(3.0, hline(4, 3, 13))};
  const Raster map = build_edge_map(curves, 16, 16, 0.5);
  CHECK(map(4, 12) == 0.0);
  CHECK(map(4, 13) == 0.0);
  // with a permissive overlap fraction it paints
  const Raster map2 = build_edge_map(curves, 16, 16, 0.9);
  CHECK(map2(4, 12) == 3.0);
}

TEST_CASE("twin curve one pixel away counts as covered") {
  const std::vector<ScoredCurve> curves = {make_curve(5.0, hline(4, 0, 10)),
                                           make_curve(4.0, hline(5, 0, 10))};
  const Raster map = build_edge_map(curves, 16, 16, 0.5);
  CHECK((map.row(5) == 0.0).all());
}

TEST_CASE("binarize thresholds") {
  Raster map = Raster::Zero(8, 8);
  map(2, 2) = 1.0;
  map(3, 3) = 2.0;
  CHECK(binarize(map, 0.0).cast<int>().sum() == 2);
  CHECK(binarize(map, 1.5).cast<int>().sum() == 1);
  CHECK(binarize(map, 2.5).cast<int>().sum() == 0);
  CHECK_THROWS_AS(binarize(map, -1.0), std::invalid_argument);
  // monotone: raising the level never adds pixels
  int prev = 64;
  for (double level : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) {
    const int n = binarize(map, level).cast<int>().sum();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("painting is deterministic") {
  std::vector<ScoredCurve> curves;
  for (int i = 0; i < 20; ++i) {
    curves.push_back(make_curve(20.0 - i, hline(i % 13, 0, 10 + (i % 3))));
  }
  const Raster a = build_edge_map(curves, 16, 16, 0.5);
  const Raster b = build_edge_map(curves, 16, 16, 0.5);
  CHECK((a == b).all());
}

TEST_CASE("edge map save writes a sidecar with the scale") {
  Raster map = Raster::Zero(8, 8);
  map(4, 4) = 1.7;
  const std::string path = "/tmp/beamcurve_test_edgemap.pgm";
  save_edge_map(map, path);
  const Raster back = load_pgm(path);
  CHECK(back(4, 4) == doctest::Approx(1.7).epsilon(1e-3));
  std::ifstream side(path + ".scale");
  double lo = -1, hi = -1;
  side >> lo >> hi;
  CHECK(lo == 0.0);
  CHECK(hi == doctest::Approx(1.7));
  std::remove(path.c_str());
  std::remove((path + ".scale").c_str());
}
