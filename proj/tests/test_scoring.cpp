#include "beamcurve/scoring.hpp"

#include <doctest.h>

#include <cmath>

using namespace beamcurve;

namespace {

ThresholdParams paper_setting() {
  ThresholdParams tp;
  tp.sigma = 1.0;
  tp.width = 4;
  tp.pixels = 129.0 * 129.0;
  tp.beta = 0.65;
  return tp;
}

}  // namespace

TEST_CASE("search space size") {
  const double N = 129.0 * 129.0;
  CHECK(log_search_space(0.0, N, 0.65) == doctest::Approx(std::log(6.0 * N)));
  CHECK(log_search_space(100.0, N, 0.65) ==
        doctest::Approx(std::log(99846.0) + 65.0 * std::log(2.0)).epsilon(1e-6));
  CHECK(log_search_space(100.0, N, 0.65) == doctest::Approx(56.566).epsilon(1e-3));
  // strictly increasing in length and pixel count
  CHECK(log_search_space(10.0, N, 0.65) < log_search_space(11.0, N, 0.65));
  CHECK(log_search_space(10.0, N, 0.65) < log_search_space(10.0, 2.0 * N, 0.65));
  CHECK_THROWS_AS(log_search_space(-1.0, N, 0.65), std::invalid_argument);
}

TEST_CASE("length threshold values") {
  const ThresholdParams tp = paper_setting();
  CHECK(length_threshold(100.0, tp) ==
        doctest::Approx(std::sqrt(2.0 * 56.566 / 400.0)).epsilon(1e-3));
  CHECK(length_threshold(100.0, tp) == doctest::Approx(0.5318).epsilon(1e-3));
  CHECK_THROWS_AS(length_threshold(0.0, tp), std::invalid_argument);
  // linear in sigma
  ThresholdParams tp2 = tp;
  tp2.sigma = 2.0;
  CHECK(length_threshold(37.0, tp2) ==
        doctest::Approx(2.0 * length_threshold(37.0, tp)));
}

TEST_CASE("threshold is strictly decreasing in length") {
  const ThresholdParams tp = paper_setting();
  double prev = length_threshold(1.0, tp);
  for (double len = 2.0; len <= 400.0; len += 1.0) {
    const double t = length_threshold(len, tp);
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("asymptotic threshold") {
  const ThresholdParams tp = paper_setting();
  CHECK(asymptotic_threshold(tp) == doctest::Approx(0.4746).epsilon(1e-3));
  ThresholdParams wide = tp;
  wide.width = 8;
  CHECK(asymptotic_threshold(wide) ==
        doctest::Approx(asymptotic_threshold(tp) / std::sqrt(2.0)));
  // T(L) approaches the limit from above
  CHECK(length_threshold(1e4, tp) > asymptotic_threshold(tp));
  CHECK(length_threshold(1e4, tp) ==
        doctest::Approx(asymptotic_threshold(tp)).epsilon(0.02));
}

TEST_CASE("edge score boundary cases") {
  const ThresholdParams tp = paper_setting();
  const double L = 42.0;
  const double T = length_threshold(L, tp);
  // contrast exactly at the threshold scores zero
  CHECK(edge_score(T * tp.width * L, L, tp) == doctest::Approx(0.0));
  // zero contrast scores -T
  CHECK(edge_score(0.0, L, tp) == doctest::Approx(-T));
  // polarity-blind
  CHECK(edge_score(-3.0, L, tp) == edge_score(3.0, L, tp));
}

TEST_CASE("noiseless unit-contrast edge scores positive at the noisy-scene scale") {
  ThresholdParams tp = paper_setting();
  tp.sigma = 0.1;
  for (double len = 10.0; len <= 300.0; len += 5.0) {
    CHECK(length_threshold(len, tp) < 1.0);
    const double response = 1.0 * tp.width * len;  // contrast 1
    CHECK(edge_score(response, len, tp) > 0.0);
  }
}

TEST_CASE("score is invariant under joint rescaling of image and sigma") {
  ThresholdParams tp = paper_setting();
  const double L = 33.0;
  const double r = 1.7;
  ThresholdParams tp2 = tp;
  tp2.sigma *= 3.0;
  CHECK(edge_score(3.0 * r, L, tp2) == doctest::Approx(3.0 * edge_score(r, L, tp)));
}

TEST_CASE("calibration rejects bad arguments") {
  CHECK_THROWS_AS(calibrate_beta(65, 1.0, 0, 1), std::invalid_argument);
}

TEST_CASE("calibration on the paper setting lands in the documented band") {
  const CalibrationResult r = calibrate_beta(129, 1.0, 4, 71, 4, 5, 2);
  CHECK(r.beta > 0.4);
  CHECK(r.beta < 0.9);
  CHECK(r.bins.size() > 20);
  // bins are sorted by length and all carried enough samples
  for (std::size_t i = 1; i < r.bins.size(); ++i) {
    CHECK(r.bins[i].length > r.bins[i - 1].length);
    CHECK(r.bins[i].samples >= 10);
  }
  const std::string table = format_calibration(r);
  CHECK(table.find("# beta") != std::string::npos);
}

TEST_CASE("calibration exponent is scale free") {
  const CalibrationResult a = calibrate_beta(65, 1.0, 3, 5, 4, 5, 2);
  const CalibrationResult b = calibrate_beta(65, 2.0, 3, 6, 4, 5, 2);
  CHECK(std::abs(a.beta - b.beta) < 0.15);
}
