#pragma once

#include "beamcurve/response.hpp"

#include <cstdint>
#include <vector>

namespace beamcurve {

/// Inputs of the length-dependent detection threshold.
struct ThresholdParams {
  double sigma = 1.0;   // noise level (intensity units)
  int width = 4;        // matched-filter samples per side
  double pixels = 0.0;  // N, total image pixel count
  double beta = 0.65;   // search-space exponent per unit curve length
};

/// Noise level of the filter statistic, per sample pair: the response is a
/// difference of two side means, so each sample pair carries sqrt(2) times
/// the pixel noise. This is the sigma the threshold theory and the
/// calibration fit operate on.
inline double filter_noise(double pixel_sigma) {
  return 1.4142135623730951 * pixel_sigma;
}

/// Noise scale the detector plugs into the threshold: the filter noise plus
/// a 6% envelope margin so the threshold clears the measured pure-noise
/// response maxima (max statistics fluctuate above their expectation, and
/// neighboring bilinear samples share pixels). Calibrated on pure-noise
/// runs.
inline double detection_noise(double pixel_sigma) {
  return 1.5 * pixel_sigma;
}

/// ln K_L where K_L = 6N * 2^(beta L) models the number of distinct
/// candidate curves of length L in the tree.
double log_search_space(double length, double pixels, double beta);

/// T(L) = sigma * sqrt(2 ln(6N 2^(beta L)) / (w L)): the maximal mean
/// contrast expected among that many pure-noise curves. Strictly decreasing
/// in L.
double length_threshold(double length, const ThresholdParams& tp);

/// Large-L limit of the threshold: sigma * sqrt(2 beta ln2 / w).
double asymptotic_threshold(const ThresholdParams& tp);

/// |mean contrast| - T(L). Positive means statistically significant.
double edge_score(double response, double length, const ThresholdParams& tp);
double edge_score(const ResponseVector& rv, const ThresholdParams& tp);

struct CalibrationBin {
  double length = 0.0;    // bin representative (center of the unit bin)
  double max_contrast = 0.0;
  std::int64_t samples = 0;
};

struct CalibrationResult {
  double beta = 0.0;
  std::vector<CalibrationBin> bins;  // ascending length, sparse bins dropped
};

/// Empirical calibration of the search-space exponent: builds beam-curve
/// trees over pure-noise images (selection by |contrast|), records the
/// maximal |contrast| per unit-width length bin, drops bins with fewer than
/// 10 samples, and least-squares fits
///   max|C|^2 w L / (2 sigma^2) - ln(6N)  against  L ln 2.
/// Throws if fewer than two usable bins remain.
CalibrationResult calibrate_beta(int image_size, double sigma, int trials,
                                 std::uint64_t seed, int filter_width = 4,
                                 int n_min = 5, int threads = 0);

/// Two-column text table (length, max contrast) followed by the fitted
/// exponent; consumed by the plot-oriented CLI output.
std::string format_calibration(const CalibrationResult& r);

}  // namespace beamcurve
