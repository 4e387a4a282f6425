#pragma once

#include "beamcurve/beamtree.hpp"
#include "beamcurve/image.hpp"
#include "beamcurve/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace beamcurve {

struct MatchResult {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  std::int64_t matched = 0;
  std::int64_t unmatched_detected = 0;
  std::int64_t unmatched_truth = 0;
};

/// Distance-tolerant one-to-one pixel matching (nearest pairs first), then
/// precision = matched/|detected|, recall = matched/|truth|,
/// F = 2PR/(P+R).
MatchResult f_measure(const Mask& detected, const Mask& truth,
                      double tolerance = 2.0);

/// Morphological thinning (Zhang-Suen) to one-pixel-wide ridges; the
/// boundary-matching protocol thins detections before correspondence.
Mask thin_mask(const Mask& m);

/// Benchmark-style score for a soft edge map: binarize at each candidate
/// level, thin, match; returns the best F over levels (weak detections may
/// be dropped wholesale when that helps). Levels are taken from the
/// distinct painted values.
MatchResult best_f_measure(const Raster& soft_map, const Mask& truth,
                           double tolerance = 2.0, int max_levels = 48);

/// Which detectors an experiment runs.
struct DetectorConfig {
  FilterParams filter{};
  double beta = 0.65;
  int n_min = 5;
  int k = 2;             // best-k parameter of the optimized mode
  double overlap_fraction = 0.35;
  double canny_low = 0.26;
  double canny_high = 0.65;
  double canny_sigma = 1.0;
  int threads = 0;
  bool run_basic = true;
  bool run_optimized = true;
  bool run_canny = true;
};

struct SweepCell {
  double mean_f = 0.0;
  double stderr_f = 0.0;
  double mean_seconds = 0.0;
};

struct SweepRow {
  double snr = 0.0;
  SweepCell basic, optimized, canny;
};

struct SweepRange {
  double lo = 0.0, hi = 0.0;
  double basic = 0.0, optimized = 0.0, canny = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<SweepRange> ranges;  // 0.6-1.0, 1.2-2.0, 2.2-2.6 style bands
};

/// Reproduces the synthetic experiment: for each SNR and seed, scales the
/// clean pattern to contrast snr*sigma, adds Gaussian + salt-and-pepper
/// noise, runs the detectors and scores them against ground truth (the
/// baseline detector applied to the clean pattern).
SweepReport snr_sweep(const PatternSpec& pattern,
                      const std::vector<double>& snr_grid, int seeds,
                      double sigma, const DetectorConfig& config,
                      std::uint64_t master_seed = 1);

std::string format_sweep(const SweepReport& r);
std::string sweep_csv(const SweepReport& r);

struct BenchRow {
  int size = 0;
  bool optimized = false;
  double seconds = 0.0;
  std::uint64_t concatenations = 0;
  std::uint64_t stored = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double basic_loglog_slope = 0.0;      // of concatenations vs pixel count
  double optimized_loglog_slope = 0.0;
};

/// Pure-noise runs over a list of image sides; wall clock plus exact
/// operation counts, with log-log slopes against the pixel count.
BenchReport benchmark(const std::vector<int>& sizes, int k, int repeats = 1,
                      int threads = 0, std::uint64_t seed = 1);

std::string format_bench(const BenchReport& r);
std::string bench_csv(const BenchReport& r);

/// Ground truth for a pattern: baseline detector on the clean rendering.
Mask pattern_ground_truth(const PatternSpec& pattern, double canny_low = 0.26,
                          double canny_high = 0.65, double canny_sigma = 1.0);

}  // namespace beamcurve
