#include "beamcurve/scoring.hpp"

#include "beamcurve/beamtree.hpp"
#include "beamcurve/image.hpp"
#include "beamcurve/random.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>

namespace beamcurve {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

double log_search_space(double length, double pixels, double beta) {
  if (length < 0.0) throw std::invalid_argument("length must be >= 0");
  return std::log(6.0 * pixels) + beta * length * kLn2;
}

double length_threshold(double length, const ThresholdParams& tp) {
  if (length <= 0.0) throw std::invalid_argument("threshold needs length > 0");
  return tp.sigma * std::sqrt(2.0 * log_search_space(length, tp.pixels, tp.beta) /
                              (tp.width * length));
}

double asymptotic_threshold(const ThresholdParams& tp) {
  return tp.sigma * std::sqrt(2.0 * tp.beta * kLn2 / tp.width);
}

double edge_score(double response, double length, const ThresholdParams& tp) {
  const double contrast = std::abs(response) / (tp.width * length);
  return contrast - length_threshold(length, tp);
}

double edge_score(const ResponseVector& rv, const ThresholdParams& tp) {
  return edge_score(rv.response, rv.length, tp);
}

CalibrationResult calibrate_beta(int image_size, double sigma, int trials,
                                 std::uint64_t seed, int filter_width,
                                 int n_min, int threads) {
  if (trials < 1) throw std::invalid_argument("calibration needs trials >= 1");
  struct Bin {
    double max_contrast = 0.0;
    std::int64_t samples = 0;
  };
  const double pixels = static_cast<double>(image_size) * image_size;

  auto run_trial = [&](int trial) {
    std::map<int, Bin> bins;
    Raster noise(image_size, image_size);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    for (Eigen::Index i = 0; i < noise.size(); ++i) {
      noise.data()[i] = sigma * rng.next_normal();
    }
    DetectorParams dp;
    dp.filter.width = filter_width;
    dp.sigma = sigma;
    dp.selection = SelectionRule::kContrast;
    dp.mode = MergeMode::basic();
    dp.n_min = n_min;
    dp.threads = 1;
    const BeamTree tree = build_beam_tree(noise, dp);
    for (const Tile& t : tree.partition().tiles()) {
      for (const StoredCurve& c : tree.stored_curves(t.id)) {
        const int key = static_cast<int>(std::floor(c.length));
        Bin& b = bins[key];
        b.samples += 1;
        // selection caches |contrast| under the contrast rule
        if (c.selection > b.max_contrast) b.max_contrast = c.selection;
      }
    }
    return bins;
  };

  std::map<int, Bin> bins;
  const int workers = threads > 0 ? threads : 2;
  for (int base = 0; base < trials; base += workers) {
    std::vector<std::future<std::map<int, Bin>>> futs;
    for (int t = base; t < std::min(trials, base + workers); ++t) {
      futs.push_back(std::async(std::launch::async, run_trial, t));
    }
    for (auto& f : futs) {
      for (const auto& [k, b] : f.get()) {
        Bin& dst = bins[k];
        dst.samples += b.samples;
        if (b.max_contrast > dst.max_contrast) dst.max_contrast = b.max_contrast;
      }
    }
  }

  CalibrationResult result;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [k, b] : bins) {
    if (b.samples < 10) continue;
    CalibrationBin cb;
    cb.length = k + 0.5;
    cb.max_contrast = b.max_contrast;
    cb.samples = b.samples;
    result.bins.push_back(cb);
    const double fn = filter_noise(sigma);
    const double y = cb.max_contrast * cb.max_contrast * filter_width *
                         cb.length / (2.0 * fn * fn) -
                     std::log(6.0 * pixels);
    const double x = cb.length * kLn2;
    sxx += x * x;
    sxy += x * y;
  }
  if (result.bins.size() < 2) {
    throw std::runtime_error("calibration failed: too few populated length bins");
  }
  result.beta = sxy / sxx;
  return result;
}

std::string format_calibration(const CalibrationResult& r) {
  std::ostringstream os;
  os << "# length max_contrast\n";
  for (const CalibrationBin& b : r.bins) {
    os << b.length << " " << b.max_contrast << "\n";
  }
  os << "# beta " << r.beta << "\n";
  return os.str();
}

}  // namespace beamcurve
