#pragma once

#include "beamcurve/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace beamcurve {

/// Additive noise model: i.i.d. Gaussian per pixel, then a fraction of
/// pixels replaced by salt/pepper outliers. Deterministic per seed.
struct NoiseSpec {
  double sigma = 0.0;        // std dev of the Gaussian component
  double sp_fraction = 0.0;  // fraction of pixels hit by salt & pepper
  std::uint64_t seed = 0;
  // Salt/pepper intensities; when unset, salt = max(img) + 3*sigma and
  // pepper = min(img) - 3*sigma.
  std::optional<double> salt;
  std::optional<double> pepper;
};

// Stroke width 1 rasterizes as a thin pixel chain; wider strokes fill all
// pixels within width/2 of the element, producing two clean step edges.

struct SegmentSpec {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double intensity = 1.0;
  double width = 1.0;
};

struct CircleSpec {
  double cx = 0, cy = 0, radius = 0;
  double intensity = 1.0;
  double width = 1.0;
};

/// Two half-circle arcs of the given radius joined at (cx, cy), mirrored,
/// spanning vertically from cy - 2r to cy + 2r.
struct SCurveSpec {
  double cx = 0, cy = 0, radius = 0;
  double intensity = 1.0;
  double width = 1.0;
};

using PatternElement = std::variant<SegmentSpec, CircleSpec, SCurveSpec>;

struct PatternSpec {
  int size = 129;
  double background = 0.0;
  std::vector<PatternElement> elements;
};

/// Rasterizes the pattern with hard binary values (no anti-aliasing).
/// Throws std::invalid_argument if any element geometry leaves the image.
Raster synth_pattern(const PatternSpec& spec);

/// The pattern used by the built-in simulations: straight lines, three
/// concentric circles and an S shape on a square canvas (129 by default).
PatternSpec simulation_pattern(int size = 129);

/// img + Gaussian noise, then floor(sp_fraction*N) uniformly chosen pixels
/// replaced by the salt or pepper value (fair coin each).
Raster add_noise(const Raster& img, const NoiseSpec& noise);

/// |edge_contrast| / sigma; +infinity when sigma == 0.
double snr(double edge_contrast, double sigma);

/// Robust noise estimate: median absolute deviation of the discrete
/// Laplacian response, rescaled to Gaussian-consistent units.
double estimate_sigma(const Raster& img);

// Plain-text key-value serialization of PatternSpec. Grammar:
//   size <n>
//   background <v>
//   segment <x0> <y0> <x1> <y1> <intensity> [width]
//   circle <cx> <cy> <radius> <intensity> [width]
//   scurve <cx> <cy> <radius> <intensity> [width]
// Blank lines and lines starting with '#' are ignored; width defaults to 1.
PatternSpec parse_pattern_spec(std::istream& in);
PatternSpec load_pattern_spec(const std::string& path);
std::string format_pattern_spec(const PatternSpec& spec);

}  // namespace beamcurve
