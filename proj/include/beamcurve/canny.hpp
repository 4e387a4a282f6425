#pragma once

#include "beamcurve/types.hpp"

namespace beamcurve {

/// Classical edge detector used as the comparison baseline and to derive
/// ground truth from clean patterns: Gaussian smoothing, Sobel gradients,
/// directional non-maximum suppression, and hysteresis between `low` and
/// `high`, both as fractions of the maximal gradient magnitude.
Mask canny(const Raster& img, double low, double high,
           double smoothing_sigma = 1.0);

}  // namespace beamcurve
