#pragma once

#include "beamcurve/beamtree.hpp"
#include "beamcurve/types.hpp"

#include <string>
#include <vector>

namespace beamcurve {

/// Soft edge map: per-pixel score of the best accepted curve, 0 where no
/// accepted curve passes. Built greedily from curves sorted by descending
/// score: a curve whose pixels are mostly already painted is discarded
/// whole; otherwise it paints max(existing, score) on its pixels.
Raster build_edge_map(const std::vector<ScoredCurve>& sorted_curves, int width,
                      int height, double overlap_fraction = 0.35);

/// Pixel on iff its edge-map value exceeds `level`.
Mask binarize(const Raster& edge_map, double level);

/// Saves the map as 16-bit PGM (min-max scaled) and writes
/// `path + ".scale"` with "<lo> <hi>" so values can be recovered.
void save_edge_map(const Raster& edge_map, const std::string& path);

}  // namespace beamcurve
