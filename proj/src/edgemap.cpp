#include "beamcurve/edgemap.hpp"

#include "beamcurve/pgm.hpp"

#include <fstream>
#include <stdexcept>

namespace beamcurve {

Raster build_edge_map(const std::vector<ScoredCurve>& sorted_curves, int width,
                      int height, double overlap_fraction) {
  Raster map = Raster::Zero(height, width);
  // A pixel counts as already marked if a painted pixel lies within one
  // pixel of it. A step edge sitting between two pixel columns carries two
  // full-contrast twin curves one pixel apart; exact-coincidence counting
  // would paint both and double every detected edge.
  auto marked_near = [&](Pixel p) {
    const int x0 = p.x > 1 ? p.x - 1 : 0;
    const int y0 = p.y > 1 ? p.y - 1 : 0;
    const int x1 = p.x + 1 < width ? p.x + 1 : width - 1;
    const int y1 = p.y + 1 < height ? p.y + 1 : height - 1;
    for (int ny = y0; ny <= y1; ++ny) {
      for (int nx = x0; nx <= x1; ++nx) {
        if (map(ny, nx) > 0.0) return true;
      }
    }
    return false;
  };
  for (const ScoredCurve& c : sorted_curves) {
    if (c.pixels.empty()) continue;
    std::size_t marked = 0;
    for (const Pixel& p : c.pixels) {
      if (marked_near(p)) ++marked;
    }
    if (static_cast<double>(marked) >
        overlap_fraction * static_cast<double>(c.pixels.size())) {
      continue;
    }
    for (const Pixel& p : c.pixels) {
      if (c.score > map(p.y, p.x)) map(p.y, p.x) = c.score;
    }
  }
  return map;
}

Mask binarize(const Raster& edge_map, double level) {
  if (level < 0.0) throw std::invalid_argument("binarize level must be >= 0");
  return (edge_map > level).cast<std::uint8_t>();
}

void save_edge_map(const Raster& edge_map, const std::string& path) {
  double lo = edge_map.minCoeff();
  double hi = edge_map.maxCoeff();
  if (hi <= lo) hi = lo + 1.0;
  save_pgm(edge_map, path, 16, lo, hi);
  std::ofstream side(path + ".scale");
  side << lo << " " << hi << "\n";
}

}  // namespace beamcurve
