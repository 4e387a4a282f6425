#pragma once

#include "beamcurve/types.hpp"

#include <cmath>
#include <vector>

namespace beamcurve {

/// 8-connected pixel chain from a to b, endpoints included.
std::vector<Pixel> bresenham(Pixel a, Pixel b);

inline double euclid(Pixel a, Pixel b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Bilinear sample at (x, y); coordinates outside the image are clamped to
/// the nearest pixel.
inline double bilinear(const Raster& img, double x, double y) {
  const int w = width(img), h = height(img);
  if (x < 0.0) x = 0.0;
  if (y < 0.0) y = 0.0;
  if (x > w - 1.0) x = w - 1.0;
  if (y > h - 1.0) y = h - 1.0;
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 > w - 2) x0 = w - 2 >= 0 ? w - 2 : 0;
  if (y0 > h - 2) y0 = h - 2 >= 0 ? h - 2 : 0;
  const int x1 = x0 + 1 < w ? x0 + 1 : x0;
  const int y1 = y0 + 1 < h ? y0 + 1 : y0;
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = img(y0, x0) * (1.0 - fx) + img(y0, x1) * fx;
  const double bot = img(y1, x0) * (1.0 - fx) + img(y1, x1) * fx;
  return top * (1.0 - fy) + bot * fy;
}

}  // namespace beamcurve
