#include "beamcurve/canny.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace beamcurve {

namespace {

Raster gaussian_blur(const Raster& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;
  const int w = width(img), h = height(img);
  Raster tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int xx = x + i;
        xx = xx < 0 ? 0 : (xx >= w ? w - 1 : xx);
        acc += kernel[static_cast<std::size_t>(i + radius)] * img(y, xx);
      }
      tmp(y, x) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int yy = y + i;
        yy = yy < 0 ? 0 : (yy >= h ? h - 1 : yy);
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp(yy, x);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

Mask canny(const Raster& img, double low, double high, double smoothing_sigma) {
  if (low < 0.0 || high < low) throw std::invalid_argument("need 0 <= low <= high");
  const Raster smooth = gaussian_blur(img, smoothing_sigma);
  const int w = width(img), h = height(img);
  Raster mag = Raster::Zero(h, w);
  Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      dir(h, w);
  dir.setZero();
  double max_mag = 0.0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double gx = (smooth(y - 1, x + 1) + 2.0 * smooth(y, x + 1) +
                         smooth(y + 1, x + 1) - smooth(y - 1, x - 1) -
                         2.0 * smooth(y, x - 1) - smooth(y + 1, x - 1)) /
                        8.0;
      const double gy = (smooth(y + 1, x - 1) + 2.0 * smooth(y + 1, x) +
                         smooth(y + 1, x + 1) - smooth(y - 1, x - 1) -
                         2.0 * smooth(y - 1, x) - smooth(y - 1, x + 1)) /
                        8.0;
      const double m = std::hypot(gx, gy);
      mag(y, x) = m;
      if (m > max_mag) max_mag = m;
      // Quantized gradient direction: 0 = E-W, 1 = NE-SW, 2 = N-S, 3 = NW-SE.
      const double angle = std::atan2(gy, gx);
      double a = angle < 0.0 ? angle + M_PI : angle;
      int d;
      if (a < M_PI / 8.0 || a >= 7.0 * M_PI / 8.0) {
        d = 0;
      } else if (a < 3.0 * M_PI / 8.0) {
        d = 1;
      } else if (a < 5.0 * M_PI / 8.0) {
        d = 2;
      } else {
        d = 3;
      }
      dir(y, x) = static_cast<std::uint8_t>(d);
    }
  }
  Mask out = Mask::Zero(h, w);
  if (max_mag <= 0.0) return out;
  const double tl = low * max_mag;
  const double th = high * max_mag;
  // Thin along the gradient direction, then hysteresis from strong pixels.
  Mask cand = Mask::Zero(h, w);
  std::vector<Pixel> strong;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double m = mag(y, x);
      if (m < tl) continue;
      double n1, n2;
      switch (dir(y, x)) {
        case 0:
          n1 = mag(y, x - 1);
          n2 = mag(y, x + 1);
          break;
        case 1:
          n1 = mag(y - 1, x + 1);
          n2 = mag(y + 1, x - 1);
          break;
        case 2:
          n1 = mag(y - 1, x);
          n2 = mag(y + 1, x);
          break;
        default:
          n1 = mag(y - 1, x - 1);
          n2 = mag(y + 1, x + 1);
          break;
      }
      // Strict against one neighbor so a tied pair (gradient peak exactly
      // between two pixels) keeps a single thin line.
      if (!(m > n1 && m >= n2)) continue;
      cand(y, x) = 1;
      if (m >= th) {
        out(y, x) = 1;
        strong.push_back({x, y});
      }
    }
  }
  while (!strong.empty()) {
    const Pixel p = strong.back();
    strong.pop_back();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = p.x + dx, ny = p.y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        if (cand(ny, nx) && !out(ny, nx)) {
          out(ny, nx) = 1;
          strong.push_back({nx, ny});
        }
      }
    }
  }
  return out;
}

}  // namespace beamcurve
