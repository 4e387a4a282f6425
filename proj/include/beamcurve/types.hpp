#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace beamcurve {

/// Dense grayscale raster, indexed (row, col) = (y, x). Intensities are
/// dimensionless reals; clean patterns live in [0,1] but noisy data is
/// unbounded.
using Raster = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Binary raster (0/1) used for ground truth and binarized detections.
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Pixel {
  int x = 0;  // column
  int y = 0;  // row

  friend bool operator==(Pixel a, Pixel b) { return a.x == b.x && a.y == b.y; }
  friend bool operator!=(Pixel a, Pixel b) { return !(a == b); }
  friend bool operator<(Pixel a, Pixel b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
};

/// Packs a pixel into a single ordering-friendly key. Valid for
/// coordinates in [0, 2^15).
inline std::int32_t pack(Pixel p) {
  return (p.y << 15) | p.x;
}

inline Pixel unpack(std::int32_t key) {
  return Pixel{key & 0x7fff, key >> 15};
}

inline int width(const Raster& img) { return static_cast<int>(img.cols()); }
inline int height(const Raster& img) { return static_cast<int>(img.rows()); }

}  // namespace beamcurve
