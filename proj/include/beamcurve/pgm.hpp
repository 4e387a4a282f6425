#pragma once

#include "beamcurve/types.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>

namespace beamcurve {

/// Malformed raster file; `offset` is the byte position where parsing
/// stopped making sense.
class PgmParseError : public std::runtime_error {
 public:
  PgmParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Binary PGM (P5), 8- or 16-bit. Intensities are quantized linearly from
/// [lo, hi] onto [0, maxval]; the range is recorded in a header comment
/// ("# range <lo> <hi>") so a round trip restores the original values up to
/// the quantization step. Files without the comment load as [0, 1].
void save_pgm(const Raster& img, const std::string& path, int bits = 16);
void save_pgm(const Raster& img, const std::string& path, int bits, double lo,
              double hi);
Raster load_pgm(const std::string& path);

}  // namespace beamcurve
