#pragma once

#include "beamcurve/geometry.hpp"
#include "beamcurve/types.hpp"

#include <vector>

namespace beamcurve {

/// Matched-filter geometry: `width` offset samples on EACH side of the
/// curve, at unit normal spacing.
struct FilterParams {
  int width = 4;
};

/// Pixel mass of a filter of arc length `length`: width samples per side
/// per unit of arc. Additive in length.
inline double filter_mass(double length, const FilterParams& fp) {
  return fp.width * length;
}

/// Response of a candidate curve. `response` is the summed left-minus-right
/// contrast (signed), `length` the Euclidean arc length, and `pixels` the
/// ordered chain from endpoint a to endpoint b. The mean contrast is
/// response / filter_mass(length).
struct ResponseVector {
  double response = 0.0;
  double length = 0.0;
  std::vector<Pixel> pixels;
  Pixel a{}, b{};

  double contrast(const FilterParams& fp) const {
    return response / filter_mass(length, fp);
  }
};

/// Straight-line matched filter between two distinct pixels: one sample per
/// unit of arc, `width` bilinear side samples at unit normal offsets on each
/// side (clamped at the image border). A curve along an ideal step edge of
/// contrast c yields contrast() == c.
ResponseVector line_response(const Raster& img, Pixel a, Pixel b,
                             const FilterParams& fp);

/// Joins two curves sharing exactly one endpoint (the junction). Responses
/// and lengths add; the junction pixel is kept once; the result runs from
/// the free end of `u` to the free end of `v`. Throws if no unique shared
/// endpoint exists.
ResponseVector concatenate(const ResponseVector& u, const ResponseVector& v,
                           const FilterParams& fp);

/// Same curve with opposite polarity. Scores are polarity-blind (they use
/// |contrast|), but signed responses make inconsistent concatenations
/// cancel.
ResponseVector negated(ResponseVector rv);

}  // namespace beamcurve
