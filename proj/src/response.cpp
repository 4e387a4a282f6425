#include "beamcurve/response.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamcurve {

std::vector<Pixel> bresenham(Pixel a, Pixel b) {
  // Rasterize from the lexicographically smaller endpoint so the chain is
  // the same pixel set regardless of traversal direction.
  if (b < a) {
    std::vector<Pixel> out = bresenham(b, a);
    std::reverse(out.begin(), out.end());
    return out;
  }
  std::vector<Pixel> out;
  const int dx = std::abs(b.x - a.x);
  const int dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  Pixel p = a;
  out.reserve(static_cast<std::size_t>(std::max(dx, -dy)) + 1);
  for (;;) {
    out.push_back(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      p.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      p.y += sy;
    }
  }
  return out;
}

ResponseVector line_response(const Raster& img, Pixel a, Pixel b,
                             const FilterParams& fp) {
  if (a == b) throw std::invalid_argument("zero-length line");
  ResponseVector rv;
  rv.a = a;
  rv.b = b;
  rv.length = euclid(a, b);
  rv.pixels = bresenham(a, b);
  const double inv_len = 1.0 / rv.length;
  const double dx = (b.x - a.x) * inv_len;
  const double dy = (b.y - a.y) * inv_len;
  const double nx = -dy;  // unit normal (left of travel direction)
  const double ny = dx;
  const int n_arc = std::max(1, static_cast<int>(std::lround(rv.length)));
  const double step = rv.length / n_arc;
  const double w_max = width(img) - 1.0;
  const double h_max = height(img) - 1.0;
  double diff_sum = 0.0;
  for (int i = 0; i < n_arc; ++i) {
    const double s = (i + 0.5) * step;
    const double cx = a.x + s * dx;
    const double cy = a.y + s * dy;
    for (int o = 1; o <= fp.width; ++o) {
      const double lx = cx + o * nx, ly = cy + o * ny;
      const double rx = cx - o * nx, ry = cy - o * ny;
      // A sample pair whose positions leave the image contributes no
      // contrast evidence. Reading a clamped border value instead would
      // fold the curve's own row into its side means and inflate the
      // noise of border-hugging filters far beyond the threshold model.
      if (lx < 0.0 || ly < 0.0 || lx > w_max || ly > h_max || rx < 0.0 ||
          ry < 0.0 || rx > w_max || ry > h_max) {
        continue;
      }
      diff_sum += bilinear(img, lx, ly) - bilinear(img, rx, ry);
    }
  }
  // Scale so that response == contrast * filter_mass for a constant
  // left-right difference regardless of the rounding of n_arc.
  rv.response = diff_sum * (rv.length / n_arc);
  return rv;
}

ResponseVector concatenate(const ResponseVector& u, const ResponseVector& v,
                           const FilterParams& fp) {
  (void)fp;  // mass is additive in length, so no extra state is needed
  Pixel junction;
  bool u_ends_at_junction, v_starts_at_junction;
  if (u.b == v.a && u.a != v.b) {
    junction = u.b;
    u_ends_at_junction = true;
    v_starts_at_junction = true;
  } else if (u.b == v.b && u.a != v.a) {
    junction = u.b;
    u_ends_at_junction = true;
    v_starts_at_junction = false;
  } else if (u.a == v.a && u.b != v.b) {
    junction = u.a;
    u_ends_at_junction = false;
    v_starts_at_junction = true;
  } else if (u.a == v.b && u.b != v.a) {
    junction = u.a;
    u_ends_at_junction = false;
    v_starts_at_junction = false;
  } else {
    throw std::invalid_argument("curves must share exactly one endpoint");
  }
  ResponseVector out;
  out.response = u.response + v.response;
  out.length = u.length + v.length;
  out.pixels = u.pixels;
  if (!u_ends_at_junction) std::reverse(out.pixels.begin(), out.pixels.end());
  std::vector<Pixel> tail = v.pixels;
  if (!v_starts_at_junction) std::reverse(tail.begin(), tail.end());
  // Junction counted once.
  out.pixels.insert(out.pixels.end(), tail.begin() + 1, tail.end());
  out.a = u_ends_at_junction ? u.a : u.b;
  out.b = v_starts_at_junction ? v.b : v.a;
  return out;
}

ResponseVector negated(ResponseVector rv) {
  rv.response = -rv.response;
  return rv;
}

}  // namespace beamcurve
