#pragma once

#include "beamcurve/types.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace beamcurve {

/// Node of the hierarchical binary partition. Bounds are inclusive pixel
/// rectangles. A tile's two children cover it exactly and share the split
/// line, so sub-curve endpoints from sibling tiles coincide on the grid.
struct Tile {
  int id = 0;
  int level = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int parent = -1;
  std::array<int, 2> child{-1, -1};
  bool vertical_split = false;  // split line is a column (x = split_line)
  int split_line = -1;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  int max_side() const { return width() > height() ? width() : height(); }
  long area() const { return static_cast<long>(width()) * height(); }
  bool leaf() const { return child[0] < 0; }
  bool contains(Pixel p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  bool on_boundary(Pixel p) const {
    return contains(p) && (p.x == x0 || p.x == x1 || p.y == y0 || p.y == y1);
  }
};

// Side bits for boundary pixels; corner pixels carry two bits.
enum : std::uint8_t {
  kSideTop = 1,
  kSideRight = 2,
  kSideBottom = 4,
  kSideLeft = 8,
};

/// Binary partition of a width x height image into tiles, splitting the
/// longer side at its midpoint (ties split vertically) until every leaf has
/// max side <= n_min. Level j holds 2^j tiles. Immutable once built.
class PartitionTree {
 public:
  PartitionTree(int width, int height, int n_min);

  int image_width() const { return width_; }
  int image_height() const { return height_; }
  int n_min() const { return n_min_; }
  int levels() const { return levels_; }

  const std::vector<Tile>& tiles() const { return tiles_; }
  const Tile& tile(int id) const { return tiles_[static_cast<std::size_t>(id)]; }
  const Tile& root() const { return tiles_.front(); }
  std::vector<int> tiles_at_level(int level) const;

  /// Shared split-line pixels of an internal tile, ordered end-to-end.
  std::vector<Pixel> interface_pixels(int tile_id) const;

  /// Boundary pixels in perimeter order: top row left-to-right, right
  /// column downward, bottom row right-to-left, left column upward.
  std::vector<Pixel> boundary_pixels(int tile_id) const;

  /// All (p1, p2) with p1 on the parent boundary inside child 0 and p2 on
  /// the parent boundary inside child 1, excluding p1 == p2.
  std::vector<std::pair<Pixel, Pixel>> boundary_pairs(int tile_id) const;

  static std::uint8_t side_mask(const Tile& t, Pixel p);

  /// A response is stored for a boundary-pixel pair only when the pixels do
  /// not both lie strictly inside the same side.
  static bool pair_storable(std::uint8_t mask_a, std::uint8_t mask_b) {
    return !(mask_a == mask_b && (mask_a & (mask_a - 1)) == 0);
  }

  /// One line per tile: "id level x0 y0 x1 y1 [axis split]". For golden
  /// tests and debugging.
  std::string dump() const;

 private:
  int width_, height_, n_min_, levels_ = 0;
  std::vector<Tile> tiles_;
};

}  // namespace beamcurve
