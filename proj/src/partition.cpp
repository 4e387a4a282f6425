#include "beamcurve/partition.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>

namespace beamcurve {

PartitionTree::PartitionTree(int width, int height, int n_min)
    : width_(width), height_(height), n_min_(n_min) {
  if (n_min < 3) throw std::invalid_argument("n_min must be >= 3");
  if (width < n_min || height < n_min) {
    throw std::invalid_argument("image dimensions must be >= n_min");
  }
  Tile root;
  root.id = 0;
  root.level = 0;
  root.x0 = 0;
  root.y0 = 0;
  root.x1 = width - 1;
  root.y1 = height - 1;
  tiles_.push_back(root);
  // Breadth-first so tiles of one level are contiguous by id.
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    Tile t = tiles_[static_cast<std::size_t>(id)];
    levels_ = t.level + 1 > levels_ ? t.level + 1 : levels_;
    if (t.max_side() <= n_min_) continue;
    // Split the longer side at its midpoint; the split line belongs to both
    // children.
    Tile a = t, b = t;
    if (t.width() >= t.height()) {
      const int xm = (t.x0 + t.x1) / 2;
      a.x1 = xm;
      b.x0 = xm;
      t.vertical_split = true;
      t.split_line = xm;
    } else {
      const int ym = (t.y0 + t.y1) / 2;
      a.y1 = ym;
      b.y0 = ym;
      t.vertical_split = false;
      t.split_line = ym;
    }
    a.level = b.level = t.level + 1;
    a.parent = b.parent = id;
    a.child = b.child = {-1, -1};
    a.id = static_cast<int>(tiles_.size());
    b.id = a.id + 1;
    t.child = {a.id, b.id};
    tiles_[static_cast<std::size_t>(id)] = t;
    tiles_.push_back(a);
    tiles_.push_back(b);
    queue.push_back(a.id);
    queue.push_back(b.id);
  }
}

std::vector<int> PartitionTree::tiles_at_level(int level) const {
  std::vector<int> out;
  for (const Tile& t : tiles_) {
    if (t.level == level) out.push_back(t.id);
  }
  return out;
}

std::vector<Pixel> PartitionTree::interface_pixels(int tile_id) const {
  const Tile& t = tile(tile_id);
  if (t.leaf()) throw std::invalid_argument("leaf tiles have no interface");
  std::vector<Pixel> out;
  if (t.vertical_split) {
    out.reserve(static_cast<std::size_t>(t.height()));
    for (int y = t.y0; y <= t.y1; ++y) out.push_back({t.split_line, y});
  } else {
    out.reserve(static_cast<std::size_t>(t.width()));
    for (int x = t.x0; x <= t.x1; ++x) out.push_back({x, t.split_line});
  }
  return out;
}

std::vector<Pixel> PartitionTree::boundary_pixels(int tile_id) const {
  const Tile& t = tile(tile_id);
  std::vector<Pixel> out;
  out.reserve(static_cast<std::size_t>(2 * (t.width() + t.height()) - 4));
  for (int x = t.x0; x <= t.x1; ++x) out.push_back({x, t.y0});
  for (int y = t.y0 + 1; y <= t.y1; ++y) out.push_back({t.x1, y});
  if (t.height() > 1) {
    for (int x = t.x1 - 1; x >= t.x0; --x) out.push_back({x, t.y1});
  }
  if (t.width() > 1) {
    for (int y = t.y1 - 1; y >= t.y0 + 1; --y) out.push_back({t.x0, y});
  }
  return out;
}

std::vector<std::pair<Pixel, Pixel>> PartitionTree::boundary_pairs(
    int tile_id) const {
  const Tile& t = tile(tile_id);
  if (t.leaf()) throw std::invalid_argument("boundary_pairs needs an internal tile");
  const Tile& a = tile(t.child[0]);
  const Tile& b = tile(t.child[1]);
  std::vector<Pixel> in_a, in_b;
  for (const Pixel& p : boundary_pixels(tile_id)) {
    if (a.contains(p)) in_a.push_back(p);
    if (b.contains(p)) in_b.push_back(p);
  }
  std::vector<std::pair<Pixel, Pixel>> out;
  out.reserve(in_a.size() * in_b.size());
  for (const Pixel& p1 : in_a) {
    for (const Pixel& p2 : in_b) {
      if (p1 != p2) out.emplace_back(p1, p2);
    }
  }
  return out;
}

std::uint8_t PartitionTree::side_mask(const Tile& t, Pixel p) {
  std::uint8_t m = 0;
  if (p.y == t.y0) m |= kSideTop;
  if (p.x == t.x1) m |= kSideRight;
  if (p.y == t.y1) m |= kSideBottom;
  if (p.x == t.x0) m |= kSideLeft;
  return m;
}

std::string PartitionTree::dump() const {
  std::ostringstream os;
  for (const Tile& t : tiles_) {
    os << t.id << " " << t.level << " " << t.x0 << " " << t.y0 << " " << t.x1
       << " " << t.y1;
    if (!t.leaf()) {
      os << " " << (t.vertical_split ? "x" : "y") << " " << t.split_line;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace beamcurve
