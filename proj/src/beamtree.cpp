#include "beamcurve/beamtree.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <future>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace beamcurve {

using detail::ShapeInfo;
using detail::StoreEntry;
using detail::TileStore;

namespace {

int boundary_ordinal(const ShapeInfo& s, int rx, int ry) {
  if (ry == 0) return rx;
  if (rx == s.w - 1) return (s.w - 1) + ry;
  if (ry == s.h - 1) return (s.w - 1) + (s.h - 1) + (s.w - 1 - rx);
  return 2 * (s.w - 1) + (s.h - 1) + (s.h - 1 - ry);
}

std::unique_ptr<ShapeInfo> make_shape(int w, int h) {
  auto s = std::make_unique<ShapeInfo>();
  s->w = w;
  s->h = h;
  s->boundary = 2 * w + 2 * h - 4;
  const int B = s->boundary;
  s->rel_x.resize(static_cast<std::size_t>(B));
  s->rel_y.resize(static_cast<std::size_t>(B));
  s->side.resize(static_cast<std::size_t>(B));
  int i = 0;
  auto visit = [&](int x, int y) {
    s->rel_x[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(x);
    s->rel_y[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(y);
    std::uint8_t m = 0;
    if (y == 0) m |= kSideTop;
    if (x == w - 1) m |= kSideRight;
    if (y == h - 1) m |= kSideBottom;
    if (x == 0) m |= kSideLeft;
    s->side[static_cast<std::size_t>(i)] = m;
    ++i;
  };
  for (int x = 0; x < w; ++x) visit(x, 0);
  for (int y = 1; y < h; ++y) visit(w - 1, y);
  if (h > 1) {
    for (int x = w - 2; x >= 0; --x) visit(x, h - 1);
  }
  if (w > 1) {
    for (int y = h - 2; y >= 1; --y) visit(0, y);
  }
  assert(i == B);
  (void)i;
  s->slot_of.assign(static_cast<std::size_t>(B) * B, -1);
  for (int a = 0; a < B; ++a) {
    for (int b = a + 1; b < B; ++b) {
      if (!PartitionTree::pair_storable(s->side[static_cast<std::size_t>(a)],
                                        s->side[static_cast<std::size_t>(b)])) {
        continue;
      }
      const int id = s->n_slots++;
      s->slot_of[static_cast<std::size_t>(a) * B + b] = id;
      s->slot_of[static_cast<std::size_t>(b) * B + a] = id;
      s->slot_pair.push_back(static_cast<std::uint32_t>(a) << 16 |
                             static_cast<std::uint32_t>(b));
    }
  }
  return s;
}

// Provenance rank for deterministic tie-breaking: union copies precede
// junction candidates, junctions rank by interface position.
constexpr int kRankUnion0 = -2;
constexpr int kRankUnion1 = -1;

// Lexicographic preference: higher selection value, then higher |contrast|,
// then shorter, then smaller provenance rank.
bool prefer(double sel_a, double absc_a, double len_a, int rank_a,
            double sel_b, double absc_b, double len_b, int rank_b) {
  if (sel_a != sel_b) return sel_a > sel_b;
  if (absc_a != absc_b) return absc_a > absc_b;
  if (len_a != len_b) return len_a < len_b;
  return rank_a < rank_b;
}

struct Builder {
  const Raster& img;
  DetectorParams params;
  std::shared_ptr<const PartitionTree> tree;
  std::vector<TileStore> stores;
  std::vector<std::unique_ptr<ShapeInfo>> shapes;
  OpCounters counters;
  std::mutex counter_mutex;
  ThresholdParams tp;
  double inv_w = 0.0;  // 1 / filter width
  int n_threads = 1;
  int async_depth = 0;

  Builder(const Raster& image, const DetectorParams& p) : img(image), params(p) {
    if (params.mode.optimized && params.mode.k < 1) {
      throw std::invalid_argument("best-k mode needs k >= 1");
    }
    if (params.sigma <= 0.0) {
      throw std::invalid_argument("detector needs sigma > 0");
    }
    tree = std::make_shared<PartitionTree>(width(img), height(img), params.n_min);
    tp.sigma = detection_noise(params.sigma);
    tp.width = params.filter.width;
    tp.pixels = static_cast<double>(img.size());
    tp.beta = params.beta;
    inv_w = 1.0 / params.filter.width;
    if (params.threads > 0) {
      n_threads = params.threads;
    } else {
      const unsigned hw = std::thread::hardware_concurrency();
      n_threads = hw > 0 ? static_cast<int>(hw) : 1;
    }
    while ((1 << async_depth) < n_threads) ++async_depth;
    counters.concatenations_per_level.assign(
        static_cast<std::size_t>(tree->levels()), 0);
    counters.stored_per_level.assign(static_cast<std::size_t>(tree->levels()), 0);
    allocate_stores();
  }

  double abs_contrast(double response, double length) const {
    return std::abs(response) * inv_w / length;
  }

  double select_value(double response, double length) const {
    const double absc = abs_contrast(response, length);
    if (params.selection == SelectionRule::kContrast) return absc;
    return absc - length_threshold(length, tp);
  }

  void allocate_stores() {
    const auto& tiles = tree->tiles();
    stores.resize(tiles.size());
    std::vector<std::pair<std::uint32_t, const ShapeInfo*>> cache;
    for (const Tile& t : tiles) {
      const std::uint32_t key = static_cast<std::uint32_t>(t.width()) << 16 |
                                static_cast<std::uint32_t>(t.height());
      const ShapeInfo* shape = nullptr;
      for (const auto& [k, v] : cache) {
        if (k == key) {
          shape = v;
          break;
        }
      }
      if (!shape) {
        shapes.push_back(make_shape(t.width(), t.height()));
        shape = shapes.back().get();
        cache.emplace_back(key, shape);
      }
      TileStore& st = stores[static_cast<std::size_t>(t.id)];
      st.shape = shape;
      st.x0 = t.x0;
      st.y0 = t.y0;
      st.entries.assign(static_cast<std::size_t>(shape->n_slots), StoreEntry{});
      st.best_at.assign(static_cast<std::size_t>(shape->boundary),
                        -std::numeric_limits<double>::infinity());
    }
  }

  void bump(int level, std::uint64_t concats, std::uint64_t stored) {
    std::lock_guard<std::mutex> lock(counter_mutex);
    counters.concatenations += concats;
    counters.responses_stored += stored;
    counters.concatenations_per_level[static_cast<std::size_t>(level)] += concats;
    counters.stored_per_level[static_cast<std::size_t>(level)] += stored;
  }

  // ---- footprints ----

  // Boundary touches of a stored curve beyond its endpoints, as sorted
  // packed pixels.
  std::vector<std::int32_t> entry_extras(const TileStore& st,
                                         const StoreEntry& e) const {
    std::vector<std::int32_t> out;
    if (e.fp_extra == 0) return out;
    if (e.fp_extra == 255) {
      out.assign(st.fp_pool.begin() + e.fp[0],
                 st.fp_pool.begin() + e.fp[0] + e.fp[1]);
    } else {
      out.push_back(e.fp[0]);
      if (e.fp_extra > 1) out.push_back(e.fp[1]);
    }
    return out;
  }

  void set_extras(TileStore& st, StoreEntry& e,
                  std::vector<std::int32_t>&& extras) {
    if (extras.size() <= 2) {
      e.fp_extra = static_cast<std::uint8_t>(extras.size());
      e.fp[0] = extras.empty() ? 0 : extras[0];
      e.fp[1] = extras.size() > 1 ? extras[1] : 0;
    } else {
      // Spills are rare (curves running along a boundary line); a lock keeps
      // the shared pool consistent under the parallel merge sweep.
      std::lock_guard<std::mutex> lock(pool_mutex);
      e.fp_extra = 255;
      e.fp[0] = static_cast<std::int32_t>(st.fp_pool.size());
      e.fp[1] = static_cast<std::int32_t>(extras.size());
      st.fp_pool.insert(st.fp_pool.end(), extras.begin(), extras.end());
    }
  }

  // best_at is rebuilt once per tile after its store stops changing; the
  // parent merge is the only consumer.
  void finalize_best_at(TileStore& st) const {
    for (int slot = 0; slot < st.shape->n_slots; ++slot) {
      const StoreEntry& e = st.entries[static_cast<std::size_t>(slot)];
      if (!e.valid()) continue;
      const std::uint32_t pair = st.shape->slot_pair[static_cast<std::size_t>(slot)];
      const auto orda = static_cast<std::size_t>(pair >> 16);
      const auto ordb = static_cast<std::size_t>(pair & 0xffff);
      if (e.selection > st.best_at[orda]) st.best_at[orda] = e.selection;
      if (e.selection > st.best_at[ordb]) st.best_at[ordb] = e.selection;
    }
  }

  std::mutex pool_mutex;

  int entry_rank(const Tile& t, const StoreEntry& e) const {
    switch (e.kind) {
      case detail::kUnion0:
        return kRankUnion0;
      case detail::kUnion1:
        return kRankUnion1;
      case detail::kConcatA0:
      case detail::kConcatA1: {
        const Pixel p3 = unpack(e.junction);
        return t.vertical_split ? p3.y - t.y0 : p3.x - t.x0;
      }
      default:
        return kRankUnion0;
    }
  }

  // Returns true when the slot was written.
  bool insert_entry(const Tile& t, TileStore& st, int slot, double response,
                    double length, double selection, std::uint8_t kind,
                    std::int32_t junction, int rank,
                    std::vector<std::int32_t>&& extras) {
    StoreEntry& e = st.entries[static_cast<std::size_t>(slot)];
    if (e.valid() &&
        !prefer(selection, abs_contrast(response, length), length, rank,
                e.selection, abs_contrast(e.response, e.length), e.length,
                entry_rank(t, e))) {
      return false;
    }
    e.response = response;
    e.length = static_cast<float>(length);
    e.selection = selection;
    e.kind = kind;
    e.junction = junction;
    set_extras(st, e, std::move(extras));
    return true;
  }

  // ---- bottom level (Alg. "leaf") ----

  void bottom_level(const Tile& t) {
    TileStore& st = stores[static_cast<std::size_t>(t.id)];
    const ShapeInfo& sh = *st.shape;
    std::uint64_t stored = 0;
    for (int slot = 0; slot < sh.n_slots; ++slot) {
      const std::uint32_t pair = sh.slot_pair[static_cast<std::size_t>(slot)];
      const Pixel pa = st.pixel(static_cast<int>(pair >> 16));
      const Pixel pb = st.pixel(static_cast<int>(pair & 0xffff));
      const ResponseVector rv = line_response(img, pa, pb, params.filter);
      std::vector<std::int32_t> extras;
      for (std::size_t i = 1; i + 1 < rv.pixels.size(); ++i) {
        if (t.on_boundary(rv.pixels[i])) extras.push_back(pack(rv.pixels[i]));
      }
      std::sort(extras.begin(), extras.end());
      stored += insert_entry(t, st, slot, rv.response, rv.length,
                             select_value(rv.response, rv.length),
                             detail::kLeafLine, -1, kRankUnion0,
                             std::move(extras))
                    ? 1
                    : 0;
    }
    finalize_best_at(st);
    bump(t.level, 0, stored);
  }

  // ---- merge (Alg. "coarser level") ----

  struct CompactRef {
    double response = 0.0;
    float length = 0.0f;  // 0 = no stored sub-curve
    // Touches of the sub-curve on the split line (beyond its endpoints).
    std::uint8_t n_line = 0;  // 255 = more than two, consult the pool
    std::int32_t line_px[2] = {0, 0};
    std::int32_t child_slot = -1;
  };

  void fill_compact(CompactRef& out, const Tile& parent, const TileStore& cs,
                    int child_slot) const {
    const StoreEntry& e = cs.entries[static_cast<std::size_t>(child_slot)];
    if (!e.valid()) {
      out.length = 0.0f;
      return;
    }
    out.response = e.response;
    out.length = e.length;
    out.n_line = 0;
    out.child_slot = child_slot;
    if (e.fp_extra == 0) return;
    const bool v = parent.vertical_split;
    const int line = parent.split_line;
    auto on_line = [&](std::int32_t packed) {
      const Pixel p = unpack(packed);
      return v ? p.x == line : p.y == line;
    };
    if (e.fp_extra == 255) {
      int n = 0;
      for (std::int32_t i = 0; i < e.fp[1]; ++i) {
        const std::int32_t q = cs.fp_pool[static_cast<std::size_t>(e.fp[0] + i)];
        if (on_line(q)) {
          if (n < 2) out.line_px[n] = q;
          ++n;
        }
      }
      out.n_line = n > 2 ? 255 : static_cast<std::uint8_t>(n);
      return;
    }
    int n = 0;
    for (int i = 0; i < e.fp_extra; ++i) {
      if (on_line(e.fp[i])) out.line_px[n++] = e.fp[i];
    }
    out.n_line = static_cast<std::uint8_t>(n);
  }

  std::vector<std::int32_t> line_touches(const Tile& parent, const TileStore& cs,
                                         const CompactRef& r,
                                         bool endpoint_on_line,
                                         std::int32_t endpoint) const {
    std::vector<std::int32_t> out;
    if (r.n_line == 255) {
      const StoreEntry& e = cs.entries[static_cast<std::size_t>(r.child_slot)];
      const bool v = parent.vertical_split;
      const int line = parent.split_line;
      for (std::int32_t q : entry_extras(cs, e)) {
        const Pixel p = unpack(q);
        if (v ? p.x == line : p.y == line) out.push_back(q);
      }
    } else {
      for (int i = 0; i < r.n_line; ++i) out.push_back(r.line_px[i]);
    }
    if (endpoint_on_line) out.push_back(endpoint);
    return out;
  }

  // A junction candidate is legal only if the two sub-curves meet solely at
  // the junction pixel. Sub-curves live in their own child tiles, so any
  // other shared pixel must lie on the split line; compare the line-touch
  // sets.
  bool junction_clear(const Tile& parent, const TileStore& cs0,
                      const CompactRef& r, bool p1_on_line, std::int32_t p1,
                      const TileStore& cs1, const CompactRef& c,
                      bool p2_on_line, std::int32_t p2) const {
    const auto a = line_touches(parent, cs0, r, p1_on_line, p1);
    if (a.empty()) return true;
    const auto b = line_touches(parent, cs1, c, p2_on_line, p2);
    for (const std::int32_t x : a) {
      for (const std::int32_t y : b) {
        if (x == y) return false;
      }
    }
    return true;
  }

  // Boundary pixels of the parent that belong to one child.
  struct SideAnchor {
    int parent_ord = 0;
    int child_ord = 0;
    Pixel px{};
    bool iface_endpoint = false;
  };

  void merge_tile(const Tile& t) {
    TileStore& st = stores[static_cast<std::size_t>(t.id)];
    const ShapeInfo& sh = *st.shape;
    const Tile& t0 = tree->tile(t.child[0]);
    const Tile& t1 = tree->tile(t.child[1]);
    TileStore& cs0 = stores[static_cast<std::size_t>(t0.id)];
    TileStore& cs1 = stores[static_cast<std::size_t>(t1.id)];
    std::uint64_t stored = 0;

    // BC <- BC1 u BC2: child curves whose endpoints are both on the parent
    // boundary compete for the parent slot of the same pixels.
    for (int ci = 0; ci < 2; ++ci) {
      const Tile& ct = ci == 0 ? t0 : t1;
      TileStore& cs = ci == 0 ? cs0 : cs1;
      const std::uint8_t kind = ci == 0 ? detail::kUnion0 : detail::kUnion1;
      const int rank = ci == 0 ? kRankUnion0 : kRankUnion1;
      for (int slot = 0; slot < cs.shape->n_slots; ++slot) {
        const StoreEntry& e = cs.entries[static_cast<std::size_t>(slot)];
        if (!e.valid()) continue;
        const std::uint32_t pair =
            cs.shape->slot_pair[static_cast<std::size_t>(slot)];
        const Pixel pa = cs.pixel(static_cast<int>(pair >> 16));
        const Pixel pb = cs.pixel(static_cast<int>(pair & 0xffff));
        if (!t.on_boundary(pa) || !t.on_boundary(pb)) continue;
        const int oa = boundary_ordinal(sh, pa.x - t.x0, pa.y - t.y0);
        const int ob = boundary_ordinal(sh, pb.x - t.x0, pb.y - t.y0);
        const int pslot = sh.slot_of[static_cast<std::size_t>(oa) * sh.boundary + ob];
        if (pslot < 0) continue;
        std::vector<std::int32_t> extras;
        for (const std::int32_t q : entry_extras(cs, e)) {
          if (t.on_boundary(unpack(q))) extras.push_back(q);
        }
        stored += insert_entry(t, st, pslot, e.response, e.length, e.selection,
                               kind, -1, rank, std::move(extras))
                      ? 1
                      : 0;
        (void)ct;
      }
    }

    // Interface pixels with ordinals in both child stores.
    const std::vector<Pixel> iface = tree->interface_pixels(t.id);
    const int iface_len = static_cast<int>(iface.size());
    std::vector<int> iface_ord0(iface.size()), iface_ord1(iface.size());
    for (int i = 0; i < iface_len; ++i) {
      iface_ord0[static_cast<std::size_t>(i)] =
          boundary_ordinal(*cs0.shape, iface[static_cast<std::size_t>(i)].x - t0.x0,
                           iface[static_cast<std::size_t>(i)].y - t0.y0);
      iface_ord1[static_cast<std::size_t>(i)] =
          boundary_ordinal(*cs1.shape, iface[static_cast<std::size_t>(i)].x - t1.x0,
                           iface[static_cast<std::size_t>(i)].y - t1.y0);
    }

    // Best-k subset in optimized mode, the whole interface otherwise.
    std::vector<int> sel(static_cast<std::size_t>(iface_len));
    for (int i = 0; i < iface_len; ++i) sel[static_cast<std::size_t>(i)] = i;
    if (params.mode.optimized && params.mode.k < iface_len) {
      std::vector<int> order = sel;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double va =
            std::max(cs0.best_at[static_cast<std::size_t>(
                         iface_ord0[static_cast<std::size_t>(a)])],
                     cs1.best_at[static_cast<std::size_t>(
                         iface_ord1[static_cast<std::size_t>(a)])]);
        const double vb =
            std::max(cs0.best_at[static_cast<std::size_t>(
                         iface_ord0[static_cast<std::size_t>(b)])],
                     cs1.best_at[static_cast<std::size_t>(
                         iface_ord1[static_cast<std::size_t>(b)])]);
        if (va != vb) return va > vb;
        return a < b;
      });
      order.resize(static_cast<std::size_t>(params.mode.k));
      std::sort(order.begin(), order.end());
      sel = std::move(order);
    }
    const int n_sel = static_cast<int>(sel.size());

    // Parent boundary pixels per child.
    std::vector<SideAnchor> a0, a1;
    const std::vector<Pixel> pb = tree->boundary_pixels(t.id);
    for (int ord = 0; ord < static_cast<int>(pb.size()); ++ord) {
      const Pixel p = pb[static_cast<std::size_t>(ord)];
      const bool ep = t.vertical_split ? p.x == t.split_line : p.y == t.split_line;
      if (t0.contains(p)) {
        a0.push_back({ord, boundary_ordinal(*cs0.shape, p.x - t0.x0, p.y - t0.y0),
                      p, ep});
      }
      if (t1.contains(p)) {
        a1.push_back({ord, boundary_ordinal(*cs1.shape, p.x - t1.x0, p.y - t1.y0),
                      p, ep});
      }
    }

    // Pre-extract, per p2 anchor, the child-1 entries (p3, p2) over the
    // selected interface pixels, so the inner loop touches contiguous data.
    std::vector<CompactRef> cols(a1.size() * static_cast<std::size_t>(n_sel));
    for (std::size_t ai = 0; ai < a1.size(); ++ai) {
      CompactRef* col = cols.data() + ai * static_cast<std::size_t>(n_sel);
      for (int si = 0; si < n_sel; ++si) {
        const int t3 = sel[static_cast<std::size_t>(si)];
        const int slot = cs1.shape->slot_of[static_cast<std::size_t>(
                             iface_ord1[static_cast<std::size_t>(t3)]) *
                             cs1.shape->boundary +
                         a1[ai].child_ord];
        if (slot < 0) {
          col[si].length = 0.0f;
          continue;
        }
        fill_compact(col[si], t, cs1, slot);
      }
    }

    std::uint64_t concats = 0;

    auto process_p1 = [&](const SideAnchor& p1, std::vector<CompactRef>& row,
                          std::uint64_t& local_concats,
                          std::uint64_t& local_stored) {
      // Entries (p1, p3) of child 0 over the selected interface pixels.
      for (int si = 0; si < n_sel; ++si) {
        const int t3 = sel[static_cast<std::size_t>(si)];
        const int slot = cs0.shape->slot_of[static_cast<std::size_t>(p1.child_ord) *
                             cs0.shape->boundary +
                         iface_ord0[static_cast<std::size_t>(t3)]];
        if (slot < 0) {
          row[static_cast<std::size_t>(si)].length = 0.0f;
          continue;
        }
        fill_compact(row[static_cast<std::size_t>(si)], t, cs0, slot);
      }
      const std::int32_t p1_packed = pack(p1.px);
      for (std::size_t ai = 0; ai < a1.size(); ++ai) {
        const SideAnchor& p2 = a1[ai];
        const int pslot =
            sh.slot_of[static_cast<std::size_t>(p1.parent_ord) * sh.boundary +
                       p2.parent_ord];
        if (pslot < 0) continue;
        // The pair of the two interface endpoints shows up with both role
        // assignments; keep the one where p1 is the first endpoint so a
        // single iteration owns the slot (the swapped roles are evaluated
        // against the same slot by the other iteration's pass below).
        if (p1.iface_endpoint && p2.iface_endpoint &&
            p1.parent_ord > p2.parent_ord) {
          continue;
        }
        const CompactRef* col = cols.data() + ai * static_cast<std::size_t>(n_sel);
        double best_sel = 0.0, best_absc = 0.0, best_resp = 0.0, best_len = 0.0;
        int best_rank = 0;
        bool have = false, best_swapped = false;
        const std::int32_t p2_packed = pack(p2.px);
        for (int si = 0; si < n_sel; ++si) {
          const CompactRef& r = row[static_cast<std::size_t>(si)];
          const CompactRef& c = col[si];
          if (r.length == 0.0f || c.length == 0.0f) continue;
          ++local_concats;
          const double len = static_cast<double>(r.length) + c.length;
          const double resp = r.response + c.response;
          if ((r.n_line != 0 || p1.iface_endpoint) &&
              (c.n_line != 0 || p2.iface_endpoint)) {
            if (!junction_clear(t, cs0, r, p1.iface_endpoint, p1_packed, cs1, c,
                                p2.iface_endpoint, p2_packed)) {
              continue;
            }
          }
          const double v = select_value(resp, len);
          const double absc = abs_contrast(resp, len);
          const int rank = sel[static_cast<std::size_t>(si)];
          if (!have || prefer(v, absc, len, rank, best_sel, best_absc, best_len,
                              best_rank)) {
            have = true;
            best_sel = v;
            best_absc = absc;
            best_resp = resp;
            best_len = len;
            best_rank = rank;
          }
        }
        if (p1.iface_endpoint && p2.iface_endpoint) {
          // This iteration owns the endpoint-endpoint pair; also scan the
          // swapped roles (sub-curve to p3 through child 1 first), which the
          // skipped twin iteration would have produced.
          const int p1_ord1 =
              boundary_ordinal(*cs1.shape, p1.px.x - t1.x0, p1.px.y - t1.y0);
          const int p2_ord0 =
              boundary_ordinal(*cs0.shape, p2.px.x - t0.x0, p2.px.y - t0.y0);
          for (int si = 0; si < n_sel; ++si) {
            const int t3 = sel[static_cast<std::size_t>(si)];
            const int s0 = cs0.shape->slot_of[static_cast<std::size_t>(p2_ord0) *
                               cs0.shape->boundary +
                           iface_ord0[static_cast<std::size_t>(t3)]];
            const int s1 = cs1.shape->slot_of[static_cast<std::size_t>(
                               iface_ord1[static_cast<std::size_t>(t3)]) *
                               cs1.shape->boundary +
                           p1_ord1];
            if (s0 < 0 || s1 < 0) continue;
            CompactRef r, c;
            fill_compact(r, t, cs0, s0);
            fill_compact(c, t, cs1, s1);
            if (r.length == 0.0f || c.length == 0.0f) continue;
            ++local_concats;
            const double len = static_cast<double>(r.length) + c.length;
            const double resp = r.response + c.response;
            if (!junction_clear(t, cs0, r, true, p2_packed, cs1, c, true,
                                p1_packed)) {
              continue;
            }
            const double v = select_value(resp, len);
            const double absc = abs_contrast(resp, len);
            if (!have || prefer(v, absc, len, t3, best_sel, best_absc, best_len,
                                best_rank)) {
              have = true;
              best_sel = v;
              best_absc = absc;
              best_resp = resp;
              best_len = len;
              best_rank = t3;
              best_swapped = true;
            }
          }
        }
        if (!have) continue;
        const Pixel p3 = iface[static_cast<std::size_t>(best_rank)];
        // Footprint of the winner on the parent boundary.
        const int ord0_first = best_swapped ? boundary_ordinal(*cs0.shape,
                                                  p2.px.x - t0.x0,
                                                  p2.px.y - t0.y0)
                                            : p1.child_ord;
        const int ord1_second = best_swapped ? boundary_ordinal(*cs1.shape,
                                                   p1.px.x - t1.x0,
                                                   p1.px.y - t1.y0)
                                             : p2.child_ord;
        std::vector<std::int32_t> extras;
        const int s0 = cs0.shape->slot_of[static_cast<std::size_t>(ord0_first) *
                           cs0.shape->boundary +
                       iface_ord0[static_cast<std::size_t>(best_rank)]];
        const int s1 = cs1.shape->slot_of[static_cast<std::size_t>(
                           iface_ord1[static_cast<std::size_t>(best_rank)]) *
                           cs1.shape->boundary +
                       ord1_second];
        for (const std::int32_t q :
             entry_extras(cs0, cs0.entries[static_cast<std::size_t>(s0)])) {
          if (t.on_boundary(unpack(q))) extras.push_back(q);
        }
        for (const std::int32_t q :
             entry_extras(cs1, cs1.entries[static_cast<std::size_t>(s1)])) {
          if (t.on_boundary(unpack(q))) extras.push_back(q);
        }
        if (t.on_boundary(p3)) extras.push_back(pack(p3));
        std::sort(extras.begin(), extras.end());
        extras.erase(std::unique(extras.begin(), extras.end()), extras.end());
        const std::uint32_t cpair =
            sh.slot_pair[static_cast<std::size_t>(pslot)];
        bool a_is_p1 = static_cast<int>(cpair >> 16) == p1.parent_ord;
        if (best_swapped) a_is_p1 = !a_is_p1;
        local_stored +=
            insert_entry(t, st, pslot, best_resp, best_len, best_sel,
                         a_is_p1 ? detail::kConcatA0 : detail::kConcatA1,
                         pack(p3), best_rank, std::move(extras))
                ? 1
                : 0;
      }
    };

    // The work is data-parallel over p1 anchors except that the single
    // endpoint-endpoint pair may be touched from two anchors; that pair is
    // claimed by the lower parent ordinal above, and the other anchor skips
    // it, so slots written by different anchors never alias. Still, two
    // anchors sharing a slot via the union phase is impossible (union runs
    // first, sequentially), so a parallel sweep is deterministic.
    const std::uint64_t work = static_cast<std::uint64_t>(a0.size()) *
                               a1.size() * static_cast<std::uint64_t>(n_sel);
    if (n_threads > 1 && work > 2'000'000) {
      // Chunked sweep; each worker owns a contiguous range of p1 anchors and
      // a private row buffer.
      std::vector<std::thread> workers;
      std::vector<std::uint64_t> wconcats(static_cast<std::size_t>(n_threads), 0);
      std::vector<std::uint64_t> wstored(static_cast<std::size_t>(n_threads), 0);
      const std::size_t per = (a0.size() + n_threads - 1) / n_threads;
      for (int w = 0; w < n_threads; ++w) {
        const std::size_t lo = per * static_cast<std::size_t>(w);
        const std::size_t hi = std::min(a0.size(), lo + per);
        if (lo >= hi) break;
        workers.emplace_back([&, lo, hi, w]() {
          std::vector<CompactRef> row(static_cast<std::size_t>(n_sel));
          for (std::size_t i = lo; i < hi; ++i) {
            process_p1(a0[i], row, wconcats[static_cast<std::size_t>(w)],
                       wstored[static_cast<std::size_t>(w)]);
          }
        });
      }
      for (auto& th : workers) th.join();
      for (int w = 0; w < n_threads; ++w) {
        concats += wconcats[static_cast<std::size_t>(w)];
        stored += wstored[static_cast<std::size_t>(w)];
      }
    } else {
      std::vector<CompactRef> row(static_cast<std::size_t>(n_sel));
      for (const SideAnchor& p1 : a0) process_p1(p1, row, concats, stored);
    }
    finalize_best_at(st);
    bump(t.level, concats, stored);
  }

  void process(int tile_id, int depth) {
    const Tile& t = tree->tile(tile_id);
    if (t.leaf()) {
      bottom_level(t);
      return;
    }
    if (depth < async_depth && n_threads > 1) {
      auto f = std::async(std::launch::async,
                          [&, c = t.child[0]] { process(c, depth + 1); });
      process(t.child[1], depth + 1);
      f.get();
    } else {
      process(t.child[0], depth + 1);
      process(t.child[1], depth + 1);
    }
    merge_tile(t);
  }
};

}  // namespace

int TileStore::ordinal(Pixel p) const {
  return boundary_ordinal(*shape, p.x - x0, p.y - y0);
}

Pixel TileStore::pixel(int ordinal) const {
  return Pixel{x0 + shape->rel_x[static_cast<std::size_t>(ordinal)],
               y0 + shape->rel_y[static_cast<std::size_t>(ordinal)]};
}

std::size_t TileStore::filled() const {
  std::size_t n = 0;
  for (const StoreEntry& e : entries) n += e.valid() ? 1 : 0;
  return n;
}

BeamTree build_beam_tree(const Raster& img, const DetectorParams& params) {
  Builder b(img, params);
  b.process(0, 0);
  BeamTree out;
  out.partition_ = std::move(b.tree);
  out.params_ = b.params;
  out.counters_ = std::move(b.counters);
  out.stores_ = std::move(b.stores);
  out.shapes_ = std::move(b.shapes);
  return out;
}

ThresholdParams BeamTree::threshold_params() const {
  ThresholdParams tp;
  tp.sigma = detection_noise(params_.sigma);
  tp.width = params_.filter.width;
  tp.pixels = static_cast<double>(partition_->image_width()) *
              static_cast<double>(partition_->image_height());
  tp.beta = params_.beta;
  return tp;
}

std::vector<std::uint64_t> BeamTree::store_sizes_per_level() const {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(partition_->levels()), 0);
  for (const Tile& t : partition_->tiles()) {
    out[static_cast<std::size_t>(t.level)] +=
        stores_[static_cast<std::size_t>(t.id)].filled();
  }
  return out;
}

std::size_t BeamTree::stored_count(int tile_id) const {
  return stores_[static_cast<std::size_t>(tile_id)].filled();
}

std::vector<StoredCurve> BeamTree::stored_curves(int tile_id) const {
  const TileStore& st = stores_[static_cast<std::size_t>(tile_id)];
  std::vector<StoredCurve> out;
  for (int slot = 0; slot < st.shape->n_slots; ++slot) {
    const StoreEntry& e = st.entries[static_cast<std::size_t>(slot)];
    if (!e.valid()) continue;
    const std::uint32_t pair = st.shape->slot_pair[static_cast<std::size_t>(slot)];
    StoredCurve c;
    c.tile = tile_id;
    c.slot = slot;
    c.a = st.pixel(static_cast<int>(pair >> 16));
    c.b = st.pixel(static_cast<int>(pair & 0xffff));
    c.response = e.response;
    c.length = e.length;
    c.selection = e.selection;
    out.push_back(std::move(c));
  }
  return out;
}

const StoreEntry* BeamTree::entry_for(int tile_id, Pixel a, Pixel b) const {
  const TileStore& st = stores_[static_cast<std::size_t>(tile_id)];
  const Tile& t = partition_->tile(tile_id);
  if (!t.on_boundary(a) || !t.on_boundary(b)) return nullptr;
  const int oa = st.ordinal(a);
  const int ob = st.ordinal(b);
  const int slot =
      st.shape->slot_of[static_cast<std::size_t>(oa) * st.shape->boundary + ob];
  if (slot < 0) return nullptr;
  const StoreEntry& e = st.entries[static_cast<std::size_t>(slot)];
  return e.valid() ? &e : nullptr;
}

namespace {

// Appends the stored chain from `from` to `to` into `out`; `skip_first`
// omits the junction pixel already emitted by the previous piece.
void append_between(const BeamTree& bt, int tile_id, Pixel from, Pixel to,
                    bool skip_first, std::vector<Pixel>& out) {
  const TileStore& st = bt.store(tile_id);
  const Tile& t = bt.partition().tile(tile_id);
  const int oa = st.ordinal(from);
  const int ob = st.ordinal(to);
  const int slot =
      st.shape->slot_of[static_cast<std::size_t>(oa) * st.shape->boundary + ob];
  if (slot < 0) throw std::logic_error("no slot for sub-curve endpoints");
  const StoreEntry& e = st.entries[static_cast<std::size_t>(slot)];
  if (!e.valid()) throw std::logic_error("reconstructing an empty slot");
  const std::uint32_t pair = st.shape->slot_pair[static_cast<std::size_t>(slot)];
  const Pixel pa = st.pixel(static_cast<int>(pair >> 16));
  const bool reversed = !(pa == from);
  switch (e.kind) {
    case detail::kLeafLine: {
      // The stored chain is the rasterized line in canonical orientation;
      // rasterization is not symmetric under endpoint swap.
      std::vector<Pixel> line = reversed ? bresenham(to, from) : bresenham(from, to);
      if (reversed) std::reverse(line.begin(), line.end());
      out.insert(out.end(), line.begin() + (skip_first ? 1 : 0), line.end());
      return;
    }
    case detail::kUnion0:
      append_between(bt, t.child[0], from, to, skip_first, out);
      return;
    case detail::kUnion1:
      append_between(bt, t.child[1], from, to, skip_first, out);
      return;
    case detail::kConcatA0:
    case detail::kConcatA1: {
      const Pixel p3 = unpack(e.junction);
      int c_first = e.kind == detail::kConcatA0 ? t.child[0] : t.child[1];
      int c_second = e.kind == detail::kConcatA0 ? t.child[1] : t.child[0];
      if (reversed) std::swap(c_first, c_second);
      append_between(bt, c_first, from, p3, skip_first, out);
      append_between(bt, c_second, p3, to, true, out);
      return;
    }
    default:
      throw std::logic_error("bad entry kind");
  }
}

}  // namespace

std::vector<Pixel> BeamTree::chain(int tile_id, int slot) const {
  const TileStore& st = store(tile_id);
  const std::uint32_t pair = st.shape->slot_pair[static_cast<std::size_t>(slot)];
  std::vector<Pixel> out;
  append_between(*this, tile_id, st.pixel(static_cast<int>(pair >> 16)),
                 st.pixel(static_cast<int>(pair & 0xffff)), false, out);
  return out;
}

std::vector<Pixel> BeamTree::chain_for(int tile_id, Pixel a, Pixel b) const {
  std::vector<Pixel> out;
  append_between(*this, tile_id, a, b, false, out);
  return out;
}

std::vector<Pixel> best_pixels(const BeamTree& tree, int tile_id, int k) {
  if (k < 1) throw std::invalid_argument("best_pixels needs k >= 1");
  const Tile& t = tree.partition().tile(tile_id);
  if (t.leaf()) throw std::invalid_argument("leaf tiles have no interface");
  const TileStore& cs0 = tree.store(t.child[0]);
  const TileStore& cs1 = tree.store(t.child[1]);
  const std::vector<Pixel> iface = tree.partition().interface_pixels(tile_id);
  std::vector<int> order(iface.size());
  for (std::size_t i = 0; i < iface.size(); ++i) order[i] = static_cast<int>(i);
  if (k >= static_cast<int>(iface.size())) {
    std::vector<Pixel> out = iface;
    return out;
  }
  auto value = [&](int i) {
    const Pixel p = iface[static_cast<std::size_t>(i)];
    return std::max(cs0.best_at[static_cast<std::size_t>(cs0.ordinal(p))],
                    cs1.best_at[static_cast<std::size_t>(cs1.ordinal(p))]);
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double va = value(a), vb = value(b);
    if (va != vb) return va > vb;
    return a < b;
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  std::vector<Pixel> out;
  out.reserve(order.size());
  for (int i : order) out.push_back(iface[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<ScoredCurve> collect_curves(const BeamTree& tree) {
  const ThresholdParams tp = tree.threshold_params();
  const double inv_w = 1.0 / tp.width;
  struct Hit {
    double score;
    int tile;
    int slot;
  };
  std::vector<Hit> hits;
  const auto& tiles = tree.partition().tiles();
  for (const Tile& t : tiles) {
    const TileStore& st = tree.store(t.id);
    for (int slot = 0; slot < st.shape->n_slots; ++slot) {
      const StoreEntry& e = st.entries[static_cast<std::size_t>(slot)];
      if (!e.valid()) continue;
      const double score = edge_score(e.response, e.length, tp);
      if (score > 0.0) hits.push_back({score, t.id, slot});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tile != b.tile) return a.tile < b.tile;
    return a.slot < b.slot;
  });
  std::vector<ScoredCurve> out;
  out.reserve(hits.size());
  for (const Hit& h : hits) {
    const TileStore& st = tree.store(h.tile);
    const StoreEntry& e = st.entries[static_cast<std::size_t>(h.slot)];
    const std::uint32_t pair = st.shape->slot_pair[static_cast<std::size_t>(h.slot)];
    ScoredCurve c;
    c.score = h.score;
    c.response = e.response;
    c.length = e.length;
    c.contrast = e.response * inv_w / e.length;
    c.tile = h.tile;
    c.slot = h.slot;
    c.a = st.pixel(static_cast<int>(pair >> 16));
    c.b = st.pixel(static_cast<int>(pair & 0xffff));
    c.pixels = tree.chain(h.tile, h.slot);
    out.push_back(std::move(c));
  }
  return out;
}

std::string format_curves(const std::vector<ScoredCurve>& curves) {
  std::ostringstream os;
  for (const ScoredCurve& c : curves) {
    os << c.score << " " << c.contrast << " " << c.length << " " << c.a.x << " "
       << c.a.y << " " << c.b.x << " " << c.b.y << " ";
    for (std::size_t i = 0; i < c.pixels.size(); ++i) {
      os << (i ? ";" : "") << c.pixels[i].x << "," << c.pixels[i].y;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace beamcurve
