#pragma once

#include "beamcurve/partition.hpp"
#include "beamcurve/response.hpp"
#include "beamcurve/scoring.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace beamcurve {

/// Merge search strategy: Basic scans every interface pixel; Optimized
/// scans only the k interface pixels with the best incoming responses.
struct MergeMode {
  bool optimized = false;
  int k = 2;

  static MergeMode basic() { return MergeMode{false, 0}; }
  static MergeMode best_k(int k) { return MergeMode{true, k}; }
};

/// What "best" means when competing responses meet: the statistical edge
/// score, or raw |contrast| (used by threshold calibration).
enum class SelectionRule { kScore, kContrast };

struct DetectorParams {
  FilterParams filter{};
  double sigma = 1.0;
  double beta = 0.65;
  MergeMode mode{};
  SelectionRule selection = SelectionRule::kScore;
  int n_min = 5;
  int threads = 0;  // 0 = hardware concurrency
};

struct OpCounters {
  std::uint64_t concatenations = 0;
  std::uint64_t responses_stored = 0;
  std::vector<std::uint64_t> concatenations_per_level;
  std::vector<std::uint64_t> stored_per_level;
};

namespace detail {

// Boundary-geometry tables shared by all tiles of one width x height shape.
struct ShapeInfo {
  int w = 0, h = 0, boundary = 0;
  std::vector<std::int16_t> rel_x, rel_y;   // ordinal -> relative coords
  std::vector<std::uint8_t> side;           // ordinal -> side bitmask
  std::vector<std::int32_t> slot_of;        // boundary*boundary -> slot or -1
  std::vector<std::uint32_t> slot_pair;     // slot -> (ord_a << 16) | ord_b
  int n_slots = 0;
};

enum : std::uint8_t {
  kEmpty = 0,
  kLeafLine = 1,
  kConcatA0 = 2,  // canonical endpoint a reaches the junction through child 0
  kConcatA1 = 3,
  kUnion0 = 4,
  kUnion1 = 5,
};

struct StoreEntry {
  double response = 0.0;
  double selection = 0.0;  // cached selection value
  float length = 0.0f;     // 0 = empty slot
  std::int32_t junction = -1;
  std::uint8_t kind = kEmpty;
  std::uint8_t fp_extra = 0;  // boundary touches beyond endpoints; 255 = pool
  std::int32_t fp[2] = {0, 0};

  bool valid() const { return kind != kEmpty; }
};

struct TileStore {
  const ShapeInfo* shape = nullptr;
  int x0 = 0, y0 = 0;
  std::vector<StoreEntry> entries;   // n_slots
  std::vector<double> best_at;       // per boundary ordinal, max selection
  std::vector<std::int32_t> fp_pool;

  int ordinal(Pixel p) const;
  Pixel pixel(int ordinal) const;
  std::size_t filled() const;
};

}  // namespace detail

/// A stored best response, materialized for inspection.
struct StoredCurve {
  int tile = 0;
  int slot = 0;
  Pixel a{}, b{};
  double response = 0.0;
  double length = 0.0;
  double selection = 0.0;
};

/// A response that passed the detection threshold.
struct ScoredCurve {
  double score = 0.0;
  double response = 0.0;
  double length = 0.0;
  double contrast = 0.0;
  int tile = 0;
  int slot = 0;
  Pixel a{}, b{};
  std::vector<Pixel> pixels;
};

/// The populated beam-curve binary tree: one response store per tile plus
/// the operation counters backing the complexity claims.
class BeamTree {
 public:
  const PartitionTree& partition() const { return *partition_; }
  const DetectorParams& params() const { return params_; }
  const OpCounters& counters() const { return counters_; }
  ThresholdParams threshold_params() const;

  /// Final number of stored responses, per tree level.
  std::vector<std::uint64_t> store_sizes_per_level() const;
  std::size_t stored_count(int tile_id) const;

  /// All stored responses of one tile.
  std::vector<StoredCurve> stored_curves(int tile_id) const;

  /// Reconstructs the pixel chain of a stored response (ordered a -> b with
  /// a, b in canonical slot order).
  std::vector<Pixel> chain(int tile_id, int slot) const;

  /// Looks up the stored response for an endpoint pair, if any.
  const detail::StoreEntry* entry_for(int tile_id, Pixel a, Pixel b) const;
  std::vector<Pixel> chain_for(int tile_id, Pixel a, Pixel b) const;

  const detail::TileStore& store(int tile_id) const {
    return stores_[static_cast<std::size_t>(tile_id)];
  }

 private:
  friend BeamTree build_beam_tree(const Raster&, const DetectorParams&);
  friend std::vector<Pixel> best_pixels(const BeamTree&, int, int);

  std::shared_ptr<const PartitionTree> partition_;
  DetectorParams params_;
  OpCounters counters_;
  std::vector<detail::TileStore> stores_;
  std::vector<std::unique_ptr<detail::ShapeInfo>> shapes_;
};

/// Runs the full bottom-up dynamic program over the image.
BeamTree build_beam_tree(const Raster& img, const DetectorParams& params);

/// The k interface pixels of an internal tile with the highest incoming
/// response (from either child), ties broken by position along the
/// interface. k >= interface length returns the whole interface.
std::vector<Pixel> best_pixels(const BeamTree& tree, int tile_id, int k);

/// All stored responses with positive edge score, highest first; ties by
/// tile id then slot. Pixel chains are materialized.
std::vector<ScoredCurve> collect_curves(const BeamTree& tree);

/// One line per curve: score, contrast, length, endpoints, pixel chain.
std::string format_curves(const std::vector<ScoredCurve>& curves);

}  // namespace beamcurve
