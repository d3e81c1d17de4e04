#pragma once

// Mapping between geographic coordinates, grid cells, binary domain-tree
// nodes, SSE keywords and HVE scalar values.
//
// The 1D domain [0, L) is the leaf level of a complete binary tree. A node is
// identified by the bit path from the root (left edge = '0', right edge =
// '1'); the root has the empty path. Node level equals path length, so leaves
// sit at level log2(L).

#include <cstdint>
#include <string>
#include <vector>

#include "geomarket/common.hpp"

namespace geomarket::geo {

struct BoundingBox {
  double min_lat = 0.0;
  double max_lat = 0.0;
  double min_lon = 0.0;
  double max_lon = 0.0;

  bool contains(double lat, double lon) const noexcept {
    return lat >= min_lat && lat <= max_lat && lon >= min_lon && lon <= max_lon;
  }
};

/// Los Angeles check-in area used by the evaluation workloads.
BoundingBox los_angeles_bbox();

class DomainParams {
 public:
  /// `side` must be a power of two in [2, 2^30]; `h_max` in [0, log2(side)].
  DomainParams(std::uint32_t side, std::uint32_t h_max, BoundingBox bbox = los_angeles_bbox());

  static DomainParams from_log(std::uint32_t log_side, std::uint32_t h_max,
                               BoundingBox bbox = los_angeles_bbox());

  std::uint32_t side() const noexcept { return side_; }
  std::uint32_t log_side() const noexcept { return log_side_; }
  std::uint32_t h_max() const noexcept { return h_max_; }
  const BoundingBox& bbox() const noexcept { return bbox_; }
  /// Largest query side (in cells) allowed by h_max.
  std::uint32_t max_query_side() const noexcept { return side_ >> h_max_; }
  /// Exclusive upper bound of the HVE scalar encoding: 2L * 2L.
  std::uint64_t hve_value_bound() const noexcept { return 4ULL * side_ * side_; }

 private:
  std::uint32_t side_;
  std::uint32_t log_side_;
  std::uint32_t h_max_;
  BoundingBox bbox_;
};

struct GridLocation {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  auto operator<=>(const GridLocation&) const = default;
};

enum class Axis : std::uint8_t { kNone, kX, kY };

struct NodeId {
  Axis axis = Axis::kNone;
  std::string path;  // characters '0'/'1'; empty = root

  std::uint32_t level() const noexcept { return static_cast<std::uint32_t>(path.size()); }
  /// Path, or "∅" for the root.
  std::string label() const;
  /// Axis prefix + label, e.g. "x011", "y∅".
  std::string keyword() const;
  /// Leaf span [lo, hi] of this node in a domain with `log_side` levels.
  std::pair<std::uint32_t, std::uint32_t> span(std::uint32_t log_side) const;

  bool operator==(const NodeId&) const = default;
};

/// Inclusive cell rectangle.
struct SpatialRange {
  std::uint32_t x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;

  bool contains(GridLocation loc) const noexcept {
    return loc.x >= x_lo && loc.x <= x_hi && loc.y >= y_lo && loc.y <= y_hi;
  }
  bool operator==(const SpatialRange&) const = default;
};

struct HveLevelValue {
  std::uint32_t level = 0;
  std::uint64_t value = 0;
  bool operator==(const HveLevelValue&) const = default;
};

/// One conjunctive keyword query; `first` is the node closer to the leaves.
struct ConjunctiveTerm {
  NodeId first;
  NodeId second;
  std::pair<std::string, std::string> keywords() const { return {first.keyword(), second.keyword()}; }
};

GridLocation snap_to_grid(double lat, double lon, const DomainParams& params);

void validate(GridLocation loc, const DomainParams& params);
void validate(const SpatialRange& range, const DomainParams& params);

/// Prefixes of pos's binary path, ordered leaf -> root (root included).
std::vector<NodeId> covering_nodes_1d(std::uint32_t pos, const DomainParams& params, Axis axis = Axis::kNone);

/// Keyword set of an object: covering nodes of x and y, prefixed "x"/"y",
/// root and levels below h_max dropped. Order: x leaf->top, then y.
std::vector<std::string> object_keywords(GridLocation loc, const DomainParams& params);

/// Minimal set of nodes whose leaves partition [lo, hi], left to right.
std::vector<NodeId> brc_cover_1d(std::uint32_t lo, std::uint32_t hi, const DomainParams& params,
                                 Axis axis = Axis::kNone);

/// Cross join of the x and y covers, deepest keyword first in every pair and
/// pairs ordered by first-keyword depth (ties: lexicographic keywords).
std::vector<ConjunctiveTerm> decompose_range_query(const SpatialRange& range, const DomainParams& params);

/// The single pair for a node-aligned range; throws kNotAligned otherwise.
ConjunctiveTerm aligned_query_keywords(const SpatialRange& range, const DomainParams& params);

/// True iff [lo, hi] is exactly one node's span.
bool is_aligned(std::uint32_t lo, std::uint32_t hi, const DomainParams& params);

/// 0-based pre-order index of `node` in the full tree (root = 0).
std::uint64_t preorder_id(const NodeId& node, const DomainParams& params);

/// One value per level in [h_max, logL], ascending by level.
std::vector<HveLevelValue> hve_level_values(GridLocation loc, const DomainParams& params);

/// Scalar for a square, node-aligned query range.
HveLevelValue hve_query_value(const SpatialRange& range, const DomainParams& params);

}  // namespace geomarket::geo
