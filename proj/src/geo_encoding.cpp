#include "geomarket/geo_encoding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace geomarket::geo {

namespace {

std::string path_bits(std::uint32_t value, std::uint32_t width) {
  std::string s(width, '0');
  for (std::uint32_t i = 0; i < width; ++i) {
    if ((value >> (width - 1 - i)) & 1u) s[i] = '1';
  }
  return s;
}

char axis_prefix(Axis axis) {
  switch (axis) {
    case Axis::kX: return 'x';
    case Axis::kY: return 'y';
    case Axis::kNone: break;
  }
  return '\0';
}

std::uint32_t check_range_1d(std::uint32_t lo, std::uint32_t hi, const DomainParams& params, char axis) {
  if (lo > hi || hi >= params.side()) {
    throw Error(ErrorCode::kOutOfDomain, std::string("range on axis ") + axis + " outside [0, L)");
  }
  std::uint32_t size = hi - lo + 1;
  if (size > params.max_query_side()) {
    throw Error(ErrorCode::kSizeLimit, std::string("range on axis ") + axis + " exceeds L/2^h_max = " +
                                           std::to_string(params.max_query_side()) + " cells");
  }
  return size;
}

}  // namespace

BoundingBox los_angeles_bbox() { return BoundingBox{33.6996, 34.3423, -118.6846, -118.1444}; }

DomainParams::DomainParams(std::uint32_t side, std::uint32_t h_max, BoundingBox bbox)
    : side_(side), log_side_(0), h_max_(h_max), bbox_(bbox) {
  if (side < 2 || side > (1u << 30) || !std::has_single_bit(side)) {
    throw Error(ErrorCode::kInvalidArgument, "grid side L must be a power of two in [2, 2^30]");
  }
  log_side_ = static_cast<std::uint32_t>(std::countr_zero(side));
  if (h_max > log_side_) throw Error(ErrorCode::kInvalidArgument, "h_max must lie in [0, log2 L]");
  if (!(bbox.min_lat < bbox.max_lat) || !(bbox.min_lon < bbox.max_lon)) {
    throw Error(ErrorCode::kInvalidArgument, "bounding box must have positive extent");
  }
}

DomainParams DomainParams::from_log(std::uint32_t log_side, std::uint32_t h_max, BoundingBox bbox) {
  if (log_side < 1 || log_side > 30) throw Error(ErrorCode::kInvalidArgument, "log2 L must be in [1, 30]");
  return DomainParams(1u << log_side, h_max, bbox);
}

std::string NodeId::label() const { return path.empty() ? std::string("\xE2\x88\x85") : path; }

std::string NodeId::keyword() const {
  std::string out;
  if (char p = axis_prefix(axis)) out.push_back(p);
  out += label();
  return out;
}

std::pair<std::uint32_t, std::uint32_t> NodeId::span(std::uint32_t log_side) const {
  std::uint32_t prefix = 0;
  for (char c : path) prefix = (prefix << 1) | (c == '1' ? 1u : 0u);
  std::uint32_t width = log_side - level();
  std::uint32_t lo = prefix << width;
  std::uint32_t hi = lo + ((1u << width) - 1u);
  return {lo, hi};
}

void validate(GridLocation loc, const DomainParams& params) {
  if (loc.x >= params.side() || loc.y >= params.side()) {
    throw Error(ErrorCode::kOutOfDomain, "grid location outside [0, L)^2");
  }
}

void validate(const SpatialRange& range, const DomainParams& params) {
  check_range_1d(range.x_lo, range.x_hi, params, 'x');
  check_range_1d(range.y_lo, range.y_hi, params, 'y');
}

GridLocation snap_to_grid(double lat, double lon, const DomainParams& params) {
  const BoundingBox& b = params.bbox();
  if (!std::isfinite(lat) || !std::isfinite(lon) || !b.contains(lat, lon)) {
    throw Error(ErrorCode::kOutOfDomain, "coordinate outside the domain bounding box");
  }
  auto cell = [&](double v, double lo, double hi) {
    double t = (v - lo) / (hi - lo) * static_cast<double>(params.side());
    auto c = static_cast<std::uint32_t>(std::floor(t));
    return std::min(c, params.side() - 1);
  };
  return GridLocation{cell(lon, b.min_lon, b.max_lon), cell(lat, b.min_lat, b.max_lat)};
}

std::vector<NodeId> covering_nodes_1d(std::uint32_t pos, const DomainParams& params, Axis axis) {
  if (pos >= params.side()) throw Error(ErrorCode::kOutOfDomain, "position outside [0, L)");
  std::string full = path_bits(pos, params.log_side());
  std::vector<NodeId> nodes;
  nodes.reserve(full.size() + 1);
  for (std::size_t len = full.size() + 1; len-- > 0;) nodes.push_back(NodeId{axis, full.substr(0, len)});
  return nodes;
}

std::vector<std::string> object_keywords(GridLocation loc, const DomainParams& params) {
  validate(loc, params);
  std::vector<std::string> words;
  words.reserve(2 * params.log_side());
  for (auto [axis, pos] : {std::pair{Axis::kX, loc.x}, std::pair{Axis::kY, loc.y}}) {
    for (const NodeId& node : covering_nodes_1d(pos, params, axis)) {
      if (node.level() == 0 || node.level() < params.h_max()) continue;
      words.push_back(node.keyword());
    }
  }
  return words;
}

std::vector<NodeId> brc_cover_1d(std::uint32_t lo, std::uint32_t hi, const DomainParams& params, Axis axis) {
  check_range_1d(lo, hi, params, axis == Axis::kY ? 'y' : 'x');
  std::vector<NodeId> nodes;
  // Greedy left-to-right: the largest aligned block starting at `cur` that
  // stays inside the range is always part of the minimal cover.
  std::uint64_t cur = lo;
  const std::uint64_t end = static_cast<std::uint64_t>(hi) + 1;
  while (cur < end) {
    std::uint32_t width = cur == 0 ? params.log_side()
                                   : std::min<std::uint32_t>(std::countr_zero(cur), params.log_side());
    while (cur + (1ULL << width) > end) --width;
    std::uint32_t level = params.log_side() - width;
    nodes.push_back(NodeId{axis, path_bits(static_cast<std::uint32_t>(cur >> width), level)});
    cur += 1ULL << width;
  }
  return nodes;
}

bool is_aligned(std::uint32_t lo, std::uint32_t hi, const DomainParams& params) {
  if (lo > hi || hi >= params.side()) return false;
  std::uint32_t size = hi - lo + 1;
  return std::has_single_bit(size) && lo % size == 0;
}

std::vector<ConjunctiveTerm> decompose_range_query(const SpatialRange& range, const DomainParams& params) {
  validate(range, params);
  auto xs = brc_cover_1d(range.x_lo, range.x_hi, params, Axis::kX);
  auto ys = brc_cover_1d(range.y_lo, range.y_hi, params, Axis::kY);
  std::vector<ConjunctiveTerm> terms;
  terms.reserve(xs.size() * ys.size());
  for (const NodeId& x : xs) {
    for (const NodeId& y : ys) {
      bool x_first = x.level() > y.level() || (x.level() == y.level() && x.keyword() < y.keyword());
      terms.push_back(x_first ? ConjunctiveTerm{x, y} : ConjunctiveTerm{y, x});
    }
  }
  std::sort(terms.begin(), terms.end(), [](const ConjunctiveTerm& a, const ConjunctiveTerm& b) {
    if (a.first.level() != b.first.level()) return a.first.level() > b.first.level();
    return a.keywords() < b.keywords();
  });
  return terms;
}

ConjunctiveTerm aligned_query_keywords(const SpatialRange& range, const DomainParams& params) {
  validate(range, params);
  if (!is_aligned(range.x_lo, range.x_hi, params)) {
    throw Error(ErrorCode::kNotAligned, "range on axis x is not a single tree node");
  }
  if (!is_aligned(range.y_lo, range.y_hi, params)) {
    throw Error(ErrorCode::kNotAligned, "range on axis y is not a single tree node");
  }
  auto terms = decompose_range_query(range, params);
  return terms.front();
}

std::uint64_t preorder_id(const NodeId& node, const DomainParams& params) {
  if (node.level() > params.log_side()) throw Error(ErrorCode::kOutOfDomain, "node deeper than the leaf level");
  std::uint64_t id = 0;
  for (std::uint32_t depth = 0; depth < node.level(); ++depth) {
    id += 1;  // step to a child
    // Going right skips the whole left subtree rooted at depth + 1.
    if (node.path[depth] == '1') id += (1ULL << (params.log_side() - depth)) - 1;
  }
  return id;
}

std::vector<HveLevelValue> hve_level_values(GridLocation loc, const DomainParams& params) {
  validate(loc, params);
  const std::uint32_t log_side = params.log_side();
  const std::string x_path = path_bits(loc.x, log_side);
  const std::string y_path = path_bits(loc.y, log_side);
  std::vector<HveLevelValue> values;
  values.reserve(log_side - params.h_max() + 1);
  for (std::uint32_t level = params.h_max(); level <= log_side; ++level) {
    std::uint64_t nx = preorder_id(NodeId{Axis::kX, x_path.substr(0, level)}, params);
    std::uint64_t ny = preorder_id(NodeId{Axis::kY, y_path.substr(0, level)}, params);
    values.push_back(HveLevelValue{level, nx * 2ULL * params.side() + ny});
  }
  return values;
}

HveLevelValue hve_query_value(const SpatialRange& range, const DomainParams& params) {
  validate(range, params);
  if (range.x_hi - range.x_lo != range.y_hi - range.y_lo) {
    throw Error(ErrorCode::kNotAligned, "HVE queries must be square");
  }
  ConjunctiveTerm term = aligned_query_keywords(range, params);
  const NodeId& nx = term.first.axis == Axis::kX ? term.first : term.second;
  const NodeId& ny = term.first.axis == Axis::kX ? term.second : term.first;
  if (nx.level() < params.h_max()) throw Error(ErrorCode::kSizeLimit, "query level above h_max");
  return HveLevelValue{nx.level(), preorder_id(nx, params) * 2ULL * params.side() + preorder_id(ny, params)};
}

}  // namespace geomarket::geo
