#pragma once

// Desk-scale measurement harness: check-in datasets, query workloads, the
// SSE / HVE / cost benchmarks, scripted marketplace scenarios and report
// emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "geomarket/geo_encoding.hpp"
#include "geomarket/ledger.hpp"
#include "geomarket/marketplace.hpp"
#include "json.hpp"

namespace geomarket::bench {

using nlohmann::json;

struct CheckIn {
  std::string user;
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const CheckIn&) const = default;
};

using Dataset = std::vector<CheckIn>;

/// Reads either Gowalla-style rows (user, time, lat, lon, location; tab or
/// comma separated) or three-column rows (user, lat, lon). Unparseable lines
/// and rows outside `bbox` are dropped.
Dataset load_checkins(const std::filesystem::path& path, const geo::BoundingBox& bbox = geo::los_angeles_bbox());
void save_checkins(const Dataset& data, const std::filesystem::path& path);

/// Clustered synthetic check-ins inside `bbox`, deterministic in `seed`.
Dataset synthetic_checkins(std::size_t count, std::uint64_t seed,
                           const geo::BoundingBox& bbox = geo::los_angeles_bbox());

/// Prefixes of one seeded shuffle, so every smaller sample is a subset of
/// every larger one. Sizes must be ascending; each is capped at the
/// dataset size.
std::vector<Dataset> nested_samples(const Dataset& data, const std::vector<std::size_t>& sizes, std::uint64_t seed);

struct RangeSize {
  double width_m = 0.0;   // along longitude (x)
  double height_m = 0.0;  // along latitude (y)
  std::string label() const;
};

std::vector<RangeSize> default_range_sizes();

/// Domain side lengths in metres, (x, y).
std::pair<double, double> domain_extent_m(const geo::BoundingBox& bbox);

struct Query {
  std::size_t size_class = 0;
  geo::GridLocation anchor;
  geo::SpatialRange arbitrary;  // centred on the anchor
  geo::SpatialRange aligned;    // smallest node-aligned square holding the anchor and covering the range side
};

struct QueryWorkload {
  std::vector<RangeSize> sizes;
  std::vector<double> side_fraction;  // larger of the two axis fractions, per size
  std::vector<Query> queries;         // per anchor, one query of every size
};

QueryWorkload gen_workload(const Dataset& data, const geo::DomainParams& domain, const std::vector<RangeSize>& sizes,
                           std::size_t count, std::uint64_t seed);

/// Snapped grid locations, one per check-in.
std::vector<geo::GridLocation> snap_all(const Dataset& data, const geo::DomainParams& domain);

/// Plaintext filter.
std::vector<std::size_t> brute_force(const std::vector<geo::GridLocation>& locs, const geo::SpatialRange& r);

using Cell = std::variant<std::int64_t, double, std::string>;

struct Report {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> timing_columns;  // excluded from determinism checks
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  const Cell& at(std::size_t row, const std::string& column) const;
  json to_json() const;
  static Report from_json(const json& j);
  std::string to_csv() const;
  /// Same report with timing columns blanked.
  Report without_timings() const;
  bool operator==(const Report&) const = default;
};

enum class Format { kCsv, kJson };
/// Writes <dir>/<name>.csv and/or .json; returns the written paths.
std::vector<std::filesystem::path> emit_report(const Report& report, const std::filesystem::path& dir,
                                               const std::vector<Format>& formats);

struct SseBenchConfig {
  std::vector<std::uint32_t> log_sides = {10};
  std::vector<std::uint32_t> h_max = {0};
  std::vector<std::size_t> dataset_sizes = {1000, 2000, 5000, 10000};
  std::size_t queries_per_size = 10;
  unsigned security_bits = 128;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> checkins;  // synthetic when absent
};

struct HveBenchConfig {
  std::vector<unsigned> key_bits = {128};
  std::uint32_t log_side = 10;
  std::uint32_t h_max = 0;
  std::vector<unsigned> workers = {1, 2, 4};
  std::size_t objects = 1000;
  std::size_t queries = 5;
  std::size_t repeats = 3;  // scan timing = min over repeats
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> checkins;
};

struct CostBenchConfig {
  ledger::GasSchedule gas = ledger::GasSchedule::defaults();
  std::size_t owners = 2;
  std::size_t purchases = 2;
  std::uint64_t seed = 1;
};

/// One row per (dataset size, L, h_max, range size, placement). Throws
/// Error(kIntegrity) if any query disagrees with the plaintext filter.
Report run_sse_bench(const SseBenchConfig& cfg);
/// One row per (key bits, workers).
Report run_hve_bench(const HveBenchConfig& cfg);
/// Rows "owner_setup", "tc_setup", "ta_setup", "purchase", then one row per
/// executed ledger operation.
Report run_cost_bench(const CostBenchConfig& cfg);

SseBenchConfig sse_config_from_json(const json& j);
HveBenchConfig hve_config_from_json(const json& j);
CostBenchConfig cost_config_from_json(const json& j);

/// Loads (or synthesizes) check-ins and writes the nested samples as
/// <out_dir>/D<k>.csv. Keys: input, out_dir, sizes, seed, bbox.
json run_ingest(const json& cfg);
/// Keys: dataset (path) or synthetic, log_side, h_max, count, seed, out.
json run_workload(const json& cfg);

/// Keys: log_side, h_max, seed, gas_price_gwei, ether_usd, sse_bits, hve_bits,
/// commitment_bits, tc_limit, token_fee_usd, hve_workers, store_dir.
market::MarketConfig market_config_from_json(const json& j);

/// Executes a declarative marketplace script (see README) and returns the
/// per-action results; "ok" is false if any expectation failed.
json run_scenario(const json& script);

}  // namespace geomarket::bench
