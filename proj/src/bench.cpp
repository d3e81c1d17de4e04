#include "geomarket/bench.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "geomarket/crypto.hpp"
#include "geomarket/hve.hpp"
#include "geomarket/marketplace.hpp"
#include "geomarket/sse.hpp"

namespace geomarket::bench {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<std::string_view> split(std::string_view line) {
  const char sep = line.find('\t') != std::string_view::npos ? '\t' : ',';
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    std::string_view f = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '"')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '"' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Box-Muller on the DRBG, so the synthetic data does not depend on the
// standard library's distribution implementations.
double gaussian(crypto::Drbg& rng) {
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = rng.uniform_real();
  const double u2 = rng.uniform_real();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::uint32_t cells_for(double metres, double extent_m, const geo::DomainParams& domain) {
  const double cell = extent_m / static_cast<double>(domain.side());
  auto n = static_cast<std::uint32_t>(std::max(1.0, std::round(metres / cell)));
  return std::min(n, domain.max_query_side());
}

std::pair<std::uint32_t, std::uint32_t> centred(std::uint32_t anchor, std::uint32_t width, std::uint32_t side) {
  std::int64_t lo = static_cast<std::int64_t>(anchor) - static_cast<std::int64_t>(width / 2);
  lo = std::clamp<std::int64_t>(lo, 0, static_cast<std::int64_t>(side - width));
  return {static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo) + width - 1};
}

Dataset base_dataset(const std::optional<fs::path>& path, std::size_t needed, std::uint64_t seed) {
  if (path) return load_checkins(*path);
  return synthetic_checkins(needed, seed);
}

std::vector<std::size_t> sorted_ids(const std::set<ObjectId>& ids) {
  std::vector<std::size_t> out;
  for (const ObjectId& id : ids) {
    std::uint64_t v = 0;
    for (int i = 8; i < 16; ++i) v = (v << 8) | id.bytes[i];
    out.push_back(static_cast<std::size_t>(v));
  }
  std::sort(out.begin(), out.end());
  return out;
}

json cell_to_json(const Cell& c) {
  return std::visit([](const auto& v) { return json(v); }, c);
}

std::string cell_to_csv(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

Dataset load_checkins(const fs::path& path, const geo::BoundingBox& bbox) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  Dataset out;
  std::string line;
  while (std::getline(in, line)) {
    auto f = split(line);
    std::optional<double> lat, lon;
    if (f.size() >= 5) {
      lat = parse_double(f[2]);
      lon = parse_double(f[3]);
    } else if (f.size() == 3) {
      lat = parse_double(f[1]);
      lon = parse_double(f[2]);
    }
    if (!lat || !lon || !bbox.contains(*lat, *lon)) continue;
    out.push_back(CheckIn{std::string(f[0]), *lat, *lon});
  }
  return out;
}

void save_checkins(const Dataset& data, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "user,lat,lon\n";
  for (const CheckIn& c : data) out << c.user << ',' << format_double(c.lat) << ',' << format_double(c.lon) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

Dataset synthetic_checkins(std::size_t count, std::uint64_t seed, const geo::BoundingBox& bbox) {
  crypto::Drbg rng = crypto::Drbg::from_u64(seed).fork("checkins");
  const double dlat = bbox.max_lat - bbox.min_lat;
  const double dlon = bbox.max_lon - bbox.min_lon;
  struct Hotspot {
    double lat, lon, sigma, weight;
  };
  std::vector<Hotspot> spots;
  double total = 0.0;
  for (int k = 0; k < 40; ++k) {
    Hotspot h{bbox.min_lat + rng.uniform_real() * dlat, bbox.min_lon + rng.uniform_real() * dlon,
              (0.005 + 0.045 * rng.uniform_real()), 1.0 / (k + 1)};
    total += h.weight;
    spots.push_back(h);
  }
  Dataset out;
  out.reserve(count);
  while (out.size() < count) {
    CheckIn c;
    c.user = std::to_string(rng.uniform(20000));
    if (rng.uniform(10) == 0) {
      c.lat = bbox.min_lat + rng.uniform_real() * dlat;
      c.lon = bbox.min_lon + rng.uniform_real() * dlon;
    } else {
      double pick = rng.uniform_real() * total;
      const Hotspot* h = &spots.back();
      for (const Hotspot& s : spots) {
        if (pick < s.weight) {
          h = &s;
          break;
        }
        pick -= s.weight;
      }
      c.lat = h->lat + gaussian(rng) * h->sigma * dlat;
      c.lon = h->lon + gaussian(rng) * h->sigma * dlon;
    }
    if (bbox.contains(c.lat, c.lon)) out.push_back(std::move(c));
  }
  return out;
}

std::vector<Dataset> nested_samples(const Dataset& data, const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw Error(ErrorCode::kInvalidArgument, "sample sizes must be ascending");
  }
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  crypto::Drbg rng = crypto::Drbg::from_u64(seed).fork("nested");
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform(i)]);
  std::vector<Dataset> out;
  for (std::size_t n : sizes) {
    Dataset d;
    n = std::min(n, data.size());
    d.reserve(n);
    for (std::size_t i = 0; i < n; ++i) d.push_back(data[order[i]]);
    out.push_back(std::move(d));
  }
  return out;
}

std::string RangeSize::label() const {
  return std::to_string(static_cast<long>(std::lround(width_m))) + "x" +
         std::to_string(static_cast<long>(std::lround(height_m)));
}

std::vector<RangeSize> default_range_sizes() { return {{400, 550}, {800, 1100}, {1600, 2200}}; }

std::pair<double, double> domain_extent_m(const geo::BoundingBox& bbox) {
  constexpr double kMetresPerDegLat = 110574.0;
  constexpr double kMetresPerDegLonEquator = 111320.0;
  const double mid = (bbox.min_lat + bbox.max_lat) / 2.0 * std::numbers::pi / 180.0;
  return {(bbox.max_lon - bbox.min_lon) * kMetresPerDegLonEquator * std::cos(mid),
          (bbox.max_lat - bbox.min_lat) * kMetresPerDegLat};
}

std::vector<geo::GridLocation> snap_all(const Dataset& data, const geo::DomainParams& domain) {
  std::vector<geo::GridLocation> out;
  out.reserve(data.size());
  for (const CheckIn& c : data) out.push_back(geo::snap_to_grid(c.lat, c.lon, domain));
  return out;
}

std::vector<std::size_t> brute_force(const std::vector<geo::GridLocation>& locs, const geo::SpatialRange& r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    if (r.contains(locs[i])) out.push_back(i);
  }
  return out;
}

QueryWorkload gen_workload(const Dataset& data, const geo::DomainParams& domain, const std::vector<RangeSize>& sizes,
                           std::size_t count, std::uint64_t seed) {
  if (data.empty()) throw Error(ErrorCode::kInvalidArgument, "workload needs a non-empty dataset");
  QueryWorkload w;
  w.sizes = sizes;
  auto [ex, ey] = domain_extent_m(domain.bbox());
  crypto::Drbg rng = crypto::Drbg::from_u64(seed).fork("workload");
  std::vector<std::uint32_t> wx, wy, side;
  for (const RangeSize& rs : sizes) {
    w.side_fraction.push_back(std::max(rs.width_m / ex, rs.height_m / ey));
    wx.push_back(cells_for(rs.width_m, ex, domain));
    wy.push_back(cells_for(rs.height_m, ey, domain));
    side.push_back(std::min(std::bit_ceil(std::max(wx.back(), wy.back())), domain.max_query_side()));
  }
  for (std::size_t k = 0; k < count; ++k) {
    const CheckIn& c = data[rng.uniform(data.size())];
    const geo::GridLocation anchor = geo::snap_to_grid(c.lat, c.lon, domain);
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      Query q;
      q.size_class = s;
      q.anchor = anchor;
      auto [xl, xh] = centred(anchor.x, wx[s], domain.side());
      auto [yl, yh] = centred(anchor.y, wy[s], domain.side());
      q.arbitrary = geo::SpatialRange{xl, xh, yl, yh};
      const std::uint32_t ax = anchor.x & ~(side[s] - 1);
      const std::uint32_t ay = anchor.y & ~(side[s] - 1);
      q.aligned = geo::SpatialRange{ax, ax + side[s] - 1, ay, ay + side[s] - 1};
      w.queries.push_back(q);
    }
  }
  return w;
}

void Report::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw Error(ErrorCode::kInvalidArgument, "report row has " + std::to_string(row.size()) + " cells, expected " +
                                                 std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

const Cell& Report::at(std::size_t row, const std::string& column) const {
  auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw Error(ErrorCode::kNotFound, "no report column " + column);
  return rows.at(row).at(static_cast<std::size_t>(it - columns.begin()));
}

json Report::to_json() const {
  json j;
  j["name"] = name;
  j["columns"] = columns;
  j["timing_columns"] = timing_columns;
  json rs = json::array();
  for (const auto& r : rows) {
    json row = json::array();
    for (const Cell& c : r) row.push_back(cell_to_json(c));
    rs.push_back(std::move(row));
  }
  j["rows"] = std::move(rs);
  return j;
}

Report Report::from_json(const json& j) {
  Report r;
  r.name = j.at("name").get<std::string>();
  r.columns = j.at("columns").get<std::vector<std::string>>();
  r.timing_columns = j.value("timing_columns", std::vector<std::string>{});
  for (const json& row : j.at("rows")) {
    std::vector<Cell> cells;
    for (const json& c : row) {
      if (c.is_number_integer()) {
        cells.emplace_back(c.get<std::int64_t>());
      } else if (c.is_number()) {
        cells.emplace_back(c.get<double>());
      } else if (c.is_string()) {
        cells.emplace_back(c.get<std::string>());
      } else {
        throw Error(ErrorCode::kFormat, "report cells must be numbers or strings");
      }
    }
    r.add_row(std::move(cells));
  }
  return r;
}

std::string Report::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << cell_to_csv(r[i]);
    out << '\n';
  }
  return out.str();
}

Report Report::without_timings() const {
  Report r = *this;
  for (const std::string& t : timing_columns) {
    auto it = std::find(columns.begin(), columns.end(), t);
    if (it == columns.end()) continue;
    const auto idx = static_cast<std::size_t>(it - columns.begin());
    for (auto& row : r.rows) row[idx] = std::string();
  }
  return r;
}

std::vector<fs::path> emit_report(const Report& report, const fs::path& dir, const std::vector<Format>& formats) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  for (Format f : formats) {
    fs::path p = dir / (report.name + (f == Format::kCsv ? ".csv" : ".json"));
    std::ofstream out(p, std::ios::trunc);
    if (f == Format::kCsv) {
      out << report.to_csv();
    } else {
      out << report.to_json().dump(2) << '\n';
    }
    if (!out) throw Error(ErrorCode::kIo, "failed writing " + p.string());
    written.push_back(p);
  }
  return written;
}

Report run_sse_bench(const SseBenchConfig& cfg) {
  Report rep;
  rep.name = "sse_bench";
  rep.columns = {"dataset_size", "log_side",  "h_max",          "range",       "placement",       "queries",
                 "build_ms",     "index_bytes", "tags",         "xset_size",   "avg_query_ms",    "avg_conjunctive_queries",
                 "avg_db_w1",    "avg_results", "avg_token_bytes", "avg_cross_tests"};
  rep.timing_columns = {"build_ms", "avg_query_ms"};
  if (cfg.dataset_sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "no dataset sizes");

  std::vector<std::size_t> sizes = cfg.dataset_sizes;
  std::sort(sizes.begin(), sizes.end());
  Dataset base = base_dataset(cfg.checkins, sizes.back(), cfg.seed);
  std::vector<Dataset> samples = nested_samples(base, sizes, cfg.seed);

  for (std::uint32_t log_side : cfg.log_sides) {
    for (std::uint32_t h : cfg.h_max) {
      if (h > log_side) continue;
      geo::DomainParams domain = geo::DomainParams::from_log(log_side, h);
      QueryWorkload wl = gen_workload(samples.back(), domain, default_range_sizes(), cfg.queries_per_size, cfg.seed);
      for (const Dataset& sample : samples) {
        if (sample.empty()) continue;
        std::vector<geo::GridLocation> locs = snap_all(sample, domain);
        sse::DocumentDatabase ddb;
        for (std::size_t i = 0; i < locs.size(); ++i) ddb[ObjectId::from_index(i)] = geo::object_keywords(locs[i], domain);
        auto t0 = Clock::now();
        auto [client, edb] = sse::setup(ddb, cfg.security_bits, ByteView(to_bytes("bench/" + std::to_string(cfg.seed))));
        const double build_ms = ms_since(t0);
        const auto index_bytes = static_cast<std::int64_t>(edb.size_bytes());

        for (std::size_t s = 0; s < wl.sizes.size(); ++s) {
          for (const char* placement : {"arbitrary", "restricted"}) {
            const bool aligned = placement[0] == 'r';
            double total_ms = 0.0;
            std::uint64_t conj = 0, postings = 0, results = 0, token_bytes = 0, cross = 0, n = 0;
            for (const Query& q : wl.queries) {
              if (q.size_class != s) continue;
              const geo::SpatialRange& r = aligned ? q.aligned : q.arbitrary;
              auto tq = Clock::now();
              sse::RangeQueryResult res = sse::encrypted_spatial_range_query(edb, client, r, domain);
              total_ms += ms_since(tq);
              if (sorted_ids(res.ids) != brute_force(locs, r)) {
                throw Error(ErrorCode::kIntegrity, "SSE range query disagrees with the plaintext filter");
              }
              if (aligned && geo::aligned_query_keywords(r, domain).first.level() == 0) {
                throw Error(ErrorCode::kIntegrity, "restricted query resolved to the root");
              }
              ++n;
              conj += res.conjunctive_queries;
              postings += res.postings;
              results += res.ids.size();
              token_bytes += res.token_bytes;
              cross += res.cross_tests;
            }
            const double dn = n ? static_cast<double>(n) : 1.0;
            rep.add_row({static_cast<std::int64_t>(sample.size()), static_cast<std::int64_t>(log_side),
                         static_cast<std::int64_t>(h), wl.sizes[s].label(), std::string(placement),
                         static_cast<std::int64_t>(n), build_ms, index_bytes,
                         static_cast<std::int64_t>(edb.tag_count()), static_cast<std::int64_t>(edb.xset_size()),
                         total_ms / dn, conj / dn, postings / dn, results / dn, token_bytes / dn, cross / dn});
          }
        }
      }
    }
  }
  return rep;
}

Report run_hve_bench(const HveBenchConfig& cfg) {
  Report rep;
  rep.name = "hve_bench";
  rep.columns = {"key_bits",  "backend",     "log_side",    "h_max",    "objects",  "queries",
                 "workers",   "setup_ms",    "encrypt_ms_per_object", "bundle_levels", "bundle_bytes", "token_ms",
                 "token_bytes", "scan_ms",   "match_us_per_object", "speedup", "pairings_per_object", "matches"};
  rep.timing_columns = {"setup_ms", "encrypt_ms_per_object", "token_ms", "scan_ms", "match_us_per_object", "speedup"};
  if (cfg.workers.empty() || cfg.repeats == 0) throw Error(ErrorCode::kInvalidArgument, "workers and repeats required");

  geo::DomainParams domain = geo::DomainParams::from_log(cfg.log_side, cfg.h_max);
  Dataset data = cfg.checkins ? nested_samples(load_checkins(*cfg.checkins), {cfg.objects}, cfg.seed).front()
                              : synthetic_checkins(cfg.objects, cfg.seed);
  std::vector<geo::GridLocation> locs = snap_all(data, domain);
  QueryWorkload wl = gen_workload(data, domain, default_range_sizes(), std::max<std::size_t>(1, cfg.queries / 3 + 1),
                                  cfg.seed);

  for (unsigned bits : cfg.key_bits) {
    crypto::Drbg rng = crypto::Drbg::from_u64(cfg.seed).fork("hve-bench/" + std::to_string(bits));
    auto t0 = Clock::now();
    auto group = pairing::CompositeGroup::generate(bits, rng);
    hve::KeyPair keys = hve::setup(group, domain.hve_value_bound(), rng);
    const double setup_ms = ms_since(t0);

    std::vector<hve::ObjectCipherBundle> file;
    file.reserve(locs.size());
    t0 = Clock::now();
    for (std::size_t i = 0; i < locs.size(); ++i) {
      file.push_back(hve::encrypt_object(keys.pk, ObjectId::from_index(i), locs[i], domain, rng));
    }
    const double enc_ms = ms_since(t0) / static_cast<double>(std::max<std::size_t>(1, locs.size()));
    std::int64_t bundle_bytes = 0;
    if (!file.empty()) {
      for (const auto& c : file.front().levels) bundle_bytes += static_cast<std::int64_t>(hve::serialize(*group, c).size());
    }

    std::vector<hve::Token> tokens;
    std::vector<std::vector<std::size_t>> expected;
    std::int64_t token_bytes = 0;
    t0 = Clock::now();
    for (std::size_t k = 0; k < cfg.queries && k < wl.queries.size(); ++k) {
      const Query& q = wl.queries[k];
      geo::HveLevelValue v = geo::hve_query_value(q.aligned, domain);
      tokens.push_back(hve::make_token(keys.sk, v.value, v.level, rng));
      expected.push_back(brute_force(locs, q.aligned));
    }
    const double token_ms = ms_since(t0) / static_cast<double>(std::max<std::size_t>(1, tokens.size()));
    for (const auto& tk : tokens) token_bytes = static_cast<std::int64_t>(hve::serialize(*group, tk).size());

    double base_ms = 0.0;
    for (unsigned w : cfg.workers) {
      double best = 0.0;
      std::uint64_t pairings = 0, matches = 0;
      for (std::size_t rep_i = 0; rep_i < cfg.repeats; ++rep_i) {
        pairings = 0;
        matches = 0;
        auto ts = Clock::now();
        std::vector<hve::ScanResult> results;
        for (const auto& tk : tokens) results.push_back(hve::linear_scan(keys.pk, file, tk, w));
        const double ms = ms_since(ts);
        for (std::size_t k = 0; k < results.size(); ++k) {
          std::vector<std::size_t> got;
          for (const ObjectId& id : results[k].ids) got.push_back(sorted_ids({id}).front());
          std::sort(got.begin(), got.end());
          if (got != expected[k]) throw Error(ErrorCode::kIntegrity, "HVE scan disagrees with the plaintext filter");
          pairings += results[k].pairings;
          matches += results[k].ids.size();
        }
        best = rep_i == 0 ? ms : std::min(best, ms);
      }
      if (w == cfg.workers.front()) base_ms = best;
      const double scans = static_cast<double>(std::max<std::size_t>(1, tokens.size() * file.size()));
      rep.add_row({static_cast<std::int64_t>(bits), group->backend_name(), static_cast<std::int64_t>(cfg.log_side),
                   static_cast<std::int64_t>(cfg.h_max), static_cast<std::int64_t>(file.size()),
                   static_cast<std::int64_t>(tokens.size()), static_cast<std::int64_t>(w), setup_ms, enc_ms,
                   static_cast<std::int64_t>(file.empty() ? 0 : file.front().levels.size()), bundle_bytes, token_ms,
                   token_bytes, best, best * 1000.0 / scans, best > 0 ? base_ms / best : 0.0,
                   static_cast<double>(pairings) / scans, static_cast<std::int64_t>(matches)});
    }
  }
  return rep;
}

Report run_cost_bench(const CostBenchConfig& cfg) {
  Report rep;
  rep.name = "cost_bench";
  rep.columns = {"row", "operations", "count", "gas", "usd"};

  market::MarketConfig mc;
  mc.domain = geo::DomainParams::from_log(6, 0);
  mc.gas = cfg.gas;
  mc.seed = "cost/" + std::to_string(cfg.seed);
  market::Marketplace mp(mc);
  std::vector<std::string> owners;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, cfg.owners); ++i) {
    owners.push_back("owner" + std::to_string(i));
    mp.add_owner(owners.back(), 50.0);
  }
  mp.add_buyer("buyer", 50.0 + 10.0 * static_cast<double>(cfg.purchases));
  crypto::Drbg rng = crypto::Drbg::from_u64(cfg.seed).fork("cost");
  for (std::size_t k = 0; k < cfg.purchases; ++k) {
    geo::GridLocation loc{static_cast<std::uint32_t>(rng.uniform(64)), static_cast<std::uint32_t>(rng.uniform(64))};
    ObjectId oid = mp.sse_advertise(owners[k % owners.size()], loc, ByteView(to_bytes("object " + std::to_string(k))));
    mp.purchase("buyer", oid, 5.0);
  }

  const auto log = mp.ledger().log();
  const ledger::GasSchedule& gs = mp.ledger().schedule();
  auto seq_row = [&](const std::string& name, std::initializer_list<ledger::Op> ops) {
    std::string label;
    std::uint64_t gas = 0;
    for (ledger::Op op : ops) {
      label += (label.empty() ? "" : "+") + std::string(ledger::op_name(op));
      auto it = std::find_if(log.begin(), log.end(), [&](const ledger::LogEntry& e) {
        return e.op == op && e.status == ledger::Status::kSuccess;
      });
      if (it == log.end()) throw Error(ErrorCode::kInvalidState, "cost scenario never executed " + label);
      gas += it->gas;
    }
    rep.add_row({name, label, std::int64_t{1}, static_cast<std::int64_t>(gas), gs.usd(gas)});
  };
  using ledger::Op;
  seq_row("owner_setup", {Op::kRegisterOwner, Op::kSetCommitmentParams});
  seq_row("tc_setup", {Op::kPublishIndexInfo});
  seq_row("ta_setup", {Op::kPublishIndexInfo});
  seq_row("purchase", {Op::kSubmitCommitment, Op::kMakeOffer, Op::kWithdrawPayment});
  seq_row("purchase_with_delivery", {Op::kSubmitCommitment, Op::kMakeOffer, Op::kDeliverKey, Op::kWithdrawPayment});

  std::map<Op, std::pair<std::int64_t, std::uint64_t>> per_op;
  for (const auto& e : log) {
    if (e.status == ledger::Status::kRejected) continue;
    per_op[e.op].first += 1;
    per_op[e.op].second += e.gas;
  }
  for (const auto& [op, v] : per_op) {
    rep.add_row({std::string("op"), std::string(ledger::op_name(op)), v.first, static_cast<std::int64_t>(v.second),
                 gs.usd(v.second)});
  }
  return rep;
}

SseBenchConfig sse_config_from_json(const json& j) {
  SseBenchConfig c;
  c.log_sides = j.value("log_sides", c.log_sides);
  c.h_max = j.value("h_max", c.h_max);
  c.dataset_sizes = j.value("dataset_sizes", c.dataset_sizes);
  c.queries_per_size = j.value("queries_per_size", c.queries_per_size);
  c.security_bits = j.value("security_bits", c.security_bits);
  c.seed = j.value("seed", c.seed);
  if (j.contains("checkins") && !j["checkins"].is_null()) c.checkins = j["checkins"].get<std::string>();
  return c;
}

HveBenchConfig hve_config_from_json(const json& j) {
  HveBenchConfig c;
  c.key_bits = j.value("key_bits", c.key_bits);
  c.log_side = j.value("log_side", c.log_side);
  c.h_max = j.value("h_max", c.h_max);
  c.workers = j.value("workers", c.workers);
  c.objects = j.value("objects", c.objects);
  c.queries = j.value("queries", c.queries);
  c.repeats = j.value("repeats", c.repeats);
  c.seed = j.value("seed", c.seed);
  if (j.contains("checkins") && !j["checkins"].is_null()) c.checkins = j["checkins"].get<std::string>();
  return c;
}

namespace {

ledger::GasSchedule gas_from_json(const json& j) {
  ledger::GasSchedule g = ledger::GasSchedule::defaults();
  if (j.contains("gas_price_gwei")) {
    g.gas_price_wei = static_cast<ledger::Wei>(std::llround(j["gas_price_gwei"].get<double>() * 1e9));
  }
  g.ether_usd = j.value("ether_usd", g.ether_usd);
  return g;
}

geo::BoundingBox bbox_from_json(const json& j) {
  geo::BoundingBox b = geo::los_angeles_bbox();
  if (!j.contains("bbox")) return b;
  const json& x = j["bbox"];
  b.min_lat = x.value("min_lat", b.min_lat);
  b.max_lat = x.value("max_lat", b.max_lat);
  b.min_lon = x.value("min_lon", b.min_lon);
  b.max_lon = x.value("max_lon", b.max_lon);
  return b;
}

}  // namespace

CostBenchConfig cost_config_from_json(const json& j) {
  CostBenchConfig c;
  c.gas = gas_from_json(j);
  c.owners = j.value("owners", c.owners);
  c.purchases = j.value("purchases", c.purchases);
  c.seed = j.value("seed", c.seed);
  return c;
}

json run_ingest(const json& cfg) {
  const geo::BoundingBox bbox = bbox_from_json(cfg);
  const auto seed = cfg.value("seed", std::uint64_t{1});
  std::vector<std::size_t> sizes = cfg.value("sizes", std::vector<std::size_t>{1000, 2000, 5000, 10000});
  std::sort(sizes.begin(), sizes.end());
  Dataset data;
  if (cfg.contains("input") && !cfg["input"].is_null()) {
    data = load_checkins(cfg["input"].get<std::string>(), bbox);
  } else {
    data = synthetic_checkins(sizes.empty() ? 0 : sizes.back(), seed, bbox);
  }
  json out;
  out["checkins"] = data.size();
  out["samples"] = json::array();
  std::vector<Dataset> samples = nested_samples(data, sizes, seed);
  const fs::path dir = cfg.value("out_dir", std::string("datasets"));
  if (!samples.empty()) fs::create_directories(dir);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t label = sizes.front() ? sizes[i] / sizes.front() : i + 1;
    fs::path p = dir / ("D" + std::to_string(label) + ".csv");
    save_checkins(samples[i], p);
    out["samples"].push_back({{"name", "D" + std::to_string(label)}, {"size", samples[i].size()}, {"path", p.string()}});
  }
  return out;
}

json run_workload(const json& cfg) {
  const auto seed = cfg.value("seed", std::uint64_t{1});
  geo::DomainParams domain = geo::DomainParams::from_log(cfg.value("log_side", 10u), cfg.value("h_max", 0u),
                                                         bbox_from_json(cfg));
  Dataset data = cfg.contains("dataset") && !cfg["dataset"].is_null()
                     ? load_checkins(cfg["dataset"].get<std::string>(), domain.bbox())
                     : synthetic_checkins(cfg.value("synthetic", std::size_t{1000}), seed, domain.bbox());
  QueryWorkload w = gen_workload(data, domain, default_range_sizes(), cfg.value("count", std::size_t{10}), seed);
  json out;
  out["log_side"] = domain.log_side();
  out["h_max"] = domain.h_max();
  out["sizes"] = json::array();
  for (std::size_t s = 0; s < w.sizes.size(); ++s) {
    out["sizes"].push_back({{"label", w.sizes[s].label()}, {"side_fraction", w.side_fraction[s]}});
  }
  auto range_json = [](const geo::SpatialRange& r) {
    return json{{"x_lo", r.x_lo}, {"x_hi", r.x_hi}, {"y_lo", r.y_lo}, {"y_hi", r.y_hi}};
  };
  out["queries"] = json::array();
  for (const Query& q : w.queries) {
    out["queries"].push_back({{"size", w.sizes[q.size_class].label()},
                              {"anchor", {q.anchor.x, q.anchor.y}},
                              {"arbitrary", range_json(q.arbitrary)},
                              {"aligned", range_json(q.aligned)}});
  }
  if (cfg.contains("out") && !cfg["out"].is_null()) {
    std::ofstream f(cfg["out"].get<std::string>(), std::ios::trunc);
    f << out.dump(2) << '\n';
    if (!f) throw Error(ErrorCode::kIo, "failed writing workload file");
  }
  return out;
}

namespace {

geo::SpatialRange range_from_json(const json& r) {
  return geo::SpatialRange{r.at("x_lo").get<std::uint32_t>(), r.at("x_hi").get<std::uint32_t>(),
                           r.at("y_lo").get<std::uint32_t>(), r.at("y_hi").get<std::uint32_t>()};
}

geo::GridLocation loc_from_json(const json& j) {
  return geo::GridLocation{j.at("x").get<std::uint32_t>(), j.at("y").get<std::uint32_t>()};
}

market::Mode mode_from_json(const json& a) {
  const std::string m = a.value("mode", std::string("sse"));
  if (m == "sse") return market::Mode::kSse;
  if (m == "hve") return market::Mode::kHve;
  throw Error(ErrorCode::kInvalidArgument, "mode must be sse or hve, got " + m);
}

}  // namespace

market::MarketConfig market_config_from_json(const json& c) {
  market::MarketConfig mc;
  mc.domain = geo::DomainParams::from_log(c.value("log_side", 6u), c.value("h_max", 0u));
  mc.gas = gas_from_json(c);
  mc.sse_security_bits = c.value("sse_bits", mc.sse_security_bits);
  mc.hve_group_bits = c.value("hve_bits", mc.hve_group_bits);
  mc.commitment_modulus_bits = c.value("commitment_bits", mc.commitment_modulus_bits);
  mc.tc_object_limit = c.value("tc_limit", mc.tc_object_limit);
  mc.token_fee_usd = c.value("token_fee_usd", mc.token_fee_usd);
  mc.hve_workers = c.value("hve_workers", mc.hve_workers);
  mc.policy.max_commitments_per_day = c.value("max_commitments_per_day", mc.policy.max_commitments_per_day);
  mc.policy.min_deposit_usd = c.value("min_deposit_usd", mc.policy.min_deposit_usd);
  if (c.contains("store_dir") && !c["store_dir"].is_null()) mc.store_dir = c["store_dir"].get<std::string>();
  mc.seed = c.value("seed", mc.seed);
  return mc;
}

json run_scenario(const json& script) {
  market::Marketplace mp(market_config_from_json(script.value("config", json::object())));
  std::map<std::string, ObjectId> labels;
  std::map<ObjectId, std::string> names;
  json results = json::array();
  bool all_ok = true;

  for (const json& a : script.at("actions")) {
    const std::string what = a.at("do").get<std::string>();
    json r{{"do", what}};
    bool ok = true;
    auto expect = [&](const char* key, const json& actual) {
      if (a.contains(key) && a[key] != actual) {
        ok = false;
        r["failed"].push_back(std::string(key));
      }
    };
    try {
      if (what == "add_owner") {
        r["address"] = mp.add_owner(a.at("name"), a.value("funds_usd", 10.0));
      } else if (what == "add_buyer") {
        r["address"] = mp.add_buyer(a.at("name"), a.value("funds_usd", 10.0));
      } else if (what == "advertise") {
        std::vector<market::AdvertiseItem> items;
        std::vector<std::string> item_labels;
        for (const json& it : a.at("items")) {
          market::AdvertiseItem item;
          item.advertised = loc_from_json(it);
          item.payload = to_bytes(it.value("payload", std::string()));
          if (it.contains("actual")) item.actual = loc_from_json(it["actual"]);
          items.push_back(std::move(item));
          item_labels.push_back(it.value("label", std::string()));
        }
        std::vector<ObjectId> oids = mp.advertise(mode_from_json(a), a.at("owner"), items);
        r["oids"] = json::array();
        for (std::size_t i = 0; i < oids.size(); ++i) {
          r["oids"].push_back(oids[i].hex());
          if (!item_labels[i].empty()) {
            labels[item_labels[i]] = oids[i];
            names[oids[i]] = item_labels[i];
          }
        }
      } else if (what == "search") {
        const market::Mode mode = mode_from_json(a);
        geo::SpatialRange range = range_from_json(a.at("range"));
        market::SearchOutcome s = mode == market::Mode::kSse ? mp.search_sse(a.at("buyer"), range)
                                                             : mp.search_hve(a.at("buyer"), range);
        json hits = json::array();
        std::vector<std::string> found;
        for (const auto& h : s.hits) {
          hits.push_back({{"oid", h.oid.hex()}, {"owner", h.owner}});
          if (auto it = names.find(h.oid); it != names.end()) found.push_back(it->second);
        }
        std::sort(found.begin(), found.end());
        r["hits"] = hits;
        r["labels"] = found;
        r["tokens"] = s.tokens;
        r["token_bytes"] = s.token_bytes;
        r["fee_paid_wei"] = s.fee_paid;
        expect("expect_count", json(s.hits.size()));
        if (a.contains("expect_labels")) {
          auto want = a["expect_labels"].get<std::vector<std::string>>();
          std::sort(want.begin(), want.end());
          if (want != found) {
            ok = false;
            r["failed"].push_back("expect_labels");
          }
        }
      } else if (what == "purchase") {
        const std::string obj = a.at("object");
        auto it = labels.find(obj);
        ObjectId oid = it != labels.end() ? it->second : ObjectId::from_hex(obj);
        market::PurchaseOutcome p = mp.purchase(a.at("buyer"), oid, a.value("price_usd", 5.0));
        r["offer_id"] = p.offer_id;
        r["state"] = std::string(ledger::offer_state_name(p.state));
        r["disputed"] = p.disputed;
        r["payload"] = std::string(p.payload.begin(), p.payload.end());
        std::uint64_t gas = 0;
        for (const auto& rc : p.receipts) gas += rc.gas_used;
        r["gas"] = gas;
        expect("expect_state", r["state"]);
        expect("expect_payload", r["payload"]);
      } else if (what == "advance_blocks") {
        mp.ledger().advance_blocks(a.at("n").get<std::uint64_t>());
        r["block"] = mp.ledger().block();
      } else if (what == "refund") {
        r["refunded"] = mp.refund_deposits(a.at("owner"));
        expect("expect_count", r["refunded"]);
      } else if (what == "verify") {
        auto it = labels.find(a.at("object").get<std::string>());
        if (it == labels.end()) throw Error(ErrorCode::kNotFound, "unknown object label");
        r["accountable"] = mp.verify_accountability(it->second);
        expect("expect", r["accountable"]);
      } else if (what == "check_conservation") {
        r["conserved"] = mp.ledger().conserved();
        if (!mp.ledger().conserved()) ok = false;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown action " + what);
      }
      if (a.contains("expect_error")) {
        ok = false;
        r["failed"].push_back("expect_error");
      }
    } catch (const Error& e) {
      r["error"] = std::string(error_code_name(e.code()));
      r["message"] = e.what();
      ok = a.contains("expect_error") && a["expect_error"] == r["error"];
    }
    r["ok"] = ok;
    all_ok = all_ok && ok;
    results.push_back(std::move(r));
  }

  const ledger::Ledger& l = mp.ledger();
  json out;
  out["ok"] = all_ok;
  out["results"] = std::move(results);
  out["ledger"] = {{"block", l.block()},         {"supply_wei", l.total_supply()}, {"fees_wei", l.fees_collected()},
                   {"escrow_wei", l.total_escrow()}, {"deposits_wei", l.total_deposits()},
                   {"forfeited_wei", l.forfeited()}, {"conserved", l.conserved()}};
  return out;
}

}  // namespace geomarket::bench
