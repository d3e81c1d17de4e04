#include "geomarket/geomarket.h"

#include <cstring>
#include <memory>
#include <string>

#include "geomarket/bench.hpp"
#include "geomarket/geo_encoding.hpp"
#include "geomarket/marketplace.hpp"

using geomarket::Error;
using geomarket::bench::json;

struct gm_domain {
  geomarket::geo::DomainParams params;
};

struct gm_market {
  std::unique_ptr<geomarket::market::Marketplace> impl;
};

namespace {

thread_local std::string g_last_error;

gm_status fail(gm_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs `fn`, mapping exceptions to status codes.
template <typename Fn>
gm_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return GM_OK;
  } catch (const Error& e) {
    return fail(static_cast<gm_status>(static_cast<int>(e.code())), e.what());
  } catch (const json::exception& e) {
    return fail(GM_ERR_INVALID_ARGUMENT, std::string("bad JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(GM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GM_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require_out(const void* p, const char* what) {
  if (!p) throw Error(geomarket::ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

json parse_config(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw Error(geomarket::ErrorCode::kInvalidArgument, "configuration must be a JSON object");
  return j;
}

geomarket::geo::SpatialRange to_range(gm_range r) { return {r.x_lo, r.x_hi, r.y_lo, r.y_hi}; }

geomarket::market::Mode to_mode(gm_mode m) {
  if (m == GM_MODE_SSE) return geomarket::market::Mode::kSse;
  if (m == GM_MODE_HVE) return geomarket::market::Mode::kHve;
  throw Error(geomarket::ErrorCode::kInvalidArgument, "unknown mode");
}

// Returns the report as JSON and writes the requested files.
json finish_report(const geomarket::bench::Report& report, const json& cfg) {
  namespace b = geomarket::bench;
  json out = report.to_json();
  if (cfg.contains("output_dir") && !cfg["output_dir"].is_null()) {
    std::vector<b::Format> formats;
    for (const auto& f : cfg.value("formats", std::vector<std::string>{"csv", "json"})) {
      if (f == "csv") {
        formats.push_back(b::Format::kCsv);
      } else if (f == "json") {
        formats.push_back(b::Format::kJson);
      } else {
        throw Error(geomarket::ErrorCode::kInvalidArgument, "unknown report format " + f);
      }
    }
    out["files"] = json::array();
    for (const auto& p : b::emit_report(report, cfg["output_dir"].get<std::string>(), formats)) {
      out["files"].push_back(p.string());
    }
  }
  return out;
}

template <typename Fn>
gm_status json_command(const char* config_json, char** out_json, Fn&& fn) {
  return guarded([&] {
    require_out(out_json, "out_json");
    *out_json = nullptr;
    json cfg = parse_config(config_json);
    *out_json = dup_string(fn(cfg).dump());
  });
}

}  // namespace

extern "C" {

const char* gm_last_error(void) { return g_last_error.c_str(); }

const char* gm_status_name(gm_status status) {
  if (status == GM_OK) return "ok";
  if (status == GM_ERR_INTERNAL) return "internal";
  if (status >= GM_ERR_INVALID_ARGUMENT && status <= GM_ERR_FORMAT) {
    return geomarket::error_code_name(static_cast<geomarket::ErrorCode>(status)).data();
  }
  return "unknown";
}

const char* gm_version(void) { return "1.0.0"; }

void gm_string_free(char* s) { std::free(s); }

gm_status gm_domain_create(uint32_t log_side, uint32_t h_max, gm_domain** out) {
  return guarded([&] {
    require_out(out, "out");
    *out = nullptr;
    if (log_side < 1 || log_side > 30) throw Error(geomarket::ErrorCode::kInvalidArgument, "log_side must lie in [1, 30]");
    *out = new gm_domain{geomarket::geo::DomainParams::from_log(log_side, h_max)};
  });
}

void gm_domain_free(gm_domain* domain) { delete domain; }

gm_status gm_snap(const gm_domain* domain, double lat, double lon, uint32_t* x, uint32_t* y) {
  return guarded([&] {
    require_out(domain, "domain");
    require_out(x, "x");
    require_out(y, "y");
    auto loc = geomarket::geo::snap_to_grid(lat, lon, domain->params);
    *x = loc.x;
    *y = loc.y;
  });
}

gm_status gm_object_keywords(const gm_domain* domain, uint32_t x, uint32_t y, char** out_json) {
  return guarded([&] {
    require_out(domain, "domain");
    require_out(out_json, "out_json");
    *out_json = dup_string(json(geomarket::geo::object_keywords({x, y}, domain->params)).dump());
  });
}

gm_status gm_decompose_range(const gm_domain* domain, gm_range range, char** out_json) {
  return guarded([&] {
    require_out(domain, "domain");
    require_out(out_json, "out_json");
    json pairs = json::array();
    for (const auto& t : geomarket::geo::decompose_range_query(to_range(range), domain->params)) {
      auto [a, b] = t.keywords();
      pairs.push_back({a, b});
    }
    *out_json = dup_string(pairs.dump());
  });
}

gm_status gm_hve_query_value(const gm_domain* domain, gm_range range, uint32_t* level, uint64_t* value) {
  return guarded([&] {
    require_out(domain, "domain");
    require_out(level, "level");
    require_out(value, "value");
    auto v = geomarket::geo::hve_query_value(to_range(range), domain->params);
    *level = v.level;
    *value = v.value;
  });
}

gm_status gm_ingest(const char* config_json, char** out_json) {
  return json_command(config_json, out_json, [](const json& c) { return geomarket::bench::run_ingest(c); });
}

gm_status gm_workload(const char* config_json, char** out_json) {
  return json_command(config_json, out_json, [](const json& c) { return geomarket::bench::run_workload(c); });
}

gm_status gm_bench_sse(const char* config_json, char** out_json) {
  return json_command(config_json, out_json, [](const json& c) {
    namespace b = geomarket::bench;
    return finish_report(b::run_sse_bench(b::sse_config_from_json(c)), c);
  });
}

gm_status gm_bench_hve(const char* config_json, char** out_json) {
  return json_command(config_json, out_json, [](const json& c) {
    namespace b = geomarket::bench;
    return finish_report(b::run_hve_bench(b::hve_config_from_json(c)), c);
  });
}

gm_status gm_bench_cost(const char* config_json, char** out_json) {
  return json_command(config_json, out_json, [](const json& c) {
    namespace b = geomarket::bench;
    return finish_report(b::run_cost_bench(b::cost_config_from_json(c)), c);
  });
}

gm_status gm_scenario(const char* script_json, char** out_json) {
  return json_command(script_json, out_json, [](const json& c) { return geomarket::bench::run_scenario(c); });
}

gm_status gm_market_create(const char* config_json, gm_market** out) {
  return guarded([&] {
    require_out(out, "out");
    *out = nullptr;
    auto cfg = geomarket::bench::market_config_from_json(parse_config(config_json));
    auto m = std::make_unique<gm_market>();
    m->impl = std::make_unique<geomarket::market::Marketplace>(std::move(cfg));
    *out = m.release();
  });
}

void gm_market_free(gm_market* market) { delete market; }

gm_status gm_market_add_owner(gm_market* market, const char* name, double funds_usd, char** out_address) {
  return guarded([&] {
    require_out(market, "market");
    require_out(name, "name");
    std::string addr = market->impl->add_owner(name, funds_usd);
    if (out_address) *out_address = dup_string(addr);
  });
}

gm_status gm_market_add_buyer(gm_market* market, const char* name, double funds_usd, char** out_address) {
  return guarded([&] {
    require_out(market, "market");
    require_out(name, "name");
    std::string addr = market->impl->add_buyer(name, funds_usd);
    if (out_address) *out_address = dup_string(addr);
  });
}

gm_status gm_market_advertise(gm_market* market, gm_mode mode, const char* owner, uint32_t x, uint32_t y,
                              const uint8_t* payload, size_t payload_len, uint8_t out_oid[16]) {
  return guarded([&] {
    require_out(market, "market");
    require_out(owner, "owner");
    require_out(out_oid, "out_oid");
    if (payload_len && !payload) throw Error(geomarket::ErrorCode::kInvalidArgument, "payload must not be NULL");
    geomarket::market::AdvertiseItem item;
    item.advertised = {x, y};
    if (payload_len) item.payload.assign(payload, payload + payload_len);
    auto oids = market->impl->advertise(to_mode(mode), owner, std::span<const geomarket::market::AdvertiseItem>(&item, 1));
    std::memcpy(out_oid, oids.front().bytes.data(), 16);
  });
}

gm_status gm_market_search(gm_market* market, gm_mode mode, const char* buyer, gm_range range, char** out_json) {
  return guarded([&] {
    require_out(market, "market");
    require_out(buyer, "buyer");
    require_out(out_json, "out_json");
    auto& m = *market->impl;
    auto outcome = to_mode(mode) == geomarket::market::Mode::kSse ? m.search_sse(buyer, to_range(range))
                                                                  : m.search_hve(buyer, to_range(range));
    json hits = json::array();
    for (const auto& h : outcome.hits) hits.push_back({{"oid", h.oid.hex()}, {"owner", h.owner}});
    *out_json = dup_string(hits.dump());
  });
}

gm_status gm_market_purchase(gm_market* market, const char* buyer, const uint8_t oid[16], double price_usd,
                             char** out_json) {
  return guarded([&] {
    require_out(market, "market");
    require_out(buyer, "buyer");
    require_out(oid, "oid");
    geomarket::ObjectId id;
    std::memcpy(id.bytes.data(), oid, 16);
    auto p = market->impl->purchase(buyer, id, price_usd);
    json out{{"offer_id", p.offer_id},
             {"state", std::string(geomarket::ledger::offer_state_name(p.state))},
             {"disputed", p.disputed},
             {"payload_hex", geomarket::to_hex(geomarket::ByteView(p.payload))}};
    if (out_json) *out_json = dup_string(out.dump());
  });
}

gm_status gm_market_balance_wei(const gm_market* market, const char* address, int64_t* out) {
  return guarded([&] {
    require_out(market, "market");
    require_out(address, "address");
    require_out(out, "out");
    *out = market->impl->ledger().balance(address);
  });
}

int gm_market_conserved(const gm_market* market) { return market && market->impl->ledger().conserved() ? 1 : 0; }

}  // extern "C"
