#ifndef GEOMARKET_H
#define GEOMARKET_H

#include <stddef.h>
#include <stdint.h>

#if defined(GEOMARKET_BUILDING_LIBRARY)
#define GM_API __attribute__((visibility("default")))
#else
#define GM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gm_status {
  GM_OK = 0,
  GM_ERR_INVALID_ARGUMENT = 1,
  GM_ERR_OUT_OF_DOMAIN = 2,
  GM_ERR_SIZE_LIMIT = 3,
  GM_ERR_NOT_ALIGNED = 4,
  GM_ERR_DUPLICATE = 5,
  GM_ERR_NOT_FOUND = 6,
  GM_ERR_INTEGRITY = 7,
  GM_ERR_AUTHENTICATION = 8,
  GM_ERR_POLICY = 9,
  GM_ERR_INSUFFICIENT_FUNDS = 10,
  GM_ERR_INVALID_STATE = 11,
  GM_ERR_CRYPTO = 12,
  GM_ERR_IO = 13,
  GM_ERR_FORMAT = 14,
  GM_ERR_INTERNAL = 99
} gm_status;

typedef enum gm_mode { GM_MODE_SSE = 0, GM_MODE_HVE = 1 } gm_mode;

typedef struct gm_domain gm_domain;
typedef struct gm_market gm_market;

typedef struct gm_range {
  uint32_t x_lo, x_hi, y_lo, y_hi;
} gm_range;

/* Message of the last failing call on this thread; never NULL. */
GM_API const char* gm_last_error(void);
GM_API const char* gm_status_name(gm_status status);
GM_API const char* gm_version(void);
/* Frees strings returned through char** out-parameters. */
GM_API void gm_string_free(char* s);

/* Grid domain over the default bounding box. */
GM_API gm_status gm_domain_create(uint32_t log_side, uint32_t h_max, gm_domain** out);
GM_API void gm_domain_free(gm_domain* domain);
GM_API gm_status gm_snap(const gm_domain* domain, double lat, double lon, uint32_t* x, uint32_t* y);
/* JSON array of keyword strings. */
GM_API gm_status gm_object_keywords(const gm_domain* domain, uint32_t x, uint32_t y, char** out_json);
/* JSON array of [first, second] keyword pairs. */
GM_API gm_status gm_decompose_range(const gm_domain* domain, gm_range range, char** out_json);
GM_API gm_status gm_hve_query_value(const gm_domain* domain, gm_range range, uint32_t* level, uint64_t* value);

/* Harness commands: JSON configuration in, JSON result out. */
GM_API gm_status gm_ingest(const char* config_json, char** out_json);
GM_API gm_status gm_workload(const char* config_json, char** out_json);
/* Bench results are report objects; "output_dir" and "formats" in the
   configuration additionally write CSV / JSON files. */
GM_API gm_status gm_bench_sse(const char* config_json, char** out_json);
GM_API gm_status gm_bench_hve(const char* config_json, char** out_json);
GM_API gm_status gm_bench_cost(const char* config_json, char** out_json);
GM_API gm_status gm_scenario(const char* script_json, char** out_json);

/* Marketplace session. */
GM_API gm_status gm_market_create(const char* config_json, gm_market** out);
GM_API void gm_market_free(gm_market* market);
GM_API gm_status gm_market_add_owner(gm_market* market, const char* name, double funds_usd, char** out_address);
GM_API gm_status gm_market_add_buyer(gm_market* market, const char* name, double funds_usd, char** out_address);
GM_API gm_status gm_market_advertise(gm_market* market, gm_mode mode, const char* owner, uint32_t x, uint32_t y,
                                     const uint8_t* payload, size_t payload_len, uint8_t out_oid[16]);
/* JSON array of {"oid", "owner"}. */
GM_API gm_status gm_market_search(gm_market* market, gm_mode mode, const char* buyer, gm_range range,
                                  char** out_json);
/* JSON {"offer_id", "state", "disputed", "payload_hex"}. */
GM_API gm_status gm_market_purchase(gm_market* market, const char* buyer, const uint8_t oid[16], double price_usd,
                                    char** out_json);
GM_API gm_status gm_market_balance_wei(const gm_market* market, const char* address, int64_t* out);
GM_API int gm_market_conserved(const gm_market* market);

#ifdef __cplusplus
}
#endif

#endif
