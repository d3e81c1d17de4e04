#pragma once

// End-to-end marketplace: owners advertise geo-tagged objects, buyers search
// with encrypted range queries and purchase through the ledger contract.
//
// Two deployments share the same actors and ledger:
//   SSE mode: a trusted curator (TC) sees plaintext locations and maintains
//     the encrypted index; buyers get search tokens from the TC.
//   HVE mode: owners encrypt their own locations under the trusted
//     authority's (TA) public key; the TA only ever sees encoded query
//     values when issuing tokens.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geomarket/bulk_store.hpp"
#include "geomarket/commitment.hpp"
#include "geomarket/crypto.hpp"
#include "geomarket/geo_encoding.hpp"
#include "geomarket/hve.hpp"
#include "geomarket/ledger.hpp"
#include "geomarket/sse.hpp"

namespace geomarket::market {

enum class Mode { kSse, kHve };

struct MarketConfig {
  geo::DomainParams domain = geo::DomainParams(1u << 10, 0);
  ledger::GasSchedule gas = ledger::GasSchedule::defaults();
  ledger::Policy policy;
  unsigned sse_security_bits = 128;
  unsigned hve_group_bits = 128;
  unsigned commitment_modulus_bits = 1024;
  std::size_t commitment_capacity = 20;
  std::size_t tc_object_limit = 1000;
  double token_fee_usd = 0.001;  // charged per issued token
  unsigned hve_workers = 1;
  std::size_t index_chunk_size = 1u << 20;
  std::optional<std::filesystem::path> store_dir;
  std::string seed = "geomarket";
};

struct AdvertiseItem {
  geo::GridLocation advertised;
  Bytes payload;
  /// Where the data really comes from; differs from `advertised` only in
  /// fraud scenarios.
  std::optional<geo::GridLocation> actual;
};

/// What a buyer learns from a search: no coordinates, only the object id
/// and the owner's pseudonymous ledger address.
struct SearchHit {
  ObjectId oid;
  ledger::Address owner;
  bool operator==(const SearchHit&) const = default;
};

struct SearchOutcome {
  std::vector<SearchHit> hits;  // ordered by oid
  std::size_t tokens = 0;
  std::size_t token_bytes = 0;
  ledger::Wei fee_paid = 0;
  std::uint64_t cross_tests = 0;  // SSE
  std::uint64_t pairings = 0;     // HVE
};

struct PurchaseOutcome {
  std::uint64_t offer_id = 0;
  ledger::OfferState state = ledger::OfferState::kOpen;
  Bytes payload;  // decrypted object
  bool disputed = false;
  std::vector<ledger::Receipt> receipts;
};

class Marketplace {
 public:
  explicit Marketplace(MarketConfig config);

  const MarketConfig& config() const noexcept { return config_; }
  ledger::Ledger& ledger() noexcept { return *ledger_; }
  const ledger::Ledger& ledger() const noexcept { return *ledger_; }
  store::BulkStore& store() noexcept { return *store_; }

  /// Creates a funded account, registers it as an owner and publishes its
  /// commitment parameters.
  ledger::Address add_owner(const std::string& name, double funds_usd);
  ledger::Address add_buyer(const std::string& name, double funds_usd);
  ledger::Address curator_address() const { return curator_.actor.address; }
  ledger::Address authority_address() const { return authority_.actor.address; }

  /// Commits in batches of the commitment capacity; returns the new OIDs.
  std::vector<ObjectId> advertise(Mode mode, const std::string& owner, std::span<const AdvertiseItem> items);
  ObjectId sse_advertise(const std::string& owner, geo::GridLocation loc, ByteView payload);
  ObjectId hve_advertise(const std::string& owner, geo::GridLocation loc, ByteView payload);

  SearchOutcome search_sse(const std::string& buyer, const geo::SpatialRange& range);
  /// Range must be square and node-aligned; one token per query.
  SearchOutcome search_hve(const std::string& buyer, const geo::SpatialRange& range);

  /// Offer, key delivery, download and decryption, then either withdrawal
  /// after the dispute window or a dispute when the data's real location
  /// differs from the committed one.
  PurchaseOutcome purchase(const std::string& buyer, const ObjectId& oid, double price_usd);

  /// The committed geo-tag of an advertised object opens correctly against
  /// its on-ledger commitment.
  bool verify_accountability(const ObjectId& oid) const;
  /// Reclaims every deposit whose lock period has passed.
  std::size_t refund_deposits(const std::string& owner);

  std::size_t curator_objects(const std::string& owner) const;
  std::size_t flat_file_size() const;
  const hve::PublicKey& hve_public_key() const { return authority_.keys.pk; }

 private:
  struct Actor {
    std::string name;
    crypto::BoxKeyPair keys;
    ledger::Address address;
  };
  struct OwnedObject {
    Mode mode = Mode::kSse;
    geo::GridLocation advertised;
    geo::GridLocation actual;
    Bytes object_key;
    std::uint64_t commitment_id = 0;
    std::uint32_t index = 0;
    std::size_t batch = 0;  // into OwnerState::batches
  };
  struct OwnerState {
    Actor actor;
    vc::Params params;
    std::vector<vc::Aux> batches;
    std::map<ObjectId, OwnedObject> objects;
    std::vector<std::uint64_t> commitments;
  };
  struct CuratorState {
    Actor actor;
    std::unique_ptr<sse::Client> client;
    sse::EncryptedIndex edb;
    std::optional<sse::EncryptedIndex> published;  // buyer-side copy read back from the store
    Bytes iid;
    std::map<ledger::Address, std::size_t> per_owner;
    bool dirty = false;
  };
  struct AuthorityState {
    Actor actor;
    hve::KeyPair keys;
    Bytes flat_file_id;
    std::vector<hve::ObjectCipherBundle> flat_file;
    std::vector<hve::ObjectCipherBundle> published;
    bool dirty = false;
  };

  Actor make_actor(const std::string& name, double funds_usd);
  OwnerState& owner(const std::string& name);
  const Actor& buyer(const std::string& name) const;
  void charge_token_fee(const Actor& buyer, const ledger::Address& to, std::size_t tokens, SearchOutcome& out);
  /// TC side: refuse owners over their object limit.
  void curator_admit(const ledger::Address& owner, std::size_t count) const;
  void curator_ingest(const ledger::Address& owner, const ObjectId& oid, geo::GridLocation loc);
  /// TA side: issues a token for an encoded query value, never a location.
  hve::Token authority_token(const geo::HveLevelValue& query);
  void publish_index();
  void publish_flat_file();
  std::vector<SearchHit> resolve_hits(const std::vector<ObjectId>& ids) const;

  MarketConfig config_;
  crypto::Drbg rng_;
  std::unique_ptr<ledger::Ledger> ledger_;
  std::unique_ptr<store::BulkStore> store_;
  CuratorState curator_;
  AuthorityState authority_;
  std::map<std::string, OwnerState> owners_;
  std::map<std::string, Actor> buyers_;
  std::map<ObjectId, std::string> object_owner_;
  mutable std::recursive_mutex mu_;
};

}  // namespace geomarket::market
