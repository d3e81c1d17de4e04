#pragma once

// Conjunctive searchable symmetric encryption (OXT-style TSet/XSet over
// ristretto255) plus the encrypted spatial range query on top of it.
//
// Search work for a conjunction (w1, w2, ...) is one cross-tag membership
// test per posting of w1, so the cost depends only on |DB(w1)|.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "geomarket/common.hpp"
#include "geomarket/crypto.hpp"
#include "geomarket/geo_encoding.hpp"

namespace geomarket::sse {

/// Object id -> keyword set.
using DocumentDatabase = std::map<ObjectId, std::vector<std::string>>;

struct Keys {
  unsigned security_bits = 128;
  Bytes k_i;  // index key; every index subkey is derived from it
  Bytes k_d;  // document key
};

struct Posting {
  std::array<std::uint8_t, 16> e{};  // masked object id
  std::array<std::uint8_t, 32> y{};  // xind * z_c^-1
};

struct BytesHash {
  std::size_t operator()(const Bytes& b) const noexcept;
};

class Client;
class EncryptedIndex;
std::pair<Client, EncryptedIndex> setup(const DocumentDatabase& ddb, unsigned security_bits, ByteView seed);

class EncryptedIndex {
 public:
  using XTag = std::array<std::uint8_t, 32>;
  struct XTagHash {
    std::size_t operator()(const XTag& t) const noexcept;
  };

  /// Empty index, ready for Client::insert.
  explicit EncryptedIndex(unsigned security_bits = 128);

  unsigned security_bits() const noexcept { return security_bits_; }
  std::size_t tag_count() const noexcept { return tset_.size(); }
  std::size_t posting_count() const noexcept;
  std::size_t xset_size() const noexcept { return xset_.size(); }
  /// Size of the serialized container.
  std::size_t size_bytes() const;

  Bytes serialize() const;
  static EncryptedIndex deserialize(ByteView bytes);

 private:
  friend class Client;
  friend struct SearchAccess;
  friend std::pair<Client, EncryptedIndex> setup(const DocumentDatabase&, unsigned, ByteView);

  unsigned security_bits_ = 128;
  std::unordered_map<Bytes, std::vector<Posting>, BytesHash> tset_;
  std::unordered_set<XTag, XTagHash> xset_;
};

struct Token {
  Bytes stag;
  Bytes posting_key;  // unmasks the ids of w1's postings
  std::vector<std::array<std::uint8_t, 32>> xtokens;  // xtokens[c] for every further keyword, flattened
  std::uint32_t conjuncts = 1;                         // query length

  Bytes serialize() const;
  static Token deserialize(ByteView bytes);
};

struct SearchResult {
  std::vector<ObjectId> ids;   // posting order
  std::uint64_t postings = 0;  // |DB(w1)|
  std::uint64_t cross_tests = 0;
};

/// Holder of the keys and the per-keyword posting counters (the curator's
/// private state). Tokens and inserts need the counters.
class Client {
 public:
  Client(Keys keys);

  const Keys& keys() const noexcept { return keys_; }
  /// Query of one or two keywords; the first keyword drives the scan.
  Token token(std::span<const std::string> query) const;
  Token token(std::initializer_list<std::string> query) const {
    return token(std::span<const std::string>(query.begin(), query.size()));
  }
  /// Append-only insertion; throws kDuplicate for a known id.
  void insert(EncryptedIndex& edb, const ObjectId& id, std::span<const std::string> keywords);
  std::uint64_t keyword_count(const std::string& w) const;
  std::size_t object_count() const noexcept { return ids_.size(); }

 private:
  friend std::pair<Client, EncryptedIndex> setup(const DocumentDatabase&, unsigned, ByteView);

  struct Derived {
    Bytes k_s, k_x, k_z, k_t, k_xind, k_perm;
  };
  void add_posting(EncryptedIndex& edb, const std::string& w, const ObjectId& id);

  Keys keys_;
  Derived sub_;
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::set<ObjectId> ids_;
};

/// Builds the index; deterministic in `seed`. Throws on an empty database or
/// a security level other than 128/256.
std::pair<Client, EncryptedIndex> setup(const DocumentDatabase& ddb, unsigned security_bits, ByteView seed);

/// Read-only; safe for concurrent callers.
SearchResult search(const EncryptedIndex& edb, const Token& tk);

struct RangeQueryResult {
  std::set<ObjectId> ids;
  std::size_t conjunctive_queries = 0;
  std::uint64_t postings = 0;  // sum of |DB(w1)| over the issued queries
  std::uint64_t cross_tests = 0;
  std::size_t token_bytes = 0;
};

/// Keyword queries for one range: one entry per conjunctive pair, with
/// whole-domain axes dropped (an unconstrained axis needs no keyword).
std::vector<std::vector<std::string>> range_queries(const geo::SpatialRange& range, const geo::DomainParams& params);

RangeQueryResult encrypted_spatial_range_query(const EncryptedIndex& edb, const Client& client,
                                               const geo::SpatialRange& range, const geo::DomainParams& params);

Bytes document_encrypt(ByteView k_d, ByteView payload, crypto::Drbg& rng);
Bytes document_decrypt(ByteView k_d, ByteView ciphertext);

}  // namespace geomarket::sse
