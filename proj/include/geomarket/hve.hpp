#pragma once

// Hidden vector encryption with one attribute slot per ciphertext, over the
// composite-order group in composite_group.hpp.
//
// Group elements are written additively: "V^s" in the usual notation is
// s * V here, "g^a" is a * g.

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "geomarket/common.hpp"
#include "geomarket/composite_group.hpp"
#include "geomarket/crypto.hpp"
#include "geomarket/geo_encoding.hpp"

namespace geomarket::hve {

using pairing::CompositeGroup;
using pairing::Gt;
using pairing::Point;
using GroupPtr = std::shared_ptr<const CompositeGroup>;

struct PublicKey {
  GroupPtr group;
  /// Attributes live in Z_m with m = value_bound; m < p, q.
  std::uint64_t value_bound = 0;
  Point g_q, V, U, H, W;
  Gt A;         // e(g, v)^a
  Gt sentinel;  // public message M, hashed from the other fields
  std::uint64_t key_id = 0;

  std::size_t element_count() const noexcept { return 6; }  // g_q, V, U, H, W, A
  Bytes serialize() const;
  static PublicKey deserialize(GroupPtr group, ByteView bytes);

  struct Tables;
  std::shared_ptr<const Tables> tables;  // fixed-base precomputation
};

struct SecretKey {
  GroupPtr group;
  mpz_class a;
  Point g, v, u, h, w;
  std::uint64_t key_id = 0;
};

struct KeyPair {
  SecretKey sk;
  PublicKey pk;
};

struct Ciphertext {
  std::uint32_t level = 0;
  Gt c_prime;
  Point c0, c1, c2;
};

struct Token {
  std::optional<std::uint64_t> pattern;  // nullopt = wildcard
  std::uint32_t level = 0;
  std::uint64_t key_id = 0;
  Point k0, k1, k2;  // k1, k2 unused for a wildcard
};

/// Pairing operations performed; safe to share between threads.
struct MatchCounter {
  std::atomic<std::uint64_t> pairings{0};
  std::atomic<std::uint64_t> matches{0};
};

KeyPair setup(GroupPtr group, std::uint64_t value_bound, crypto::Drbg& rng);

Ciphertext encrypt(const PublicKey& pk, std::uint64_t attribute, std::uint32_t level, crypto::Drbg& rng);
Token make_token(const SecretKey& sk, std::optional<std::uint64_t> pattern, std::uint32_t level,
                 crypto::Drbg& rng);

/// C' * e(C1, K1) * e(C2, K2) / e(C0, K0); equals the sentinel iff the
/// pattern matches. Performs 1 + 2|J| pairings.
Gt recover(const PublicKey& pk, const Ciphertext& c, const Token& tk, MatchCounter* counter = nullptr);
bool match(const PublicKey& pk, const Ciphertext& c, const Token& tk, MatchCounter* counter = nullptr);

struct ObjectCipherBundle {
  ObjectId id;
  std::vector<Ciphertext> levels;  // ascending level, h_max..logL
};

ObjectCipherBundle encrypt_object(const PublicKey& pk, const ObjectId& id, geo::GridLocation loc,
                                  const geo::DomainParams& params, crypto::Drbg& rng);

/// Evaluates only the ciphertext at tk.level. False if the bundle has no
/// such level.
bool single_level_match(const PublicKey& pk, const ObjectCipherBundle& bundle, const Token& tk,
                        MatchCounter* counter = nullptr);
/// Tries every level of the bundle.
bool full_bundle_match(const PublicKey& pk, const ObjectCipherBundle& bundle, const Token& tk,
                       MatchCounter* counter = nullptr);

struct ScanResult {
  std::vector<ObjectId> ids;  // in file order
  std::uint64_t pairings = 0;
};

/// SingleLevel scan of a flat file with `workers` threads over static,
/// contiguous partitions.
ScanResult linear_scan(const PublicKey& pk, std::span<const ObjectCipherBundle> file, const Token& tk,
                       unsigned workers);

Bytes serialize(const CompositeGroup& group, const Ciphertext& c);
Bytes serialize(const CompositeGroup& group, const Token& tk);
Token deserialize_token(const CompositeGroup& group, ByteView bytes);

/// Length-prefixed flat file: header (magic, version, key id, count), then
/// one record per bundle.
Bytes serialize_flat_file(const PublicKey& pk, std::span<const ObjectCipherBundle> file);
std::vector<ObjectCipherBundle> parse_flat_file(const PublicKey& pk, ByteView bytes);

}  // namespace geomarket::hve
