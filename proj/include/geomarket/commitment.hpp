#pragma once

// RSA-based vector commitment (Catalano-Fiore style) with hiding
// randomness. Commitments and opening proofs are single elements of Z_N^*,
// so their size depends only on the modulus.

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <vector>

#include "geomarket/common.hpp"
#include "geomarket/crypto.hpp"
#include "geomarket/geo_encoding.hpp"

namespace geomarket::vc {

/// Geo-tag and object id bound together; the coordinate word packs x into
/// the high 32 bits and y into the low 32 bits.
struct CommitMessage {
  std::uint64_t coord_word = 0;
  ObjectId oid;

  geo::GridLocation location() const noexcept {
    return {static_cast<std::uint32_t>(coord_word >> 32), static_cast<std::uint32_t>(coord_word)};
  }
  bool operator==(const CommitMessage&) const = default;
};

CommitMessage encode_location_message(geo::GridLocation loc, const ObjectId& oid);

class Params {
 public:
  static Params keygen(unsigned modulus_bits, std::size_t capacity, crypto::Drbg& rng);

  std::size_t capacity() const noexcept { return primes_.size(); }
  unsigned modulus_bits() const noexcept { return modulus_bits_; }
  /// Byte length of N; also the length of every commitment and proof.
  std::size_t element_bytes() const noexcept { return element_bytes_; }
  const mpz_class& modulus() const noexcept { return n_; }

  Bytes serialize() const;
  static Params deserialize(ByteView bytes);
  /// Hash of the serialized parameters, as published on the ledger.
  crypto::Digest digest() const;

 private:
  friend struct Access;
  void finish();

  unsigned modulus_bits_ = 0;
  std::size_t element_bytes_ = 0;
  mpz_class n_;
  mpz_class base_;                  // S
  std::vector<mpz_class> primes_;   // e_i
  std::vector<mpz_class> bases_;    // S_i = S^(prod_{j != i} e_j)
  mpz_class blind_base_;            // S^(prod_j e_j)
};

/// Owner-held opening state.
struct Aux {
  std::vector<CommitMessage> messages;
  mpz_class r;
};

struct Committed {
  Bytes cc;
  Aux aux;
};

/// Throws kSizeLimit if more messages than the capacity are given.
Committed commit(const Params& pp, std::span<const CommitMessage> messages, crypto::Drbg& rng);

/// Proof that `m` sits at position `i`; throws if aux disagrees.
Bytes open(const Params& pp, const Aux& aux, const CommitMessage& m, std::size_t i);

bool verify(const Params& pp, ByteView cc, const CommitMessage& m, std::size_t i, ByteView proof);

}  // namespace geomarket::vc
