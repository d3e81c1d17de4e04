#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

#include "geomarket/common.hpp"

namespace geomarket::crypto {

using Digest = std::array<std::uint8_t, 32>;

/// Initializes libsodium once; safe to call from any thread.
void ensure_initialized();

Digest sha256(ByteView data);
Digest sha256(std::string_view data);
Digest hmac_sha256(ByteView key, ByteView message);
Digest hmac_sha256(ByteView key, std::string_view message);

/// Seedable deterministic random bit generator (ChaCha20 keystream).
///
/// Every protocol randomness source in the library draws from a Drbg so that
/// runs are reproducible under a fixed seed while individual calls still get
/// fresh values. Not thread-safe; use fork() to hand a child stream to each
/// worker.
class Drbg {
 public:
  using result_type = std::uint64_t;

  explicit Drbg(ByteView seed);
  explicit Drbg(std::string_view seed);
  static Drbg from_u64(std::uint64_t seed);
  /// Seeds from the operating-system entropy source.
  static Drbg from_os();

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  /// Uniform in [0, bound); bound must be non-zero.
  std::uint64_t uniform(std::uint64_t bound);
  double uniform_real();  // [0, 1)
  Drbg fork(std::string_view label);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

 private:
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint8_t, 256> buffer_{};
  std::size_t used_ = 256;
};

/// Authenticated symmetric encryption (XChaCha20-Poly1305, random nonce
/// prefixed to the ciphertext).
inline constexpr std::size_t kAeadKeyBytes = 32;
Bytes aead_encrypt(ByteView key, ByteView plaintext, Drbg& rng);
/// Throws Error(kAuthentication) on tampering.
Bytes aead_decrypt(ByteView key, ByteView ciphertext);

/// X25519 key pair; the public key doubles as the ledger account identity.
struct BoxKeyPair {
  std::array<std::uint8_t, 32> public_key{};
  std::array<std::uint8_t, 32> secret_key{};
};
BoxKeyPair box_keypair(Drbg& rng);
/// Anonymous sealed box to `recipient`.
Bytes seal(ByteView message, const std::array<std::uint8_t, 32>& recipient);
Bytes unseal(ByteView sealed, const BoxKeyPair& recipient);

}  // namespace geomarket::crypto
