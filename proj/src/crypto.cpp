#include "geomarket/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>

namespace geomarket::crypto {

void ensure_initialized() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw Error(ErrorCode::kCrypto, "libsodium initialization failed");
  });
}

Digest sha256(ByteView data) {
  Digest out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

Digest sha256(std::string_view data) {
  return sha256(ByteView(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

Digest hmac_sha256(ByteView key, ByteView message) {
  Digest out;
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, key.data(), key.size());
  crypto_auth_hmacsha256_update(&st, message.data(), message.size());
  crypto_auth_hmacsha256_final(&st, out.data());
  return out;
}

Digest hmac_sha256(ByteView key, std::string_view message) {
  return hmac_sha256(key, ByteView(reinterpret_cast<const std::uint8_t*>(message.data()), message.size()));
}

Drbg::Drbg(ByteView seed) {
  ensure_initialized();
  Digest d = sha256(seed);
  std::memcpy(key_.data(), d.data(), key_.size());
}

Drbg::Drbg(std::string_view seed)
    : Drbg(ByteView(reinterpret_cast<const std::uint8_t*>(seed.data()), seed.size())) {}

Drbg Drbg::from_u64(std::uint64_t seed) {
  Bytes b;
  put_u64(b, seed);
  return Drbg(ByteView(b));
}

Drbg Drbg::from_os() {
  ensure_initialized();
  std::array<std::uint8_t, 32> seed;
  randombytes_buf(seed.data(), seed.size());
  return Drbg(ByteView(seed));
}

void Drbg::refill() {
  std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
  std::uint32_t high = static_cast<std::uint32_t>(block_ >> 32);
  std::memcpy(nonce.data(), &high, sizeof(high));
  std::uint32_t counter = static_cast<std::uint32_t>(block_ & 0xffffffffu);
  buffer_.fill(0);
  crypto_stream_chacha20_ietf_xor_ic(buffer_.data(), buffer_.data(), buffer_.size(), nonce.data(), counter,
                                     key_.data());
  block_ += buffer_.size() / 64;
  used_ = 0;
}

void Drbg::fill(std::span<std::uint8_t> out) {
  std::size_t off = 0;
  while (off < out.size()) {
    if (used_ == buffer_.size()) refill();
    std::size_t n = std::min(out.size() - off, buffer_.size() - used_);
    std::memcpy(out.data() + off, buffer_.data() + used_, n);
    used_ += n;
    off += n;
  }
}

Bytes Drbg::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t Drbg::next_u64() {
  std::uint64_t v;
  fill(std::span<std::uint8_t>(reinterpret_cast<std::uint8_t*>(&v), sizeof(v)));
  return v;
}

std::uint64_t Drbg::uniform(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "uniform bound must be positive");
  std::uint64_t limit = max() - max() % bound;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

double Drbg::uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

Drbg Drbg::fork(std::string_view label) {
  Bytes seed = bytes(32);
  seed.insert(seed.end(), label.begin(), label.end());
  return Drbg(ByteView(seed));
}

Bytes aead_encrypt(ByteView key, ByteView plaintext, Drbg& rng) {
  if (key.size() != kAeadKeyBytes) throw Error(ErrorCode::kInvalidArgument, "AEAD key must be 32 bytes");
  Bytes out(crypto_aead_xchacha20poly1305_ietf_NPUBBYTES + plaintext.size() +
            crypto_aead_xchacha20poly1305_ietf_ABYTES);
  rng.fill(std::span<std::uint8_t>(out.data(), crypto_aead_xchacha20poly1305_ietf_NPUBBYTES));
  unsigned long long clen = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + crypto_aead_xchacha20poly1305_ietf_NPUBBYTES, &clen,
                                             plaintext.data(), plaintext.size(), nullptr, 0, nullptr,
                                             out.data(), key.data());
  out.resize(crypto_aead_xchacha20poly1305_ietf_NPUBBYTES + clen);
  return out;
}

Bytes aead_decrypt(ByteView key, ByteView ciphertext) {
  if (key.size() != kAeadKeyBytes) throw Error(ErrorCode::kInvalidArgument, "AEAD key must be 32 bytes");
  constexpr std::size_t overhead =
      crypto_aead_xchacha20poly1305_ietf_NPUBBYTES + crypto_aead_xchacha20poly1305_ietf_ABYTES;
  if (ciphertext.size() < overhead) throw Error(ErrorCode::kAuthentication, "ciphertext too short");
  Bytes out(ciphertext.size() - overhead);
  unsigned long long mlen = 0;
  const std::uint8_t* body = ciphertext.data() + crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
  std::size_t body_len = ciphertext.size() - crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(out.data(), &mlen, nullptr, body, body_len, nullptr, 0,
                                                 ciphertext.data(), key.data()) != 0) {
    throw Error(ErrorCode::kAuthentication, "ciphertext failed authentication");
  }
  out.resize(mlen);
  return out;
}

BoxKeyPair box_keypair(Drbg& rng) {
  ensure_initialized();
  std::array<std::uint8_t, crypto_box_SEEDBYTES> seed;
  rng.fill(seed);
  BoxKeyPair kp;
  crypto_box_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
  return kp;
}

Bytes seal(ByteView message, const std::array<std::uint8_t, 32>& recipient) {
  ensure_initialized();
  Bytes out(message.size() + crypto_box_SEALBYTES);
  crypto_box_seal(out.data(), message.data(), message.size(), recipient.data());
  return out;
}

Bytes unseal(ByteView sealed, const BoxKeyPair& recipient) {
  if (sealed.size() < crypto_box_SEALBYTES) throw Error(ErrorCode::kAuthentication, "sealed box too short");
  Bytes out(sealed.size() - crypto_box_SEALBYTES);
  if (crypto_box_seal_open(out.data(), sealed.data(), sealed.size(), recipient.public_key.data(),
                           recipient.secret_key.data()) != 0) {
    throw Error(ErrorCode::kAuthentication, "sealed box could not be opened");
  }
  return out;
}

}  // namespace geomarket::crypto
