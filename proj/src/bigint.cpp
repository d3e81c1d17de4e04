#include "geomarket/bigint.hpp"

namespace geomarket::bigint {

std::size_t byte_length(const mpz_class& v) {
  if (v == 0) return 0;
  return (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
}

Bytes to_bytes(const mpz_class& v) {
  Bytes out(byte_length(v));
  if (!out.empty()) {
    std::size_t count = 0;
    mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  }
  return out;
}

Bytes to_bytes(const mpz_class& v, std::size_t width) {
  if (v < 0) throw Error(ErrorCode::kInvalidArgument, "negative values have no unsigned encoding");
  Bytes raw = to_bytes(v);
  if (raw.size() > width) throw Error(ErrorCode::kInvalidArgument, "value does not fit the encoding width");
  Bytes out(width - raw.size(), 0);
  out.insert(out.end(), raw.begin(), raw.end());
  return out;
}

mpz_class from_bytes(ByteView bytes) {
  mpz_class v;
  if (!bytes.empty()) mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return v;
}

mpz_class uniform(crypto::Drbg& rng, const mpz_class& bound) {
  if (bound <= 0) throw Error(ErrorCode::kInvalidArgument, "uniform bound must be positive");
  Bytes raw = rng.bytes(byte_length(bound) + 8);
  mpz_class v = from_bytes(raw);
  mpz_mod(v.get_mpz_t(), v.get_mpz_t(), bound.get_mpz_t());
  return v;
}

mpz_class random_bits(crypto::Drbg& rng, unsigned bits) {
  if (bits < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two bits");
  Bytes raw = rng.bytes((bits + 7) / 8);
  mpz_class v = from_bytes(raw);
  mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), bits);
  mpz_setbit(v.get_mpz_t(), bits - 1);
  mpz_setbit(v.get_mpz_t(), 0);
  return v;
}

mpz_class random_prime(crypto::Drbg& rng, unsigned bits) {
  mpz_class v = random_bits(rng, bits);
  mpz_nextprime(v.get_mpz_t(), v.get_mpz_t());
  return v;
}

}  // namespace geomarket::bigint
