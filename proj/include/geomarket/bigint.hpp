#pragma once

#include <gmpxx.h>

#include "geomarket/common.hpp"
#include "geomarket/crypto.hpp"

namespace geomarket::bigint {

/// Unsigned big-endian encoding, left-padded to exactly `width` bytes.
Bytes to_bytes(const mpz_class& v, std::size_t width);
/// Minimal big-endian encoding (empty for zero).
Bytes to_bytes(const mpz_class& v);
mpz_class from_bytes(ByteView bytes);
std::size_t byte_length(const mpz_class& v);

/// Uniform in [0, bound) (bias below 2^-64).
mpz_class uniform(crypto::Drbg& rng, const mpz_class& bound);
/// Random odd value with exactly `bits` bits (top bit set).
mpz_class random_bits(crypto::Drbg& rng, unsigned bits);
/// Next prime above a random `bits`-bit value.
mpz_class random_prime(crypto::Drbg& rng, unsigned bits);

}  // namespace geomarket::bigint
