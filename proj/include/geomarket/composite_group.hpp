#pragma once

// Symmetric bilinear group of composite order n = p*q.
//
// G is the order-n subgroup of the supersingular curve E: y^2 = x^3 + x over
// F_P, where P = h*n - 1 is prime and P = 3 (mod 4), so #E(F_P) = P + 1 = h*n.
// The pairing is the reduced Tate pairing composed with the distortion map
// (x, y) -> (-x, i*y), giving e: G x G -> G_T, the order-n subgroup of
// F_{P^2}^* with F_{P^2} = F_P[i]/(i^2 + 1).
//
// Desk-scale sizes (n around 128 bits) are correct but offer no security.

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geomarket/common.hpp"
#include "geomarket/crypto.hpp"

namespace geomarket::pairing {

struct Point {
  mpz_class x;
  mpz_class y;
  bool infinity = true;

  static Point at_infinity() { return Point{}; }
  bool operator==(const Point& o) const {
    return infinity == o.infinity && (infinity || (x == o.x && y == o.y));
  }
};

/// a + b*i in F_{P^2}.
struct Gt {
  mpz_class a;
  mpz_class b;
  bool operator==(const Gt& o) const { return a == o.a && b == o.b; }
};

class FixedBaseTable;

namespace detail {
class Engine;
}

class CompositeGroup {
 public:
  /// `bits` is the size of n; must be even and >= 32. Deterministic in `rng`.
  static std::shared_ptr<const CompositeGroup> generate(unsigned bits, crypto::Drbg& rng);
  static std::shared_ptr<const CompositeGroup> deserialize(ByteView bytes);
  Bytes serialize() const;

  unsigned bits() const noexcept { return bits_; }
  const mpz_class& order() const noexcept { return n_; }
  const mpz_class& p() const noexcept { return p_; }
  const mpz_class& q() const noexcept { return q_; }
  const mpz_class& field_prime() const noexcept { return field_; }
  const mpz_class& cofactor() const noexcept { return cofactor_; }
  /// Generator of G (order n), of G_p (order p) and of G_q (order q).
  const Point& generator() const noexcept { return g_; }
  const Point& generator_p() const noexcept { return g_p_; }
  const Point& generator_q() const noexcept { return g_q_; }
  /// Stable identifier of the parameter set.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  /// "montgomery-N" (N 64-bit limbs) for desk-scale sizes, "gmp" otherwise.
  std::string backend_name() const;

  bool on_curve(const Point& pt) const;
  Point add(const Point& a, const Point& b) const;
  Point negate(const Point& a) const;
  Point mul(const Point& base, const mpz_class& k) const;
  /// Sum of many points (one final inversion).
  Point sum(std::span<const Point* const> points) const;

  Point random_gp(crypto::Drbg& rng) const;
  Point random_gq(crypto::Drbg& rng) const;
  mpz_class random_exponent(crypto::Drbg& rng, const mpz_class& modulus) const;

  Gt pair(const Point& a, const Point& b) const;
  Gt gt_one() const { return Gt{1, 0}; }
  Gt gt_mul(const Gt& a, const Gt& b) const;
  Gt gt_inverse(const Gt& a) const;
  Gt gt_pow(const Gt& a, const mpz_class& k) const;
  /// Maps arbitrary bytes to a non-identity element of G_T.
  Gt hash_to_gt(ByteView data) const;

  std::size_t field_bytes() const noexcept { return field_bytes_; }
  std::size_t point_bytes() const noexcept { return 1 + 2 * field_bytes_; }
  std::size_t gt_bytes() const noexcept { return 2 * field_bytes_; }
  void encode(Bytes& out, const Point& pt) const;
  void encode(Bytes& out, const Gt& v) const;
  Point decode_point(Reader& in) const;
  Gt decode_gt(Reader& in) const;

 private:
  CompositeGroup() = default;
  void finish_init();

  unsigned bits_ = 0;
  mpz_class p_, q_, n_, field_, cofactor_;
  mpz_class sqrt_exp_;  // (P + 1) / 4
  Point g_, g_p_, g_q_;
  std::size_t field_bytes_ = 0;
  std::uint64_t fingerprint_ = 0;
  std::shared_ptr<const detail::Engine> engine_;
};

/// Windowed precomputation for repeated multiplication of one base point.
class FixedBaseTable {
 public:
  FixedBaseTable() = default;
  FixedBaseTable(const CompositeGroup& group, const Point& base, unsigned max_scalar_bits);
  Point mul(const CompositeGroup& group, const mpz_class& k) const;
  bool empty() const noexcept { return rows_.empty(); }

 private:
  static constexpr unsigned kWindow = 4;
  std::vector<std::vector<Point>> rows_;  // rows_[j][d] = d * 16^j * base
  Point base_;
};

}  // namespace geomarket::pairing
