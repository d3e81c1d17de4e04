#include "geomarket/commitment.hpp"

#include "geomarket/bigint.hpp"

namespace geomarket::vc {

namespace {

constexpr std::uint32_t kParamsMagic = 0x47564350;  // "GVCP"
constexpr unsigned kPrimeBits = 129;                // exponents are 128-bit hashes

// Position-separated hash of a message into [0, 2^128).
mpz_class message_exponent(const CommitMessage& m, std::size_t i) {
  Bytes input = to_bytes("geomarket/vc/message");
  put_u64(input, i);
  put_u64(input, m.coord_word);
  input.insert(input.end(), m.oid.bytes.begin(), m.oid.bytes.end());
  crypto::Digest d = crypto::sha256(ByteView(input));
  return bigint::from_bytes(ByteView(d.data(), 16));
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

}  // namespace

struct Access {
  static const mpz_class& prime(const Params& pp, std::size_t i) { return pp.primes_[i]; }
  static const mpz_class& base(const Params& pp, std::size_t i) { return pp.bases_[i]; }
  static const mpz_class& s(const Params& pp) { return pp.base_; }
  static const mpz_class& blind(const Params& pp) { return pp.blind_base_; }
};

CommitMessage encode_location_message(geo::GridLocation loc, const ObjectId& oid) {
  return CommitMessage{(static_cast<std::uint64_t>(loc.x) << 32) | loc.y, oid};
}

Params Params::keygen(unsigned modulus_bits, std::size_t capacity, crypto::Drbg& rng) {
  if (modulus_bits < 256 || modulus_bits % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "modulus must be an even bit length of at least 256");
  }
  if (capacity == 0) throw Error(ErrorCode::kInvalidArgument, "commitment capacity must be at least 1");
  Params pp;
  pp.modulus_bits_ = modulus_bits;
  mpz_class p, q;
  do {
    p = bigint::random_prime(rng, modulus_bits / 2);
    q = bigint::random_prime(rng, modulus_bits / 2);
    pp.n_ = p * q;
  } while (p == q || mpz_sizeinbase(pp.n_.get_mpz_t(), 2) != modulus_bits);

  while (pp.primes_.size() < capacity) {
    mpz_class e = bigint::random_prime(rng, kPrimeBits);
    bool fresh = true;
    for (const mpz_class& f : pp.primes_) fresh = fresh && f != e;
    if (fresh) pp.primes_.push_back(e);
  }
  mpz_class g;
  do {
    pp.base_ = bigint::uniform(rng, pp.n_);
    mpz_gcd(g.get_mpz_t(), pp.base_.get_mpz_t(), pp.n_.get_mpz_t());
  } while (pp.base_ < 2 || g != 1);
  pp.finish();
  return pp;
}

void Params::finish() {
  element_bytes_ = bigint::byte_length(n_);
  const std::size_t q = primes_.size();
  // Prefix/suffix products give prod_{j != i} e_j without divisions.
  std::vector<mpz_class> prefix(q + 1, 1), suffix(q + 1, 1);
  for (std::size_t i = 0; i < q; ++i) prefix[i + 1] = prefix[i] * primes_[i];
  for (std::size_t i = q; i-- > 0;) suffix[i] = suffix[i + 1] * primes_[i];
  bases_.resize(q);
  for (std::size_t i = 0; i < q; ++i) bases_[i] = powm(base_, prefix[i] * suffix[i + 1], n_);
  blind_base_ = powm(base_, prefix[q], n_);
}

Bytes Params::serialize() const {
  Bytes out;
  put_u32(out, kParamsMagic);
  put_u32(out, modulus_bits_);
  put_blob(out, bigint::to_bytes(n_));
  put_blob(out, bigint::to_bytes(base_));
  put_u32(out, static_cast<std::uint32_t>(primes_.size()));
  for (const mpz_class& e : primes_) put_blob(out, bigint::to_bytes(e));
  return out;
}

Params Params::deserialize(ByteView bytes) {
  Reader in(bytes);
  if (in.u32() != kParamsMagic) throw Error(ErrorCode::kFormat, "not commitment parameters");
  Params pp;
  pp.modulus_bits_ = in.u32();
  pp.n_ = bigint::from_bytes(in.blob());
  pp.base_ = bigint::from_bytes(in.blob());
  const std::uint32_t q = in.u32();
  if (q == 0 || q > in.remaining()) throw Error(ErrorCode::kFormat, "bad commitment capacity");
  for (std::uint32_t i = 0; i < q; ++i) pp.primes_.push_back(bigint::from_bytes(in.blob()));
  if (!in.done() || pp.n_ < 3 || pp.base_ < 2 || pp.base_ >= pp.n_) {
    throw Error(ErrorCode::kFormat, "malformed commitment parameters");
  }
  pp.finish();
  return pp;
}

crypto::Digest Params::digest() const { return crypto::sha256(ByteView(serialize())); }

Committed commit(const Params& pp, std::span<const CommitMessage> messages, crypto::Drbg& rng) {
  if (messages.size() > pp.capacity()) {
    throw Error(ErrorCode::kSizeLimit, "batch of " + std::to_string(messages.size()) +
                                           " exceeds commitment capacity " + std::to_string(pp.capacity()));
  }
  Committed out;
  out.aux.messages.assign(messages.begin(), messages.end());
  out.aux.r = bigint::uniform(rng, pp.modulus());
  mpz_class c = powm(Access::blind(pp), out.aux.r, pp.modulus());
  for (std::size_t i = 0; i < messages.size(); ++i) {
    c = (c * powm(Access::base(pp, i), message_exponent(messages[i], i), pp.modulus())) % pp.modulus();
  }
  out.cc = bigint::to_bytes(c, pp.element_bytes());
  return out;
}

Bytes open(const Params& pp, const Aux& aux, const CommitMessage& m, std::size_t i) {
  if (i >= aux.messages.size()) throw Error(ErrorCode::kOutOfDomain, "opening position outside the committed batch");
  if (!(aux.messages[i] == m)) throw Error(ErrorCode::kInvalidArgument, "message differs from the committed one");
  // Lambda_i = S^E with E = r * prod_{j != i} e_j + sum_{j != i} x_j * prod_{k != i, j} e_k.
  const std::size_t n = aux.messages.size();
  const std::size_t q = pp.capacity();
  mpz_class others = 1;
  for (std::size_t j = 0; j < q; ++j) {
    if (j != i) others *= Access::prime(pp, j);
  }
  mpz_class exponent = aux.r * others;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    mpz_class cofactor = others / Access::prime(pp, j);
    exponent += message_exponent(aux.messages[j], j) * cofactor;
  }
  return bigint::to_bytes(powm(Access::s(pp), exponent, pp.modulus()), pp.element_bytes());
}

bool verify(const Params& pp, ByteView cc, const CommitMessage& m, std::size_t i, ByteView proof) {
  if (i >= pp.capacity() || cc.size() != pp.element_bytes() || proof.size() != pp.element_bytes()) return false;
  const mpz_class& n = pp.modulus();
  mpz_class c = bigint::from_bytes(cc);
  mpz_class lambda = bigint::from_bytes(proof);
  if (c == 0 || c >= n || lambda == 0 || lambda >= n) return false;
  mpz_class rhs = powm(Access::base(pp, i), message_exponent(m, i), n);
  rhs = (rhs * powm(lambda, Access::prime(pp, i), n)) % n;
  return rhs == c;
}

}  // namespace geomarket::vc
