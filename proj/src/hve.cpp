#include "geomarket/hve.hpp"

#include <algorithm>
#include <cstring>
#include <thread>

#include "geomarket/bigint.hpp"

namespace geomarket::hve {

using pairing::FixedBaseTable;

struct PublicKey::Tables {
  FixedBaseTable g_q, V, U, H, W;
};

namespace {

constexpr std::uint32_t kFlatMagic = 0x48564546;  // "HVEF"
constexpr std::uint32_t kFlatVersion = 1;
constexpr std::uint8_t kTokenWildcard = 0;
constexpr std::uint8_t kTokenFixed = 1;

Bytes public_body(const PublicKey& pk) {
  const CompositeGroup& grp = *pk.group;
  Bytes out;
  put_u64(out, grp.fingerprint());
  put_u64(out, pk.value_bound);
  for (const Point* pt : {&pk.g_q, &pk.V, &pk.U, &pk.H, &pk.W}) grp.encode(out, *pt);
  grp.encode(out, pk.A);
  return out;
}

void finish_public_key(PublicKey& pk) {
  const CompositeGroup& grp = *pk.group;
  Bytes body = public_body(pk);
  Bytes label = to_bytes("geomarket/hve/sentinel");
  label.insert(label.end(), body.begin(), body.end());
  pk.sentinel = grp.hash_to_gt(label);
  crypto::Digest d = crypto::sha256(ByteView(body));
  std::uint64_t id = 0;
  for (int i = 0; i < 8; ++i) id = (id << 8) | d[i];
  pk.key_id = id;
  const unsigned bits = static_cast<unsigned>(mpz_sizeinbase(grp.order().get_mpz_t(), 2));
  auto t = std::make_shared<PublicKey::Tables>();
  t->g_q = FixedBaseTable(grp, pk.g_q, bits);
  t->V = FixedBaseTable(grp, pk.V, bits);
  t->U = FixedBaseTable(grp, pk.U, bits);
  t->H = FixedBaseTable(grp, pk.H, bits);
  t->W = FixedBaseTable(grp, pk.W, bits);
  pk.tables = std::move(t);
}

void check_token_key(const PublicKey& pk, const Token& tk) {
  if (tk.key_id != pk.key_id) {
    throw Error(ErrorCode::kInvalidArgument, "token was issued under a different HVE key or group");
  }
}

void encode_ciphertext(Bytes& out, const CompositeGroup& grp, const Ciphertext& c) {
  put_u32(out, c.level);
  grp.encode(out, c.c_prime);
  grp.encode(out, c.c0);
  grp.encode(out, c.c1);
  grp.encode(out, c.c2);
}

Ciphertext decode_ciphertext(Reader& in, const CompositeGroup& grp) {
  Ciphertext c;
  c.level = in.u32();
  c.c_prime = grp.decode_gt(in);
  c.c0 = grp.decode_point(in);
  c.c1 = grp.decode_point(in);
  c.c2 = grp.decode_point(in);
  return c;
}

}  // namespace

Bytes PublicKey::serialize() const { return public_body(*this); }

PublicKey PublicKey::deserialize(GroupPtr group, ByteView bytes) {
  Reader in(bytes);
  if (in.u64() != group->fingerprint()) throw Error(ErrorCode::kFormat, "HVE public key belongs to another group");
  PublicKey pk;
  pk.group = std::move(group);
  pk.value_bound = in.u64();
  for (Point* pt : {&pk.g_q, &pk.V, &pk.U, &pk.H, &pk.W}) *pt = pk.group->decode_point(in);
  pk.A = pk.group->decode_gt(in);
  if (!in.done()) throw Error(ErrorCode::kFormat, "trailing bytes after HVE public key");
  finish_public_key(pk);
  return pk;
}

KeyPair setup(GroupPtr group, std::uint64_t value_bound, crypto::Drbg& rng) {
  const CompositeGroup& grp = *group;
  if (value_bound < 2 || mpz_class(static_cast<unsigned long>(value_bound)) >= grp.p() ||
      mpz_class(static_cast<unsigned long>(value_bound)) >= grp.q()) {
    throw Error(ErrorCode::kInvalidArgument, "attribute bound m must satisfy 2 <= m < p, q");
  }
  KeyPair kp;
  SecretKey& sk = kp.sk;
  PublicKey& pk = kp.pk;
  sk.group = group;
  sk.a = grp.random_exponent(rng, grp.p());
  sk.g = grp.random_gp(rng);
  sk.v = grp.random_gp(rng);
  sk.u = grp.random_gp(rng);
  sk.h = grp.random_gp(rng);
  sk.w = grp.random_gp(rng);

  pk.group = group;
  pk.value_bound = value_bound;
  pk.g_q = grp.generator_q();
  pk.V = grp.add(sk.v, grp.random_gq(rng));
  pk.U = grp.add(sk.u, grp.random_gq(rng));
  pk.H = grp.add(sk.h, grp.random_gq(rng));
  pk.W = grp.add(sk.w, grp.random_gq(rng));
  pk.A = grp.gt_pow(grp.pair(sk.g, sk.v), sk.a);
  finish_public_key(pk);
  sk.key_id = pk.key_id;
  return kp;
}

Ciphertext encrypt(const PublicKey& pk, std::uint64_t attribute, std::uint32_t level, crypto::Drbg& rng) {
  if (attribute >= pk.value_bound) throw Error(ErrorCode::kOutOfDomain, "attribute outside Z_m");
  const CompositeGroup& grp = *pk.group;
  const PublicKey::Tables& t = *pk.tables;
  const mpz_class s = grp.random_exponent(rng, grp.order());
  auto z = [&] { return t.g_q.mul(grp, grp.random_exponent(rng, grp.q())); };

  Ciphertext c;
  c.level = level;
  c.c_prime = grp.gt_mul(pk.sentinel, grp.gt_pow(pk.A, s));
  c.c0 = grp.add(t.V.mul(grp, s), z());
  mpz_class si = (s * mpz_class(static_cast<unsigned long>(attribute))) % grp.order();
  Point uh = grp.add(t.U.mul(grp, si), t.H.mul(grp, s));
  c.c1 = grp.add(uh, z());
  c.c2 = grp.add(t.W.mul(grp, s), z());
  return c;
}

Token make_token(const SecretKey& sk, std::optional<std::uint64_t> pattern, std::uint32_t level,
                 crypto::Drbg& rng) {
  const CompositeGroup& grp = *sk.group;
  Token tk;
  tk.pattern = pattern;
  tk.level = level;
  tk.key_id = sk.key_id;
  Point ga = grp.mul(sk.g, sk.a);
  if (!pattern) {
    tk.k0 = ga;
    return tk;
  }
  const mpz_class r1 = grp.random_exponent(rng, grp.p());
  const mpz_class r2 = grp.random_exponent(rng, grp.p());
  Point uh = grp.add(grp.mul(sk.u, mpz_class(static_cast<unsigned long>(*pattern))), sk.h);
  Point parts[] = {ga, grp.mul(uh, r1), grp.mul(sk.w, r2)};
  const Point* ptrs[] = {&parts[0], &parts[1], &parts[2]};
  tk.k0 = grp.sum(ptrs);
  tk.k1 = grp.mul(sk.v, r1);
  tk.k2 = grp.mul(sk.v, r2);
  return tk;
}

Gt recover(const PublicKey& pk, const Ciphertext& c, const Token& tk, MatchCounter* counter) {
  check_token_key(pk, tk);
  const CompositeGroup& grp = *pk.group;
  Gt denom = grp.pair(c.c0, tk.k0);
  std::uint64_t used = 1;
  Gt out = c.c_prime;
  if (tk.pattern) {
    out = grp.gt_mul(out, grp.gt_mul(grp.pair(c.c1, tk.k1), grp.pair(c.c2, tk.k2)));
    used += 2;
  }
  if (counter) counter->pairings.fetch_add(used, std::memory_order_relaxed);
  return grp.gt_mul(out, grp.gt_inverse(denom));
}

bool match(const PublicKey& pk, const Ciphertext& c, const Token& tk, MatchCounter* counter) {
  bool ok = recover(pk, c, tk, counter) == pk.sentinel;
  if (ok && counter) counter->matches.fetch_add(1, std::memory_order_relaxed);
  return ok;
}

ObjectCipherBundle encrypt_object(const PublicKey& pk, const ObjectId& id, geo::GridLocation loc,
                                  const geo::DomainParams& params, crypto::Drbg& rng) {
  if (params.hve_value_bound() > pk.value_bound) {
    throw Error(ErrorCode::kInvalidArgument, "HVE key attribute bound is too small for this grid");
  }
  ObjectCipherBundle bundle;
  bundle.id = id;
  for (const geo::HveLevelValue& lv : geo::hve_level_values(loc, params)) {
    bundle.levels.push_back(encrypt(pk, lv.value, lv.level, rng));
  }
  return bundle;
}

bool single_level_match(const PublicKey& pk, const ObjectCipherBundle& bundle, const Token& tk,
                        MatchCounter* counter) {
  for (const Ciphertext& c : bundle.levels) {
    if (c.level == tk.level) return match(pk, c, tk, counter);
  }
  return false;
}

bool full_bundle_match(const PublicKey& pk, const ObjectCipherBundle& bundle, const Token& tk,
                       MatchCounter* counter) {
  bool any = false;
  for (const Ciphertext& c : bundle.levels) any = match(pk, c, tk, counter) || any;
  return any;
}

ScanResult linear_scan(const PublicKey& pk, std::span<const ObjectCipherBundle> file, const Token& tk,
                       unsigned workers) {
  if (workers == 0) throw Error(ErrorCode::kInvalidArgument, "linear_scan needs at least one worker");
  check_token_key(pk, tk);
  const std::size_t n = file.size();
  workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(workers, n)));
  std::vector<std::uint8_t> hit(n, 0);
  std::vector<std::uint64_t> pairings(workers, 0);

  auto run = [&](unsigned w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    MatchCounter local;
    for (std::size_t i = lo; i < hi; ++i) hit[i] = single_level_match(pk, file[i], tk, &local) ? 1 : 0;
    pairings[w] = local.pairings.load();
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }

  ScanResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (hit[i]) out.ids.push_back(file[i].id);
  }
  for (std::uint64_t p : pairings) out.pairings += p;
  return out;
}

Bytes serialize(const CompositeGroup& group, const Ciphertext& c) {
  Bytes out;
  encode_ciphertext(out, group, c);
  return out;
}

Bytes serialize(const CompositeGroup& group, const Token& tk) {
  Bytes out;
  put_u64(out, tk.key_id);
  put_u32(out, tk.level);
  out.push_back(tk.pattern ? kTokenFixed : kTokenWildcard);
  put_u64(out, tk.pattern.value_or(0));
  group.encode(out, tk.k0);
  if (tk.pattern) {
    group.encode(out, tk.k1);
    group.encode(out, tk.k2);
  }
  return out;
}

Token deserialize_token(const CompositeGroup& group, ByteView bytes) {
  Reader in(bytes);
  Token tk;
  tk.key_id = in.u64();
  tk.level = in.u32();
  std::uint8_t kind = in.u8();
  std::uint64_t pattern = in.u64();
  if (kind != kTokenWildcard && kind != kTokenFixed) throw Error(ErrorCode::kFormat, "unknown HVE token kind");
  tk.k0 = group.decode_point(in);
  if (kind == kTokenFixed) {
    tk.pattern = pattern;
    tk.k1 = group.decode_point(in);
    tk.k2 = group.decode_point(in);
  }
  if (!in.done()) throw Error(ErrorCode::kFormat, "trailing bytes after HVE token");
  return tk;
}

Bytes serialize_flat_file(const PublicKey& pk, std::span<const ObjectCipherBundle> file) {
  const CompositeGroup& grp = *pk.group;
  Bytes out;
  put_u32(out, kFlatMagic);
  put_u32(out, kFlatVersion);
  put_u64(out, pk.key_id);
  put_u64(out, file.size());
  Bytes rec;
  for (const ObjectCipherBundle& b : file) {
    rec.clear();
    rec.insert(rec.end(), b.id.bytes.begin(), b.id.bytes.end());
    put_u32(rec, static_cast<std::uint32_t>(b.levels.size()));
    for (const Ciphertext& c : b.levels) encode_ciphertext(rec, grp, c);
    put_blob(out, rec);
  }
  return out;
}

std::vector<ObjectCipherBundle> parse_flat_file(const PublicKey& pk, ByteView bytes) {
  const CompositeGroup& grp = *pk.group;
  Reader in(bytes);
  if (in.u32() != kFlatMagic) throw Error(ErrorCode::kFormat, "not an HVE flat file");
  if (in.u32() != kFlatVersion) throw Error(ErrorCode::kFormat, "unsupported HVE flat file version");
  if (in.u64() != pk.key_id) throw Error(ErrorCode::kInvalidArgument, "flat file was built under another HVE key");
  const std::uint64_t count = in.u64();
  std::vector<ObjectCipherBundle> file;
  file.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    Bytes rec = in.blob();
    Reader r{ByteView(rec)};
    ObjectCipherBundle b;
    ByteView id = r.take(b.id.bytes.size());
    std::memcpy(b.id.bytes.data(), id.data(), id.size());
    const std::uint32_t levels = r.u32();
    for (std::uint32_t l = 0; l < levels; ++l) b.levels.push_back(decode_ciphertext(r, grp));
    if (!r.done()) throw Error(ErrorCode::kFormat, "malformed HVE flat file record");
    file.push_back(std::move(b));
  }
  if (!in.done()) throw Error(ErrorCode::kFormat, "trailing bytes after HVE flat file");
  return file;
}

}  // namespace geomarket::hve
