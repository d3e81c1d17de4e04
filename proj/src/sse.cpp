#include "geomarket/sse.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>

namespace geomarket::sse {

namespace {

constexpr std::uint32_t kEdbMagic = 0x47535345;  // "GSSE"
constexpr std::uint32_t kEdbVersion = 1;
constexpr std::uint32_t kTokenVersion = 1;

using Scalar = std::array<std::uint8_t, crypto_core_ristretto255_SCALARBYTES>;
using Element = std::array<std::uint8_t, crypto_core_ristretto255_BYTES>;

Bytes prf(ByteView key, std::string_view label, ByteView msg, std::size_t len) {
  Bytes input = to_bytes(label);
  input.push_back(0);
  input.insert(input.end(), msg.begin(), msg.end());
  crypto::Digest d = crypto::hmac_sha256(key, ByteView(input));
  return Bytes(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(len));
}

Bytes prf(ByteView key, std::string_view label, std::string_view msg, std::size_t len) {
  return prf(key, label, ByteView(reinterpret_cast<const std::uint8_t*>(msg.data()), msg.size()), len);
}

// PRF into the scalar field: 512 bits reduced mod the group order.
Scalar prf_scalar(ByteView key, std::string_view label, ByteView msg) {
  std::array<std::uint8_t, crypto_auth_hmacsha512_BYTES> wide{};
  Bytes input = to_bytes(label);
  input.push_back(0);
  input.insert(input.end(), msg.begin(), msg.end());
  crypto_auth_hmacsha512_state st;
  crypto_auth_hmacsha512_init(&st, key.data(), key.size());
  crypto_auth_hmacsha512_update(&st, input.data(), input.size());
  crypto_auth_hmacsha512_final(&st, wide.data());
  Scalar s{};
  crypto_core_ristretto255_scalar_reduce(s.data(), wide.data());
  return s;
}

Bytes word_counter(const std::string& w, std::uint64_t c) {
  Bytes out = to_bytes(w);
  out.push_back(0);
  put_u64(out, c);
  return out;
}

Element base_mult(const Scalar& s) {
  Element out{};
  if (crypto_scalarmult_ristretto255_base(out.data(), s.data()) != 0) {
    throw Error(ErrorCode::kCrypto, "degenerate scalar in cross-tag computation");
  }
  return out;
}

Scalar scalar_mul(const Scalar& a, const Scalar& b) {
  Scalar out{};
  crypto_core_ristretto255_scalar_mul(out.data(), a.data(), b.data());
  return out;
}

std::array<std::uint8_t, 16> mask(ByteView posting_key, std::uint64_t c) {
  Bytes msg;
  put_u64(msg, c);
  crypto::Digest d = crypto::hmac_sha256(posting_key, ByteView(msg));
  std::array<std::uint8_t, 16> out{};
  std::memcpy(out.data(), d.data(), out.size());
  return out;
}

void check_security(unsigned bits) {
  if (bits != 128 && bits != 256) throw Error(ErrorCode::kInvalidArgument, "security level must be 128 or 256 bits");
}

}  // namespace

std::size_t BytesHash::operator()(const Bytes& b) const noexcept {
  std::size_t h = 0;
  std::memcpy(&h, b.data(), std::min(sizeof(h), b.size()));
  return h;
}

std::size_t EncryptedIndex::XTagHash::operator()(const XTag& t) const noexcept {
  std::size_t h = 0;
  std::memcpy(&h, t.data(), sizeof(h));
  return h;
}

EncryptedIndex::EncryptedIndex(unsigned security_bits) : security_bits_(security_bits) { check_security(security_bits); }

std::size_t EncryptedIndex::posting_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [tag, list] : tset_) n += list.size();
  return n;
}

std::size_t EncryptedIndex::size_bytes() const {
  const std::size_t tag_len = security_bits_ / 8;
  return 4 + 4 + 4 + 8 + tset_.size() * (tag_len + 8) + posting_count() * (16 + 32) + 8 + xset_.size() * 32;
}

Bytes EncryptedIndex::serialize() const {
  Bytes out;
  out.reserve(size_bytes());
  put_u32(out, kEdbMagic);
  put_u32(out, kEdbVersion);
  put_u32(out, security_bits_);
  std::vector<const Bytes*> tags;
  tags.reserve(tset_.size());
  for (const auto& [tag, list] : tset_) tags.push_back(&tag);
  std::sort(tags.begin(), tags.end(), [](const Bytes* a, const Bytes* b) { return *a < *b; });
  put_u64(out, tags.size());
  for (const Bytes* tag : tags) {
    out.insert(out.end(), tag->begin(), tag->end());
    const auto& list = tset_.at(*tag);
    put_u64(out, list.size());
    for (const Posting& p : list) {
      out.insert(out.end(), p.e.begin(), p.e.end());
      out.insert(out.end(), p.y.begin(), p.y.end());
    }
  }
  std::vector<XTag> xs(xset_.begin(), xset_.end());
  std::sort(xs.begin(), xs.end());
  put_u64(out, xs.size());
  for (const XTag& x : xs) out.insert(out.end(), x.begin(), x.end());
  return out;
}

EncryptedIndex EncryptedIndex::deserialize(ByteView bytes) {
  Reader in(bytes);
  if (in.u32() != kEdbMagic) throw Error(ErrorCode::kFormat, "not an encrypted index");
  if (in.u32() != kEdbVersion) throw Error(ErrorCode::kFormat, "unsupported encrypted index version");
  EncryptedIndex edb;
  edb.security_bits_ = in.u32();
  check_security(edb.security_bits_);
  const std::size_t tag_len = edb.security_bits_ / 8;
  const std::uint64_t tags = in.u64();
  for (std::uint64_t i = 0; i < tags; ++i) {
    ByteView tag = in.take(tag_len);
    const std::uint64_t n = in.u64();
    if (n > in.remaining() / 48) throw Error(ErrorCode::kFormat, "posting list overruns the container");
    std::vector<Posting> list(static_cast<std::size_t>(n));
    for (Posting& p : list) {
      ByteView e = in.take(16);
      ByteView y = in.take(32);
      std::memcpy(p.e.data(), e.data(), 16);
      std::memcpy(p.y.data(), y.data(), 32);
    }
    edb.tset_.emplace(Bytes(tag.begin(), tag.end()), std::move(list));
  }
  const std::uint64_t xs = in.u64();
  if (xs > in.remaining() / 32) throw Error(ErrorCode::kFormat, "cross-tag set overruns the container");
  for (std::uint64_t i = 0; i < xs; ++i) {
    ByteView x = in.take(32);
    XTag t{};
    std::memcpy(t.data(), x.data(), 32);
    edb.xset_.insert(t);
  }
  if (!in.done()) throw Error(ErrorCode::kFormat, "trailing bytes after encrypted index");
  return edb;
}

Bytes Token::serialize() const {
  Bytes out;
  put_u32(out, kTokenVersion);
  put_u32(out, conjuncts);
  put_blob(out, stag);
  put_blob(out, posting_key);
  put_u64(out, xtokens.size());
  for (const auto& x : xtokens) out.insert(out.end(), x.begin(), x.end());
  return out;
}

Token Token::deserialize(ByteView bytes) {
  Reader in(bytes);
  if (in.u32() != kTokenVersion) throw Error(ErrorCode::kFormat, "unsupported SSE token version");
  Token tk;
  tk.conjuncts = in.u32();
  tk.stag = in.blob();
  tk.posting_key = in.blob();
  const std::uint64_t n = in.u64();
  if (n > in.remaining() / 32) throw Error(ErrorCode::kFormat, "SSE token overruns its buffer");
  tk.xtokens.resize(static_cast<std::size_t>(n));
  for (auto& x : tk.xtokens) {
    ByteView v = in.take(32);
    std::memcpy(x.data(), v.data(), 32);
  }
  if (!in.done() || tk.conjuncts == 0) throw Error(ErrorCode::kFormat, "malformed SSE token");
  return tk;
}

Client::Client(Keys keys) : keys_(std::move(keys)) {
  crypto::ensure_initialized();
  check_security(keys_.security_bits);
  if (keys_.k_i.size() != keys_.security_bits / 8 || keys_.k_d.size() != crypto::kAeadKeyBytes) {
    throw Error(ErrorCode::kInvalidArgument, "SSE key lengths do not match the security level");
  }
  const ByteView ki(keys_.k_i);
  const Bytes none;
  sub_.k_s = prf(ki, "stag", ByteView(none), 32);
  sub_.k_x = prf(ki, "xtag", ByteView(none), 32);
  sub_.k_z = prf(ki, "blind", ByteView(none), 32);
  sub_.k_t = prf(ki, "posting", ByteView(none), 32);
  sub_.k_xind = prf(ki, "xind", ByteView(none), 32);
  sub_.k_perm = prf(ki, "permute", ByteView(none), 32);
}

std::uint64_t Client::keyword_count(const std::string& w) const {
  auto it = counts_.find(w);
  return it == counts_.end() ? 0 : it->second;
}

void Client::add_posting(EncryptedIndex& edb, const std::string& w, const ObjectId& id) {
  const std::size_t tag_len = keys_.security_bits / 8;
  std::uint64_t& c = counts_[w];
  Bytes stag = prf(sub_.k_s, "", w, tag_len);
  Bytes posting_key = prf(sub_.k_t, "", w, 32);
  const ByteView idv(id.bytes);

  Scalar xind = prf_scalar(sub_.k_xind, "", idv);
  Bytes wc = word_counter(w, c);
  Scalar z = prf_scalar(sub_.k_z, "", ByteView(wc));
  Scalar z_inv{};
  if (crypto_core_ristretto255_scalar_invert(z_inv.data(), z.data()) != 0) {
    throw Error(ErrorCode::kCrypto, "blinding scalar is not invertible");
  }
  Posting p;
  p.e = mask(ByteView(posting_key), c);
  for (std::size_t i = 0; i < p.e.size(); ++i) p.e[i] ^= id.bytes[i];
  p.y = scalar_mul(xind, z_inv);
  edb.tset_[stag].push_back(p);

  Scalar kx = prf_scalar(sub_.k_x, "", ByteView(to_bytes(w)));
  edb.xset_.insert(base_mult(scalar_mul(kx, xind)));
  ++c;
}

void Client::insert(EncryptedIndex& edb, const ObjectId& id, std::span<const std::string> keywords) {
  if (edb.security_bits_ != keys_.security_bits) {
    throw Error(ErrorCode::kInvalidArgument, "index and keys use different security levels");
  }
  if (ids_.count(id)) throw Error(ErrorCode::kDuplicate, "object " + id.hex() + " is already indexed");
  std::set<std::string> unique(keywords.begin(), keywords.end());
  for (const std::string& w : unique) add_posting(edb, w, id);
  ids_.insert(id);
}

Token Client::token(std::span<const std::string> query) const {
  if (query.empty()) throw Error(ErrorCode::kInvalidArgument, "empty keyword query");
  const std::string& w1 = query[0];
  Token tk;
  tk.conjuncts = static_cast<std::uint32_t>(query.size());
  tk.stag = prf(sub_.k_s, "", w1, keys_.security_bits / 8);
  tk.posting_key = prf(sub_.k_t, "", w1, 32);
  const std::uint64_t count = keyword_count(w1);
  std::vector<Scalar> kx;
  for (std::size_t j = 1; j < query.size(); ++j) kx.push_back(prf_scalar(sub_.k_x, "", ByteView(to_bytes(query[j]))));
  tk.xtokens.reserve(static_cast<std::size_t>(count) * kx.size());
  for (std::uint64_t c = 0; c < count; ++c) {
    Bytes wc = word_counter(w1, c);
    Scalar z = prf_scalar(sub_.k_z, "", ByteView(wc));
    for (const Scalar& k : kx) tk.xtokens.push_back(base_mult(scalar_mul(z, k)));
  }
  return tk;
}

struct SearchAccess {
  static const std::vector<Posting>* postings(const EncryptedIndex& edb, const Bytes& stag) {
    auto it = edb.tset_.find(stag);
    return it == edb.tset_.end() ? nullptr : &it->second;
  }
  static bool in_xset(const EncryptedIndex& edb, const Element& x) { return edb.xset_.count(x) != 0; }
};

SearchResult search(const EncryptedIndex& edb, const Token& tk) {
  SearchResult out;
  const std::vector<Posting>* list = SearchAccess::postings(edb, tk.stag);
  if (!list) return out;
  out.postings = list->size();
  const std::size_t extra = tk.conjuncts - 1;
  for (std::size_t c = 0; c < list->size(); ++c) {
    const Posting& p = (*list)[c];
    bool all = true;
    for (std::size_t j = 0; j < extra && all; ++j) {
      const std::size_t slot = c * extra + j;
      // A token built before later inserts has no xtoken for newer postings.
      if (slot >= tk.xtokens.size()) {
        all = false;
        break;
      }
      Element x{};
      ++out.cross_tests;
      if (crypto_scalarmult_ristretto255(x.data(), p.y.data(), tk.xtokens[slot].data()) != 0) {
        all = false;
        break;
      }
      all = SearchAccess::in_xset(edb, x);
    }
    if (!all) continue;
    std::array<std::uint8_t, 16> m = mask(ByteView(tk.posting_key), c);
    ObjectId id;
    for (std::size_t i = 0; i < m.size(); ++i) id.bytes[i] = p.e[i] ^ m[i];
    out.ids.push_back(id);
  }
  return out;
}

std::pair<Client, EncryptedIndex> setup(const DocumentDatabase& ddb, unsigned security_bits, ByteView seed) {
  check_security(security_bits);
  if (ddb.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot build an index over an empty database");
  crypto::Drbg rng(seed);
  Keys keys;
  keys.security_bits = security_bits;
  keys.k_i = rng.bytes(security_bits / 8);
  keys.k_d = rng.bytes(crypto::kAeadKeyBytes);
  Client client(std::move(keys));
  EncryptedIndex edb;
  edb.security_bits_ = security_bits;

  std::map<std::string, std::vector<ObjectId>> inverted;
  for (const auto& [id, words] : ddb) {
    std::set<std::string> unique(words.begin(), words.end());
    for (const std::string& w : unique) inverted[w].push_back(id);
    client.ids_.insert(id);
  }
  for (auto& [w, ids] : inverted) {
    // Posting order is a keyed pseudorandom permutation of the id list.
    Bytes perm_seed = prf(client.sub_.k_perm, "", w, 32);
    crypto::Drbg perm{ByteView(perm_seed)};
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[perm.uniform(i)]);
    for (const ObjectId& id : ids) client.add_posting(edb, w, id);
  }
  return {std::move(client), std::move(edb)};
}

std::vector<std::vector<std::string>> range_queries(const geo::SpatialRange& range,
                                                    const geo::DomainParams& params) {
  std::vector<std::vector<std::string>> out;
  for (const geo::ConjunctiveTerm& t : geo::decompose_range_query(range, params)) {
    const bool first_root = t.first.level() == 0;
    const bool second_root = t.second.level() == 0;
    if (first_root && second_root) {
      // Whole domain: every object carries exactly one of x0 / x1.
      out.push_back({"x0"});
      out.push_back({"x1"});
    } else if (second_root) {
      out.push_back({t.first.keyword()});
    } else {
      out.push_back({t.first.keyword(), t.second.keyword()});
    }
  }
  return out;
}

RangeQueryResult encrypted_spatial_range_query(const EncryptedIndex& edb, const Client& client,
                                               const geo::SpatialRange& range, const geo::DomainParams& params) {
  RangeQueryResult out;
  for (const auto& q : range_queries(range, params)) {
    Token tk = client.token(q);
    out.token_bytes += tk.serialize().size();
    SearchResult r = search(edb, tk);
    ++out.conjunctive_queries;
    out.postings += r.postings;
    out.cross_tests += r.cross_tests;
    out.ids.insert(r.ids.begin(), r.ids.end());
  }
  return out;
}

Bytes document_encrypt(ByteView k_d, ByteView payload, crypto::Drbg& rng) { return crypto::aead_encrypt(k_d, payload, rng); }

Bytes document_decrypt(ByteView k_d, ByteView ciphertext) { return crypto::aead_decrypt(k_d, ciphertext); }

}  // namespace geomarket::sse
