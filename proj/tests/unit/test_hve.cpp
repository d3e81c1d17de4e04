#include <gtest/gtest.h>

#include <algorithm>

#include "geomarket/hve.hpp"

using namespace geomarket;
using namespace geomarket::hve;

namespace {

struct Fixture {
  GroupPtr group;
  KeyPair keys;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    crypto::Drbg rng("hve-test");
    Fixture out;
    out.group = CompositeGroup::generate(128, rng);
    out.keys = setup(out.group, 4ull * 16 * 16, rng);
    return out;
  }();
  return f;
}

}  // namespace

TEST(Hve, SetupValidatesBound) {
  crypto::Drbg rng("bound");
  auto g = fixture().group;
  EXPECT_THROW(setup(g, 1, rng), Error);
  EXPECT_THROW(setup(g, static_cast<std::uint64_t>(-1), rng), Error);
}

TEST(Hve, MatchIffAttributeEqualsPattern) {
  const auto& [g, keys] = fixture();
  crypto::Drbg rng("match");
  for (int t = 0; t < 40; ++t) {
    const std::uint64_t a = rng.uniform(keys.pk.value_bound);
    const std::uint64_t b = t % 2 ? a : rng.uniform(keys.pk.value_bound);
    Ciphertext c = encrypt(keys.pk, a, 3, rng);
    Token tk = make_token(keys.sk, b, 3, rng);
    MatchCounter counter;
    EXPECT_EQ(match(keys.pk, c, tk, &counter), a == b);
    EXPECT_EQ(counter.pairings.load(), 3u);
    if (a == b) {
      EXPECT_EQ(recover(keys.pk, c, tk), keys.pk.sentinel);
    } else {
      EXPECT_FALSE(recover(keys.pk, c, tk) == keys.pk.sentinel);
    }
  }
}

TEST(Hve, WildcardMatchesEverythingWithOnePairing) {
  const auto& [g, keys] = fixture();
  crypto::Drbg rng("wild");
  Token tk = make_token(keys.sk, std::nullopt, 0, rng);
  for (int t = 0; t < 5; ++t) {
    MatchCounter counter;
    EXPECT_TRUE(match(keys.pk, encrypt(keys.pk, rng.uniform(keys.pk.value_bound), 0, rng), tk, &counter));
    EXPECT_EQ(counter.pairings.load(), 1u);
  }
}

TEST(Hve, EncryptRejectsOutOfDomain) {
  const auto& [g, keys] = fixture();
  crypto::Drbg rng("ood");
  try {
    encrypt(keys.pk, keys.pk.value_bound, 0, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfDomain);
  }
}

TEST(Hve, CiphertextsAreRandomized) {
  const auto& [g, keys] = fixture();
  crypto::Drbg rng("rand");
  Ciphertext a = encrypt(keys.pk, 7, 1, rng), b = encrypt(keys.pk, 7, 1, rng);
  EXPECT_NE(serialize(*g, a), serialize(*g, b));
}

TEST(Hve, TokenFromOtherKeyRejected) {
  const auto& [g, keys] = fixture();
  crypto::Drbg rng("other");
  KeyPair other = setup(g, keys.pk.value_bound, rng);
  Token tk = make_token(other.sk, 5, 0, rng);
  EXPECT_THROW(match(keys.pk, encrypt(keys.pk, 5, 0, rng), tk), Error);
}

TEST(Hve, PublicKeyRoundTrip) {
  const auto& [g, keys] = fixture();
  PublicKey pk = PublicKey::deserialize(g, ByteView(keys.pk.serialize()));
  EXPECT_EQ(pk.key_id, keys.pk.key_id);
  EXPECT_EQ(pk.sentinel, keys.pk.sentinel);
  crypto::Drbg rng("pk");
  EXPECT_TRUE(match(pk, encrypt(pk, 9, 2, rng), make_token(keys.sk, 9, 2, rng)));
}

TEST(Hve, TokenSerializationRoundTrip) {
  const auto& [g, keys] = fixture();
  crypto::Drbg rng("tok");
  Token tk = make_token(keys.sk, 17, 2, rng);
  Token back = deserialize_token(*g, ByteView(serialize(*g, tk)));
  EXPECT_EQ(back.pattern, tk.pattern);
  EXPECT_EQ(back.level, tk.level);
  EXPECT_TRUE(match(keys.pk, encrypt(keys.pk, 17, 2, rng), back));
  Token wild = deserialize_token(*g, ByteView(serialize(*g, make_token(keys.sk, std::nullopt, 1, rng))));
  EXPECT_FALSE(wild.pattern.has_value());
  Bytes junk = serialize(*g, tk);
  junk.push_back(0);
  EXPECT_THROW(deserialize_token(*g, ByteView(junk)), Error);
}

TEST(Hve, SingleLevelVersusFullBundle) {
  const auto& [g, keys] = fixture();
  geo::DomainParams d(16, 0);
  crypto::Drbg rng("bundle");
  ObjectCipherBundle b = encrypt_object(keys.pk, ObjectId::from_index(1), {5, 9}, d, rng);
  ASSERT_EQ(b.levels.size(), 5u);
  geo::HveLevelValue q = geo::hve_query_value({4, 7, 8, 11}, d);
  Token tk = make_token(keys.sk, q.value, q.level, rng);
  MatchCounter single, full;
  EXPECT_TRUE(single_level_match(keys.pk, b, tk, &single));
  EXPECT_TRUE(full_bundle_match(keys.pk, b, tk, &full));
  EXPECT_EQ(single.pairings.load(), 3u);
  EXPECT_EQ(full.pairings.load(), 3u * b.levels.size());
  Token miss = make_token(keys.sk, geo::hve_query_value({0, 3, 0, 3}, d).value, 2, rng);
  EXPECT_FALSE(single_level_match(keys.pk, b, miss));
}

TEST(Hve, EncryptObjectChecksKeyBound) {
  const auto& [g, keys] = fixture();
  crypto::Drbg rng("grid");
  EXPECT_THROW(encrypt_object(keys.pk, ObjectId::from_index(0), {0, 0}, geo::DomainParams(32, 0), rng), Error);
}

TEST(Hve, LinearScanAgreesWithPlaintextAcrossWorkers) {
  const auto& [g, keys] = fixture();
  geo::DomainParams d(16, 0);
  crypto::Drbg rng("scan");
  std::vector<ObjectCipherBundle> file;
  std::vector<geo::GridLocation> locs;
  for (std::uint64_t i = 0; i < 40; ++i) {
    locs.push_back({static_cast<std::uint32_t>(rng.uniform(16)), static_cast<std::uint32_t>(rng.uniform(16))});
    file.push_back(encrypt_object(keys.pk, ObjectId::from_index(i), locs.back(), d, rng));
  }
  geo::SpatialRange r{8, 15, 0, 7};
  geo::HveLevelValue q = geo::hve_query_value(r, d);
  Token tk = make_token(keys.sk, q.value, q.level, rng);
  std::vector<ObjectId> expected;
  for (std::uint64_t i = 0; i < locs.size(); ++i) {
    if (r.contains(locs[i])) expected.push_back(ObjectId::from_index(i));
  }
  for (unsigned w : {1u, 2u, 3u, 4u, 64u}) {
    ScanResult res = linear_scan(keys.pk, file, tk, w);
    EXPECT_EQ(res.ids, expected) << w;
    EXPECT_EQ(res.pairings, 3u * file.size());
  }
  EXPECT_TRUE(linear_scan(keys.pk, std::span<const ObjectCipherBundle>(), tk, 4).ids.empty());
  EXPECT_THROW(linear_scan(keys.pk, file, tk, 0), Error);
}

TEST(Hve, FlatFileRoundTrip) {
  const auto& [g, keys] = fixture();
  geo::DomainParams d(16, 0);
  crypto::Drbg rng("flat");
  std::vector<ObjectCipherBundle> file;
  for (std::uint64_t i = 0; i < 5; ++i) file.push_back(encrypt_object(keys.pk, ObjectId::from_index(i), {1, 2}, d, rng));
  Bytes bytes = serialize_flat_file(keys.pk, file);
  auto back = parse_flat_file(keys.pk, ByteView(bytes));
  ASSERT_EQ(back.size(), file.size());
  for (std::size_t i = 0; i < file.size(); ++i) {
    EXPECT_EQ(back[i].id, file[i].id);
    ASSERT_EQ(back[i].levels.size(), file[i].levels.size());
    for (std::size_t l = 0; l < file[i].levels.size(); ++l) {
      EXPECT_EQ(serialize(*g, back[i].levels[l]), serialize(*g, file[i].levels[l]));
    }
  }
  KeyPair other = setup(g, keys.pk.value_bound, rng);
  EXPECT_THROW(parse_flat_file(other.pk, ByteView(bytes)), Error);
  bytes.resize(bytes.size() - 1);
  EXPECT_THROW(parse_flat_file(keys.pk, ByteView(bytes)), Error);
}
