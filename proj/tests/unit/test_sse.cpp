#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <set>

#include "geomarket/sse.hpp"

using namespace geomarket;
using namespace geomarket::sse;

namespace {

ByteView seed_of(const char* s) { return ByteView(reinterpret_cast<const std::uint8_t*>(s), std::strlen(s)); }

DocumentDatabase small_db() {
  DocumentDatabase db;
  db[ObjectId::from_index(1)] = {"a", "b", "c"};
  db[ObjectId::from_index(2)] = {"a", "c"};
  db[ObjectId::from_index(3)] = {"b"};
  db[ObjectId::from_index(4)] = {"a", "b"};
  db[ObjectId::from_index(5)] = {"c", "d"};
  return db;
}

std::set<ObjectId> oracle(const DocumentDatabase& db, const std::vector<std::string>& q) {
  std::set<ObjectId> out;
  for (const auto& [id, words] : db) {
    bool all = std::all_of(q.begin(), q.end(),
                           [&](const std::string& w) { return std::find(words.begin(), words.end(), w) != words.end(); });
    if (all) out.insert(id);
  }
  return out;
}

std::set<ObjectId> as_set(const std::vector<ObjectId>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Sse, SetupValidation) {
  EXPECT_THROW(setup({}, 128, seed_of("s")), Error);
  EXPECT_THROW(setup(small_db(), 192, seed_of("s")), Error);
  EXPECT_THROW(EncryptedIndex(64), Error);
}

TEST(Sse, SingleAndConjunctiveQueriesMatchOracle) {
  for (unsigned bits : {128u, 256u}) {
    DocumentDatabase db = small_db();
    auto [client, edb] = setup(db, bits, seed_of("oracle"));
    std::vector<std::vector<std::string>> queries = {{"a"}, {"b"}, {"c"}, {"d"}, {"zz"},    {"a", "b"},
                                                     {"b", "a"}, {"a", "c"}, {"c", "d"}, {"d", "a"}, {"a", "zz"}};
    for (const auto& q : queries) {
      SearchResult r = search(edb, client.token(q));
      EXPECT_EQ(as_set(r.ids), oracle(db, q)) << q.front();
      EXPECT_EQ(r.ids.size(), as_set(r.ids).size());
      EXPECT_EQ(r.postings, oracle(db, {q.front()}).size());
      EXPECT_EQ(r.cross_tests, q.size() > 1 ? r.postings : 0u);
    }
  }
}

TEST(Sse, SearchCostDependsOnFirstKeywordOnly) {
  DocumentDatabase db;
  for (std::uint64_t i = 0; i < 50; ++i) {
    db[ObjectId::from_index(i)] = {"common"};
    if (i < 3) db[ObjectId::from_index(i)].push_back("rare");
  }
  auto [client, edb] = setup(db, 128, seed_of("cost"));
  EXPECT_EQ(search(edb, client.token({"rare", "common"})).cross_tests, 3u);
  EXPECT_EQ(search(edb, client.token({"common", "rare"})).cross_tests, 50u);
}

TEST(Sse, SetupIsDeterministicInSeed) {
  auto a = setup(small_db(), 128, seed_of("same"));
  auto b = setup(small_db(), 128, seed_of("same"));
  auto c = setup(small_db(), 128, seed_of("other"));
  EXPECT_EQ(a.second.serialize(), b.second.serialize());
  EXPECT_NE(a.second.serialize(), c.second.serialize());
  EXPECT_EQ(a.second.size_bytes(), a.second.serialize().size());
}

TEST(Sse, IndexSerializationRoundTrip) {
  DocumentDatabase db = small_db();
  auto [client, edb] = setup(db, 128, seed_of("ser"));
  EncryptedIndex back = EncryptedIndex::deserialize(ByteView(edb.serialize()));
  EXPECT_EQ(back.tag_count(), edb.tag_count());
  EXPECT_EQ(back.posting_count(), edb.posting_count());
  EXPECT_EQ(back.xset_size(), edb.xset_size());
  EXPECT_EQ(as_set(search(back, client.token({"a", "b"})).ids), oracle(db, {"a", "b"}));
  Bytes bad = edb.serialize();
  bad[0] ^= 1;
  EXPECT_THROW(EncryptedIndex::deserialize(ByteView(bad)), Error);
  Bytes cut = edb.serialize();
  cut.resize(cut.size() - 5);
  EXPECT_THROW(EncryptedIndex::deserialize(ByteView(cut)), Error);
}

TEST(Sse, TokenSerializationRoundTrip) {
  DocumentDatabase db = small_db();
  auto [client, edb] = setup(db, 128, seed_of("tok"));
  Token tk = client.token({"a", "c"});
  Token back = Token::deserialize(ByteView(tk.serialize()));
  EXPECT_EQ(back.stag, tk.stag);
  EXPECT_EQ(back.conjuncts, 2u);
  EXPECT_EQ(as_set(search(edb, back).ids), oracle(db, {"a", "c"}));
}

TEST(Sse, InsertMatchesBatchSetup) {
  DocumentDatabase db = small_db();
  auto [client, edb] = setup(db, 128, seed_of("ins"));
  client.insert(edb, ObjectId::from_index(9), std::vector<std::string>{"a", "d"});
  db[ObjectId::from_index(9)] = {"a", "d"};
  for (const std::vector<std::string>& q : {std::vector<std::string>{"a"}, {"d"}, {"a", "d"}, {"d", "a"}}) {
    EXPECT_EQ(as_set(search(edb, client.token(q)).ids), oracle(db, q));
  }
  EXPECT_EQ(client.keyword_count("a"), 4u);
  EXPECT_EQ(client.object_count(), 6u);
  try {
    client.insert(edb, ObjectId::from_index(9), std::vector<std::string>{"x"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicate);
  }
}

TEST(Sse, EmptyClientBuildsIndexIncrementally) {
  crypto::Drbg rng("keys");
  Keys keys;
  keys.k_i = rng.bytes(16);
  keys.k_d = rng.bytes(32);
  Client client(keys);
  EncryptedIndex edb;
  client.insert(edb, ObjectId::from_index(1), std::vector<std::string>{"p", "q"});
  client.insert(edb, ObjectId::from_index(2), std::vector<std::string>{"q"});
  EXPECT_EQ(search(edb, client.token({"q"})).ids.size(), 2u);
  EXPECT_EQ(search(edb, client.token({"q", "p"})).ids, std::vector<ObjectId>{ObjectId::from_index(1)});
}

TEST(Sse, RangeQueriesMatchPlaintextFilter) {
  crypto::Drbg rng("range");
  for (std::uint32_t log_side : {2u, 4u, 6u}) {
    for (std::uint32_t h : {0u, 1u}) {
      geo::DomainParams d(1u << log_side, h);
      DocumentDatabase db;
      std::map<ObjectId, geo::GridLocation> locs;
      for (std::uint64_t i = 0; i < 150; ++i) {
        geo::GridLocation loc{static_cast<std::uint32_t>(rng.uniform(d.side())),
                              static_cast<std::uint32_t>(rng.uniform(d.side()))};
        locs[ObjectId::from_index(i)] = loc;
        db[ObjectId::from_index(i)] = geo::object_keywords(loc, d);
      }
      auto [client, edb] = setup(db, 128, seed_of("range"));
      for (int t = 0; t < 60; ++t) {
        const std::uint32_t m = d.max_query_side();
        std::uint32_t wx = 1 + static_cast<std::uint32_t>(rng.uniform(m));
        std::uint32_t wy = 1 + static_cast<std::uint32_t>(rng.uniform(m));
        std::uint32_t x = static_cast<std::uint32_t>(rng.uniform(d.side() - wx + 1));
        std::uint32_t y = static_cast<std::uint32_t>(rng.uniform(d.side() - wy + 1));
        geo::SpatialRange r{x, x + wx - 1, y, y + wy - 1};
        RangeQueryResult res = encrypted_spatial_range_query(edb, client, r, d);
        std::set<ObjectId> expected;
        for (const auto& [id, loc] : locs) {
          if (r.contains(loc)) expected.insert(id);
        }
        ASSERT_EQ(res.ids, expected);
        EXPECT_EQ(res.conjunctive_queries, range_queries(r, d).size());
      }
    }
  }
}

TEST(Sse, RootQueriesUseSingleKeywords) {
  geo::DomainParams d(8, 0);
  auto whole = range_queries({0, 7, 0, 7}, d);
  EXPECT_EQ(whole, (std::vector<std::vector<std::string>>{{"x0"}, {"x1"}}));
  auto column = range_queries({2, 3, 0, 7}, d);
  EXPECT_EQ(column, (std::vector<std::vector<std::string>>{{"x01"}}));
  auto aligned = range_queries({2, 3, 4, 5}, d);
  EXPECT_EQ(aligned.size(), 1u);
  EXPECT_EQ(aligned.front().size(), 2u);
}

TEST(Sse, DocumentEncryption) {
  crypto::Drbg rng("doc");
  Bytes key = rng.bytes(32);
  Bytes ct = document_encrypt(key, ByteView(to_bytes("payload")), rng);
  EXPECT_EQ(document_decrypt(key, ct), to_bytes("payload"));
  ct.back() ^= 1;
  try {
    document_decrypt(key, ct);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAuthentication);
  }
}
