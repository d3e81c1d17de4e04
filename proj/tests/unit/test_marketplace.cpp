#include <gtest/gtest.h>

#include <set>

#include "geomarket/marketplace.hpp"

using namespace geomarket;
using namespace geomarket::market;

namespace {

MarketConfig small_config(const std::string& seed = "market-test") {
  MarketConfig c;
  c.domain = geo::DomainParams(16, 0);
  c.hve_group_bits = 64;
  c.commitment_modulus_bits = 512;
  c.commitment_capacity = 4;
  c.index_chunk_size = 256;
  c.seed = seed;
  return c;
}

Bytes payload(const std::string& s) { return to_bytes(s); }

std::set<ObjectId> oids(const SearchOutcome& s) {
  std::set<ObjectId> out;
  for (const auto& h : s.hits) out.insert(h.oid);
  return out;
}

}  // namespace

TEST(Marketplace, ActorsAreRegistered) {
  Marketplace m(small_config());
  ledger::Address a = m.add_owner("alice", 10);
  ledger::Address b = m.add_buyer("bob", 10);
  EXPECT_TRUE(m.ledger().is_owner(a));
  EXPECT_FALSE(m.ledger().is_owner(b));
  EXPECT_TRUE(m.ledger().params_digest(a).has_value());
  EXPECT_THROW(m.add_buyer("alice", 1), Error);
  EXPECT_EQ(m.ledger().index_infos().size(), 2u);
  EXPECT_TRUE(m.ledger().conserved());
}

TEST(Marketplace, SseSearchMatchesPlaintextOracle) {
  Marketplace m(small_config());
  m.add_owner("alice", 50);
  m.add_owner("carol", 50);
  m.add_buyer("bob", 50);
  crypto::Drbg rng("sse-oracle");
  std::map<ObjectId, geo::GridLocation> locs;
  for (const char* who : {"alice", "carol"}) {
    std::vector<AdvertiseItem> items;
    for (int i = 0; i < 9; ++i) {
      items.push_back({{static_cast<std::uint32_t>(rng.uniform(16)), static_cast<std::uint32_t>(rng.uniform(16))},
                       payload(std::string(who) + std::to_string(i)), std::nullopt});
    }
    auto ids = m.advertise(Mode::kSse, who, items);
    ASSERT_EQ(ids.size(), items.size());
    for (std::size_t i = 0; i < ids.size(); ++i) locs[ids[i]] = items[i].advertised;
  }
  EXPECT_EQ(m.curator_objects("alice"), 9u);
  for (int t = 0; t < 20; ++t) {
    std::uint32_t x = static_cast<std::uint32_t>(rng.uniform(12)), y = static_cast<std::uint32_t>(rng.uniform(12));
    geo::SpatialRange r{x, x + static_cast<std::uint32_t>(rng.uniform(5)), y, y + static_cast<std::uint32_t>(rng.uniform(5))};
    SearchOutcome s = m.search_sse("bob", r);
    std::set<ObjectId> expected;
    for (const auto& [id, loc] : locs) {
      if (r.contains(loc)) expected.insert(id);
    }
    EXPECT_EQ(oids(s), expected);
    EXPECT_TRUE(std::is_sorted(s.hits.begin(), s.hits.end(),
                               [](const SearchHit& a, const SearchHit& b) { return a.oid < b.oid; }));
    EXPECT_EQ(s.tokens, sse::range_queries(r, m.config().domain).size());
    EXPECT_GT(s.fee_paid, 0);
  }
  EXPECT_TRUE(m.ledger().conserved());
}

TEST(Marketplace, HveSearchMatchesPlaintextOracle) {
  Marketplace m(small_config());
  m.add_owner("alice", 50);
  m.add_buyer("bob", 50);
  crypto::Drbg rng("hve-oracle");
  std::map<ObjectId, geo::GridLocation> locs;
  std::vector<AdvertiseItem> items;
  for (int i = 0; i < 10; ++i) {
    items.push_back({{static_cast<std::uint32_t>(rng.uniform(16)), static_cast<std::uint32_t>(rng.uniform(16))},
                     payload("p" + std::to_string(i)), std::nullopt});
  }
  auto ids = m.advertise(Mode::kHve, "alice", items);
  for (std::size_t i = 0; i < ids.size(); ++i) locs[ids[i]] = items[i].advertised;
  EXPECT_EQ(m.flat_file_size(), 10u);
  EXPECT_EQ(m.curator_objects("alice"), 0u);
  for (geo::SpatialRange r : {geo::SpatialRange{0, 7, 0, 7}, geo::SpatialRange{8, 15, 0, 7},
                              geo::SpatialRange{4, 7, 12, 15}, geo::SpatialRange{0, 15, 0, 15}}) {
    SearchOutcome s = m.search_hve("bob", r);
    std::set<ObjectId> expected;
    for (const auto& [id, loc] : locs) {
      if (r.contains(loc)) expected.insert(id);
    }
    EXPECT_EQ(oids(s), expected);
    EXPECT_EQ(s.tokens, 1u);
  }
  EXPECT_THROW(m.search_hve("bob", {1, 2, 1, 2}), Error);
}

TEST(Marketplace, HonestPurchaseCompletes) {
  Marketplace m(small_config());
  ledger::Address alice = m.add_owner("alice", 50);
  m.add_buyer("bob", 50);
  ObjectId oid = m.sse_advertise("alice", {3, 4}, ByteView(payload("the data")));
  SearchOutcome s = m.search_sse("bob", {2, 3, 4, 5});
  ASSERT_EQ(s.hits.size(), 1u);
  EXPECT_EQ(s.hits[0].owner, alice);
  EXPECT_TRUE(m.verify_accountability(oid));
  const ledger::Wei before = m.ledger().balance(alice);
  PurchaseOutcome p = m.purchase("bob", s.hits[0].oid, 1.0);
  EXPECT_EQ(p.state, ledger::OfferState::kCompleted);
  EXPECT_FALSE(p.disputed);
  EXPECT_EQ(p.payload, payload("the data"));
  ledger::Wei fees = 0;
  for (const auto& r : p.receipts) {
    if (r.op != ledger::Op::kMakeOffer) fees += r.fee;
  }
  EXPECT_EQ(m.ledger().balance(alice), before + m.config().gas.usd_to_wei(1.0) - fees);
  EXPECT_TRUE(m.ledger().conserved());
  EXPECT_THROW(m.purchase("bob", s.hits[0].oid, 1.0), Error);
}

TEST(Marketplace, FraudulentGeoTagIsDisputed) {
  Marketplace m(small_config());
  m.add_owner("mallory", 50);
  ledger::Address bob = m.add_buyer("bob", 50);
  AdvertiseItem item{{3, 4}, payload("fake"), geo::GridLocation{12, 1}};
  ObjectId oid = m.advertise(Mode::kHve, "mallory", std::span<const AdvertiseItem>(&item, 1)).front();
  const ledger::Wei before = m.ledger().balance(bob);
  PurchaseOutcome p = m.purchase("bob", oid, 2.0);
  EXPECT_TRUE(p.disputed);
  EXPECT_EQ(p.state, ledger::OfferState::kReversed);
  ledger::Wei fees = 0;
  for (const auto& r : p.receipts) {
    if (r.op != ledger::Op::kDeliverKey) fees += r.fee;
  }
  EXPECT_EQ(m.ledger().balance(bob), before - fees);
  EXPECT_EQ(m.ledger().forfeited(), m.ledger().min_deposit_wei());
  EXPECT_TRUE(m.ledger().conserved());
}

TEST(Marketplace, BatchesShareCommitments) {
  Marketplace m(small_config());
  m.add_owner("alice", 50);
  std::vector<AdvertiseItem> items(10, AdvertiseItem{{1, 1}, payload("x"), std::nullopt});
  auto ids = m.advertise(Mode::kSse, "alice", items);
  EXPECT_EQ(ids.size(), 10u);
  std::uint32_t commits = 0;
  for (std::uint64_t id = 1; m.ledger().commitment(id); ++id) ++commits;
  EXPECT_EQ(commits, 3u);
  for (const ObjectId& id : ids) EXPECT_TRUE(m.verify_accountability(id));
  EXPECT_FALSE(m.verify_accountability(ObjectId::from_index(1)));
}

TEST(Marketplace, CuratorObjectLimit) {
  MarketConfig c = small_config();
  c.tc_object_limit = 5;
  Marketplace m(c);
  m.add_owner("alice", 50);
  std::vector<AdvertiseItem> items(4, AdvertiseItem{{1, 1}, payload("x"), std::nullopt});
  m.advertise(Mode::kSse, "alice", items);
  try {
    m.advertise(Mode::kSse, "alice", std::span<const AdvertiseItem>(items.data(), 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPolicy);
  }
  EXPECT_EQ(m.curator_objects("alice"), 4u);
  m.advertise(Mode::kHve, "alice", items);
  EXPECT_EQ(m.flat_file_size(), 4u);
}

TEST(Marketplace, DefaultCuratorLimitIsOneThousand) { EXPECT_EQ(MarketConfig{}.tc_object_limit, 1000u); }

TEST(Marketplace, DecliningAfterSearchCostsOnlyTheTokenFee) {
  Marketplace m(small_config());
  m.add_owner("alice", 50);
  ledger::Address bob = m.add_buyer("bob", 50);
  m.sse_advertise("alice", {3, 4}, ByteView(payload("d")));
  const ledger::Wei before = m.ledger().balance(bob);
  SearchOutcome s = m.search_sse("bob", {0, 7, 0, 7});
  EXPECT_EQ(s.hits.size(), 1u);
  ledger::Wei gas_fee = m.ledger().log().back().fee;
  EXPECT_EQ(m.ledger().balance(bob), before - s.fee_paid - gas_fee);
  EXPECT_EQ(m.ledger().total_escrow(), 0);
}

TEST(Marketplace, DepositsRefundAfterLock) {
  Marketplace m(small_config());
  m.add_owner("alice", 50);
  m.sse_advertise("alice", {3, 4}, ByteView(payload("d")));
  EXPECT_EQ(m.refund_deposits("alice"), 0u);
  m.ledger().advance_blocks(m.config().policy.dispute_window_blocks);
  EXPECT_EQ(m.refund_deposits("alice"), 1u);
  EXPECT_EQ(m.ledger().total_deposits(), 0);
}

TEST(Marketplace, RejectsOutOfDomainAdvertisement) {
  Marketplace m(small_config());
  m.add_owner("alice", 50);
  EXPECT_THROW(m.sse_advertise("alice", {16, 0}, ByteView(payload("d"))), Error);
  EXPECT_THROW(m.sse_advertise("nobody", {1, 0}, ByteView(payload("d"))), Error);
  EXPECT_EQ(m.curator_objects("alice"), 0u);
}

TEST(Marketplace, DirectoryStore) {
  MarketConfig c = small_config();
  c.store_dir = std::filesystem::temp_directory_path() / "geomarket-market-store-test";
  std::filesystem::remove_all(*c.store_dir);
  Marketplace m(c);
  m.add_owner("alice", 50);
  m.add_buyer("bob", 50);
  ObjectId oid = m.sse_advertise("alice", {3, 4}, ByteView(payload("on disk")));
  EXPECT_EQ(m.search_sse("bob", {0, 7, 0, 7}).hits.size(), 1u);
  EXPECT_EQ(m.purchase("bob", oid, 0.5).payload, payload("on disk"));
  EXPECT_GT(m.store().key_count(), 1u);
  std::filesystem::remove_all(*c.store_dir);
}
