#include "geomarket/marketplace.hpp"

#include <algorithm>
#include <cstring>
#include <set>

namespace geomarket::market {

namespace {

// Key envelope: object key plus the owner's opening of the object's geo-tag.
struct Envelope {
  Bytes object_key;
  std::uint64_t commitment_id = 0;
  std::uint32_t index = 0;
  vc::CommitMessage message;
  Bytes proof;
};

Bytes encode_envelope(const Envelope& e) {
  Bytes out;
  put_blob(out, e.object_key);
  put_u64(out, e.commitment_id);
  put_u32(out, e.index);
  put_u64(out, e.message.coord_word);
  out.insert(out.end(), e.message.oid.bytes.begin(), e.message.oid.bytes.end());
  put_blob(out, e.proof);
  return out;
}

Envelope decode_envelope(ByteView bytes) {
  Reader in(bytes);
  Envelope e;
  e.object_key = in.blob();
  e.commitment_id = in.u64();
  e.index = in.u32();
  e.message.coord_word = in.u64();
  ByteView oid = in.take(16);
  std::memcpy(e.message.oid.bytes.data(), oid.data(), 16);
  e.proof = in.blob();
  if (!in.done()) throw Error(ErrorCode::kFormat, "malformed key envelope");
  return e;
}

// Bulk record stored under an OID: owner address, then the encrypted object.
Bytes encode_record(const ledger::Address& owner, ByteView ciphertext) {
  Bytes out;
  put_blob(out, to_bytes(owner));
  put_blob(out, ciphertext);
  return out;
}

std::pair<ledger::Address, Bytes> decode_record(ByteView bytes) {
  Reader in(bytes);
  Bytes owner = in.blob();
  Bytes ct = in.blob();
  if (!in.done()) throw Error(ErrorCode::kFormat, "malformed object record");
  return {std::string(owner.begin(), owner.end()), std::move(ct)};
}

void require(const ledger::Receipt& r, std::string_view what) {
  if (!r.ok()) {
    throw Error(r.error.value_or(ErrorCode::kInvalidState), std::string(what) + " failed: " + r.message);
  }
}

ObjectId random_oid(crypto::Drbg& rng) {
  ObjectId id;
  rng.fill(id.bytes);
  return id;
}

}  // namespace

Marketplace::Marketplace(MarketConfig config)
    : config_(std::move(config)), rng_(std::string_view(config_.seed)) {
  crypto::ensure_initialized();
  ledger_ = std::make_unique<ledger::Ledger>(config_.gas, config_.policy);
  store_ = config_.store_dir ? std::make_unique<store::BulkStore>(*config_.store_dir)
                             : std::make_unique<store::BulkStore>();

  curator_.actor = make_actor("curator", 10.0);
  sse::Keys keys;
  keys.security_bits = config_.sse_security_bits;
  keys.k_i = rng_.bytes(config_.sse_security_bits / 8);
  keys.k_d = rng_.bytes(crypto::kAeadKeyBytes);
  curator_.client = std::make_unique<sse::Client>(std::move(keys));
  curator_.edb = sse::EncryptedIndex(config_.sse_security_bits);
  curator_.iid = rng_.bytes(16);
  require(ledger_->publish_index_info(curator_.actor.address, "sse", curator_.iid), "publishing the index id");
  curator_.dirty = true;

  authority_.actor = make_actor("authority", 10.0);
  crypto::Drbg group_rng = rng_.fork("hve-group");
  auto group = pairing::CompositeGroup::generate(config_.hve_group_bits, group_rng);
  authority_.keys = hve::setup(group, config_.domain.hve_value_bound(), rng_);
  authority_.flat_file_id = rng_.bytes(16);
  require(ledger_->publish_index_info(authority_.actor.address, "hve", authority_.flat_file_id),
          "publishing the flat file id");
  authority_.dirty = true;
}

Marketplace::Actor Marketplace::make_actor(const std::string& name, double funds_usd) {
  Actor a;
  a.name = name;
  a.keys = crypto::box_keypair(rng_);
  a.address = ledger_->create_account(ByteView(a.keys.public_key), config_.gas.usd_to_wei(funds_usd));
  return a;
}

ledger::Address Marketplace::add_owner(const std::string& name, double funds_usd) {
  std::lock_guard lock(mu_);
  if (owners_.count(name) || buyers_.count(name)) throw Error(ErrorCode::kDuplicate, "actor " + name + " exists");
  OwnerState st;
  st.actor = make_actor(name, funds_usd);
  require(ledger_->register_owner(st.actor.address), "owner registration");
  crypto::Drbg vc_rng = rng_.fork("vc/" + name);
  st.params = vc::Params::keygen(config_.commitment_modulus_bits, config_.commitment_capacity, vc_rng);
  require(ledger_->set_commitment_params(st.actor.address, st.params), "publishing commitment parameters");
  ledger::Address addr = st.actor.address;
  owners_.emplace(name, std::move(st));
  return addr;
}

ledger::Address Marketplace::add_buyer(const std::string& name, double funds_usd) {
  std::lock_guard lock(mu_);
  if (owners_.count(name) || buyers_.count(name)) throw Error(ErrorCode::kDuplicate, "actor " + name + " exists");
  Actor a = make_actor(name, funds_usd);
  ledger::Address addr = a.address;
  buyers_.emplace(name, std::move(a));
  return addr;
}

Marketplace::OwnerState& Marketplace::owner(const std::string& name) {
  auto it = owners_.find(name);
  if (it == owners_.end()) throw Error(ErrorCode::kNotFound, "unknown owner " + name);
  return it->second;
}

const Marketplace::Actor& Marketplace::buyer(const std::string& name) const {
  auto it = buyers_.find(name);
  if (it == buyers_.end()) throw Error(ErrorCode::kNotFound, "unknown buyer " + name);
  return it->second;
}

void Marketplace::curator_admit(const ledger::Address& owner, std::size_t count) const {
  auto it = curator_.per_owner.find(owner);
  std::size_t have = it == curator_.per_owner.end() ? 0 : it->second;
  if (have + count > config_.tc_object_limit) {
    throw Error(ErrorCode::kPolicy, "curator refuses more than " + std::to_string(config_.tc_object_limit) +
                                        " objects per owner");
  }
}

void Marketplace::curator_ingest(const ledger::Address& owner, const ObjectId& oid, geo::GridLocation loc) {
  curator_admit(owner, 1);
  std::vector<std::string> words = geo::object_keywords(loc, config_.domain);
  curator_.client->insert(curator_.edb, oid, words);
  ++curator_.per_owner[owner];
  curator_.dirty = true;
}

std::vector<ObjectId> Marketplace::advertise(Mode mode, const std::string& owner_name,
                                             std::span<const AdvertiseItem> items) {
  std::lock_guard lock(mu_);
  OwnerState& st = owner(owner_name);
  for (const AdvertiseItem& it : items) {
    geo::validate(it.advertised, config_.domain);
    if (it.actual) geo::validate(*it.actual, config_.domain);
  }
  if (mode == Mode::kSse) curator_admit(st.actor.address, items.size());

  std::vector<ObjectId> oids;
  const std::size_t cap = config_.commitment_capacity;
  for (std::size_t start = 0; start < items.size(); start += cap) {
    const std::size_t n = std::min(cap, items.size() - start);
    std::vector<ObjectId> batch_ids;
    std::vector<vc::CommitMessage> messages;
    for (std::size_t k = 0; k < n; ++k) {
      ObjectId oid = random_oid(rng_);
      batch_ids.push_back(oid);
      messages.push_back(vc::encode_location_message(items[start + k].advertised, oid));
    }
    // Step 1: commitment on the ledger, with deposit.
    vc::Committed committed = vc::commit(st.params, messages, rng_);
    ledger::Receipt r = ledger_->submit_commitment(st.actor.address, committed.cc, static_cast<std::uint32_t>(n),
                                                   ledger_->min_deposit_wei());
    require(r, "commitment submission");
    st.commitments.push_back(r.id);
    st.batches.push_back(std::move(committed.aux));
    const std::size_t batch = st.batches.size() - 1;

    for (std::size_t k = 0; k < n; ++k) {
      const AdvertiseItem& item = items[start + k];
      const ObjectId& oid = batch_ids[k];
      OwnedObject obj;
      obj.mode = mode;
      obj.advertised = item.advertised;
      obj.actual = item.actual.value_or(item.advertised);
      obj.object_key = rng_.bytes(crypto::kAeadKeyBytes);
      obj.commitment_id = r.id;
      obj.index = static_cast<std::uint32_t>(k);
      obj.batch = batch;

      // Step 3: encrypted object in bulk storage under its OID.
      Bytes ct = crypto::aead_encrypt(obj.object_key, item.payload, rng_);
      store_->put(ByteView(oid.bytes), encode_record(st.actor.address, ct));

      if (mode == Mode::kSse) {
        // Steps 2 and 4: plaintext location to the curator, who indexes it.
        curator_ingest(st.actor.address, oid, item.advertised);
      } else {
        // Owner-side encryption under the authority's public key.
        authority_.flat_file.push_back(
            hve::encrypt_object(authority_.keys.pk, oid, item.advertised, config_.domain, rng_));
        authority_.dirty = true;
      }
      st.objects.emplace(oid, std::move(obj));
      object_owner_[oid] = owner_name;
      oids.push_back(oid);
    }
  }
  return oids;
}

ObjectId Marketplace::sse_advertise(const std::string& owner_name, geo::GridLocation loc, ByteView payload) {
  AdvertiseItem item{loc, Bytes(payload.begin(), payload.end()), std::nullopt};
  return advertise(Mode::kSse, owner_name, std::span<const AdvertiseItem>(&item, 1)).front();
}

ObjectId Marketplace::hve_advertise(const std::string& owner_name, geo::GridLocation loc, ByteView payload) {
  AdvertiseItem item{loc, Bytes(payload.begin(), payload.end()), std::nullopt};
  return advertise(Mode::kHve, owner_name, std::span<const AdvertiseItem>(&item, 1)).front();
}

void Marketplace::publish_index() {
  if (!curator_.dirty) return;
  Bytes ser = curator_.edb.serialize();
  store_->put_chunked(ByteView(curator_.iid), ByteView(ser), config_.index_chunk_size);
  Bytes back = store_->get_chunked(ByteView(curator_.iid));
  curator_.published = sse::EncryptedIndex::deserialize(ByteView(back));
  curator_.dirty = false;
}

void Marketplace::publish_flat_file() {
  if (!authority_.dirty) return;
  Bytes ser = hve::serialize_flat_file(authority_.keys.pk, authority_.flat_file);
  store_->put_chunked(ByteView(authority_.flat_file_id), ByteView(ser), config_.index_chunk_size);
  Bytes back = store_->get_chunked(ByteView(authority_.flat_file_id));
  authority_.published = hve::parse_flat_file(authority_.keys.pk, ByteView(back));
  authority_.dirty = false;
}

void Marketplace::charge_token_fee(const Actor& b, const ledger::Address& to, std::size_t tokens,
                                   SearchOutcome& out) {
  const ledger::Wei fee = config_.gas.usd_to_wei(config_.token_fee_usd) * static_cast<ledger::Wei>(tokens);
  if (fee == 0) return;
  require(ledger_->transfer(b.address, to, fee), "token fee payment");
  out.fee_paid += fee;
}

std::vector<SearchHit> Marketplace::resolve_hits(const std::vector<ObjectId>& ids) const {
  std::set<ObjectId> unique(ids.begin(), ids.end());
  std::vector<SearchHit> hits;
  for (const ObjectId& oid : unique) {
    Bytes rec = store_->get(ByteView(oid.bytes));
    hits.push_back(SearchHit{oid, decode_record(ByteView(rec)).first});
  }
  return hits;
}

SearchOutcome Marketplace::search_sse(const std::string& buyer_name, const geo::SpatialRange& range) {
  std::lock_guard lock(mu_);
  const Actor& b = buyer(buyer_name);
  geo::validate(range, config_.domain);
  publish_index();

  // Step 5: plaintext predicate to the curator, which returns the tokens.
  std::vector<sse::Token> tokens;
  for (const auto& q : sse::range_queries(range, config_.domain)) tokens.push_back(curator_.client->token(q));
  SearchOutcome out;
  out.tokens = tokens.size();
  charge_token_fee(b, curator_.actor.address, tokens.size(), out);

  // Steps 6-7: search over the index fetched from bulk storage.
  std::vector<ObjectId> ids;
  for (const sse::Token& tk : tokens) {
    out.token_bytes += tk.serialize().size();
    sse::SearchResult r = sse::search(*curator_.published, tk);
    out.cross_tests += r.cross_tests;
    ids.insert(ids.end(), r.ids.begin(), r.ids.end());
  }
  out.hits = resolve_hits(ids);
  return out;
}

hve::Token Marketplace::authority_token(const geo::HveLevelValue& query) {
  return hve::make_token(authority_.keys.sk, query.value, query.level, rng_);
}

SearchOutcome Marketplace::search_hve(const std::string& buyer_name, const geo::SpatialRange& range) {
  std::lock_guard lock(mu_);
  const Actor& b = buyer(buyer_name);
  // Encoding happens on the buyer side; rejects non-square or unaligned
  // ranges before any token is requested.
  geo::HveLevelValue query = geo::hve_query_value(range, config_.domain);
  publish_flat_file();

  SearchOutcome out;
  hve::Token tk = authority_token(query);
  out.tokens = 1;
  out.token_bytes = hve::serialize(*authority_.keys.pk.group, tk).size();
  charge_token_fee(b, authority_.actor.address, 1, out);

  hve::ScanResult r = hve::linear_scan(authority_.keys.pk, authority_.published, tk, config_.hve_workers);
  out.pairings = r.pairings;
  out.hits = resolve_hits(r.ids);
  return out;
}

PurchaseOutcome Marketplace::purchase(const std::string& buyer_name, const ObjectId& oid, double price_usd) {
  std::lock_guard lock(mu_);
  const Actor& b = buyer(buyer_name);
  auto owner_it = object_owner_.find(oid);
  if (owner_it == object_owner_.end()) throw Error(ErrorCode::kNotFound, "unknown object " + oid.hex());
  OwnerState& st = owner(owner_it->second);
  const OwnedObject& obj = st.objects.at(oid);

  PurchaseOutcome out;
  // Step 8: offer with escrow.
  ledger::Receipt offer = ledger_->make_offer(b.address, st.actor.address, oid, config_.gas.usd_to_wei(price_usd));
  out.receipts.push_back(offer);
  require(offer, "offer");
  out.offer_id = offer.id;

  // Owner delivers the object key and the opening of its geo-tag.
  Envelope env;
  env.object_key = obj.object_key;
  env.commitment_id = obj.commitment_id;
  env.index = obj.index;
  env.message = vc::encode_location_message(obj.advertised, oid);
  env.proof = vc::open(st.params, st.batches[obj.batch], env.message, obj.index);
  Bytes sealed = crypto::seal(ByteView(encode_envelope(env)), b.keys.public_key);
  ledger::Receipt delivered = ledger_->deliver_key(st.actor.address, offer.id, sealed);
  out.receipts.push_back(delivered);
  require(delivered, "key delivery");

  // Step 9: buyer opens the envelope, downloads and decrypts the object.
  std::optional<ledger::Offer> on_chain = ledger_->offer(offer.id);
  Envelope got = decode_envelope(ByteView(crypto::unseal(ByteView(on_chain->envelope), b.keys)));
  auto [record_owner, ct] = decode_record(ByteView(store_->get(ByteView(oid.bytes))));
  out.payload = crypto::aead_decrypt(got.object_key, ct);

  // The buyer inspects the data; its true origin is injected here.
  if (obj.actual != got.message.location()) {
    ledger::DisputeClaim claim{got.commitment_id, got.index, got.message, got.proof, obj.actual};
    ledger::Receipt d = ledger_->dispute(b.address, offer.id, claim);
    out.receipts.push_back(d);
    out.disputed = true;
    require(d, "dispute");
  } else {
    ledger_->advance_blocks(config_.policy.dispute_window_blocks);
    ledger::Receipt w = ledger_->withdraw_payment(st.actor.address, offer.id);
    out.receipts.push_back(w);
    require(w, "withdrawal");
  }
  out.state = ledger_->offer(offer.id)->state;
  return out;
}

bool Marketplace::verify_accountability(const ObjectId& oid) const {
  std::lock_guard lock(mu_);
  auto owner_it = object_owner_.find(oid);
  if (owner_it == object_owner_.end()) return false;
  const OwnerState& st = owners_.at(owner_it->second);
  const OwnedObject& obj = st.objects.at(oid);
  std::optional<ledger::CommitmentRecord> rec = ledger_->commitment(obj.commitment_id);
  std::optional<vc::Params> pp = ledger_->params(st.actor.address);
  if (!rec || !pp || rec->owner != st.actor.address) return false;
  vc::CommitMessage m = vc::encode_location_message(obj.advertised, oid);
  Bytes proof = vc::open(st.params, st.batches[obj.batch], m, obj.index);
  return vc::verify(*pp, rec->cc, m, obj.index, proof);
}

std::size_t Marketplace::refund_deposits(const std::string& owner_name) {
  std::lock_guard lock(mu_);
  OwnerState& st = owner(owner_name);
  std::size_t refunded = 0;
  for (std::uint64_t cid : st.commitments) {
    std::optional<ledger::CommitmentRecord> rec = ledger_->commitment(cid);
    if (!rec || rec->deposit_state != ledger::CommitmentRecord::DepositState::kHeld) continue;
    if (ledger_->block() < rec->block + config_.policy.dispute_window_blocks) continue;
    if (ledger_->refund_deposit(st.actor.address, cid).ok()) ++refunded;
  }
  return refunded;
}

std::size_t Marketplace::curator_objects(const std::string& owner_name) const {
  std::lock_guard lock(mu_);
  auto it = owners_.find(owner_name);
  if (it == owners_.end()) return 0;
  auto c = curator_.per_owner.find(it->second.actor.address);
  return c == curator_.per_owner.end() ? 0 : c->second;
}

std::size_t Marketplace::flat_file_size() const {
  std::lock_guard lock(mu_);
  return authority_.flat_file.size();
}

}  // namespace geomarket::market
