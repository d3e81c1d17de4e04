#include "geomarket/ledger.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace geomarket::ledger {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

Bytes payload_of(std::initializer_list<ByteView> parts) {
  Bytes out;
  for (ByteView p : parts) put_blob(out, p);
  return out;
}

ByteView view(const std::string& s) { return ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()); }

Bytes u64_bytes(std::uint64_t v) {
  Bytes b;
  put_u64(b, v);
  return b;
}

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kRegisterOwner: return "register_owner";
    case Op::kSetCommitmentParams: return "set_commitment_params";
    case Op::kPublishIndexInfo: return "publish_index_info";
    case Op::kSubmitCommitment: return "submit_commitment";
    case Op::kMakeOffer: return "make_offer";
    case Op::kDeliverKey: return "deliver_key";
    case Op::kWithdrawPayment: return "withdraw_payment";
    case Op::kDispute: return "dispute";
    case Op::kRefundDeposit: return "refund_deposit";
    case Op::kTransfer: return "transfer";
  }
  return "unknown";
}

std::string_view offer_state_name(OfferState s) {
  switch (s) {
    case OfferState::kOpen: return "open";
    case OfferState::kKeyDelivered: return "key-delivered";
    case OfferState::kCompleted: return "completed";
    case OfferState::kReversed: return "reversed";
  }
  return "unknown";
}

GasSchedule GasSchedule::defaults() {
  GasSchedule s;
  s.gas = {
      {Op::kRegisterOwner, 42150},
      {Op::kSetCommitmentParams, 327590},
      {Op::kPublishIndexInfo, 177160},
      {Op::kSubmitCommitment, 83092},
      {Op::kMakeOffer, 297478},
      {Op::kWithdrawPayment, 40649},
      // Not measured in the reference deployment; estimates.
      {Op::kDeliverKey, 64000},
      {Op::kDispute, 120000},
      {Op::kRefundDeposit, 30000},
      {Op::kTransfer, 21000},
  };
  return s;
}

std::uint64_t GasSchedule::cost(Op op) const {
  auto it = gas.find(op);
  if (it == gas.end() || it->second == 0) {
    fail(ErrorCode::kInvalidArgument, "gas schedule has no positive cost for " + std::string(op_name(op)));
  }
  return it->second;
}

double GasSchedule::usd(std::uint64_t gas_used) const {
  return static_cast<double>(gas_used) * static_cast<double>(gas_price_wei) / static_cast<double>(kWeiPerEther) *
         ether_usd;
}

Wei GasSchedule::usd_to_wei(double usd) const {
  return static_cast<Wei>(std::ceil(usd / ether_usd * static_cast<double>(kWeiPerEther)));
}

Address address_of(ByteView public_key) {
  crypto::Digest d = crypto::sha256(public_key);
  return "0x" + to_hex(ByteView(d.data() + 12, 20));
}

Ledger::Ledger(GasSchedule schedule, Policy policy) : schedule_(std::move(schedule)), policy_(policy) {
  for (Op op : {Op::kRegisterOwner, Op::kSetCommitmentParams, Op::kPublishIndexInfo, Op::kSubmitCommitment,
                Op::kMakeOffer, Op::kDeliverKey, Op::kWithdrawPayment, Op::kDispute, Op::kRefundDeposit,
                Op::kTransfer}) {
    schedule_.cost(op);
  }
  if (schedule_.gas_price_wei < 0 || !(schedule_.ether_usd > 0)) {
    fail(ErrorCode::kInvalidArgument, "gas price must be non-negative and the ether rate positive");
  }
  if (policy_.blocks_per_day == 0) fail(ErrorCode::kInvalidArgument, "blocks_per_day must be positive");
}

Address Ledger::create_account(ByteView public_key, Wei initial_balance) {
  if (initial_balance < 0) fail(ErrorCode::kInvalidArgument, "initial balance must be non-negative");
  Address a = address_of(public_key);
  std::unique_lock lock(mu_);
  if (balances_.count(a)) fail(ErrorCode::kDuplicate, "account " + a + " already exists");
  balances_[a] = initial_balance;
  supply_ += initial_balance;
  return a;
}

Receipt Ledger::execute(const Address& sender, Op op, ByteView payload, const std::function<void(Receipt&)>& body) {
  std::unique_lock lock(mu_);
  Receipt r;
  r.op = op;
  r.block = block_;
  LogEntry entry;
  entry.seq = log_.size();
  entry.block = block_;
  entry.sender = sender;
  entry.op = op;
  entry.payload_hash = to_hex(crypto::sha256(payload));

  auto it = balances_.find(sender);
  const std::uint64_t gas = schedule_.cost(op);
  const Wei fee = static_cast<Wei>(gas) * schedule_.gas_price_wei;
  if (it == balances_.end()) {
    r.status = Status::kRejected;
    r.error = ErrorCode::kNotFound;
    r.message = "unknown account " + sender;
  } else if (it->second < fee) {
    r.status = Status::kRejected;
    r.error = ErrorCode::kInsufficientFunds;
    r.message = "balance does not cover the gas fee";
  } else {
    it->second -= fee;
    fees_ += fee;
    r.gas_used = gas;
    r.fee = fee;
    try {
      body(r);
      r.status = Status::kSuccess;
    } catch (const Error& e) {
      r.status = Status::kReverted;
      r.error = e.code();
      r.message = e.what();
    }
  }
  entry.status = r.status;
  entry.gas = r.gas_used;
  entry.fee = r.fee;
  log_.push_back(std::move(entry));
  return r;
}

Receipt Ledger::register_owner(const Address& owner) {
  return execute(owner, Op::kRegisterOwner, view(owner), [&](Receipt&) {
    if (owners_.count(owner)) fail(ErrorCode::kDuplicate, "owner already registered");
    owners_[owner] = true;
  });
}

Receipt Ledger::set_commitment_params(const Address& owner, const vc::Params& params) {
  Bytes ser = params.serialize();
  return execute(owner, Op::kSetCommitmentParams, ByteView(ser), [&](Receipt&) {
    if (!owners_.count(owner)) fail(ErrorCode::kInvalidState, "sender is not a registered owner");
    params_.insert_or_assign(owner, params);
  });
}

Receipt Ledger::publish_index_info(const Address& publisher, const std::string& kind, ByteView handle) {
  Bytes payload = payload_of({view(kind), handle});
  return execute(publisher, Op::kPublishIndexInfo, ByteView(payload), [&](Receipt&) {
    if (kind != "sse" && kind != "hve") fail(ErrorCode::kInvalidArgument, "index kind must be sse or hve");
    if (handle.empty()) fail(ErrorCode::kInvalidArgument, "empty index handle");
    index_infos_.push_back(IndexInfo{publisher, kind, Bytes(handle.begin(), handle.end())});
  });
}

Receipt Ledger::submit_commitment(const Address& owner, ByteView cc, std::uint32_t object_count, Wei deposit) {
  Bytes payload = payload_of({cc, ByteView(u64_bytes(object_count)), ByteView(u64_bytes(static_cast<std::uint64_t>(deposit)))});
  return execute(owner, Op::kSubmitCommitment, ByteView(payload), [&](Receipt& r) {
    if (!owners_.count(owner)) fail(ErrorCode::kInvalidState, "sender is not a registered owner");
    if (!params_.count(owner)) fail(ErrorCode::kInvalidState, "owner has not published commitment parameters");
    if (cc.size() != params_.at(owner).element_bytes()) fail(ErrorCode::kFormat, "commitment has the wrong length");
    if (object_count == 0 || object_count > policy_.max_objects_per_commitment) {
      fail(ErrorCode::kPolicy, "a commitment covers 1 to " + std::to_string(policy_.max_objects_per_commitment) +
                                   " objects");
    }
    if (deposit < min_deposit_wei()) fail(ErrorCode::kPolicy, "deposit below the per-commitment minimum");
    const std::uint64_t today = block_ / policy_.blocks_per_day;
    std::uint32_t& count = daily_counts_[{owner, today}];
    if (count >= policy_.max_commitments_per_day) fail(ErrorCode::kPolicy, "daily commitment cap reached");
    Wei& bal = balances_.at(owner);
    if (bal < deposit) fail(ErrorCode::kInsufficientFunds, "balance does not cover the deposit");
    bal -= deposit;
    ++count;
    CommitmentRecord rec;
    rec.id = next_commitment_++;
    rec.owner = owner;
    rec.cc.assign(cc.begin(), cc.end());
    rec.object_count = object_count;
    rec.block = block_;
    rec.deposit = deposit;
    commitments_[rec.id] = rec;
    r.id = rec.id;
  });
}

Receipt Ledger::refund_deposit(const Address& owner, std::uint64_t commitment_id) {
  Bytes payload = u64_bytes(commitment_id);
  return execute(owner, Op::kRefundDeposit, ByteView(payload), [&](Receipt& r) {
    auto it = commitments_.find(commitment_id);
    if (it == commitments_.end()) fail(ErrorCode::kNotFound, "unknown commitment");
    CommitmentRecord& rec = it->second;
    if (rec.owner != owner) fail(ErrorCode::kAuthentication, "only the committing owner can reclaim the deposit");
    if (rec.deposit_state != CommitmentRecord::DepositState::kHeld) fail(ErrorCode::kInvalidState, "deposit already settled");
    if (block_ < rec.block + policy_.dispute_window_blocks) fail(ErrorCode::kPolicy, "deposit is still locked");
    balances_.at(owner) += rec.deposit;
    rec.deposit_state = CommitmentRecord::DepositState::kRefunded;
    r.id = rec.id;
  });
}

Receipt Ledger::make_offer(const Address& buyer, const Address& owner, const ObjectId& oid, Wei amount) {
  Bytes payload = payload_of({view(owner), ByteView(oid.bytes), ByteView(u64_bytes(static_cast<std::uint64_t>(amount)))});
  return execute(buyer, Op::kMakeOffer, ByteView(payload), [&](Receipt& r) {
    if (!owners_.count(owner)) fail(ErrorCode::kInvalidState, "offer addressed to an unregistered owner");
    if (owner == buyer) fail(ErrorCode::kInvalidArgument, "owners cannot buy their own objects");
    if (amount <= 0) fail(ErrorCode::kInvalidArgument, "offer amount must be positive");
    for (const auto& [id, o] : offers_) {
      if (o.buyer == buyer && o.oid == oid && o.state != OfferState::kReversed) {
        fail(ErrorCode::kDuplicate, "buyer already has an offer on this object");
      }
    }
    Wei& bal = balances_.at(buyer);
    if (bal < amount) fail(ErrorCode::kInsufficientFunds, "balance does not cover the offer");
    bal -= amount;
    Offer o;
    o.id = next_offer_++;
    o.buyer = buyer;
    o.owner = owner;
    o.oid = oid;
    o.amount = amount;
    o.opened_block = block_;
    offers_[o.id] = o;
    r.id = o.id;
  });
}

Receipt Ledger::deliver_key(const Address& owner, std::uint64_t offer_id, ByteView envelope) {
  Bytes payload = payload_of({ByteView(u64_bytes(offer_id)), envelope});
  return execute(owner, Op::kDeliverKey, ByteView(payload), [&](Receipt& r) {
    auto it = offers_.find(offer_id);
    if (it == offers_.end()) fail(ErrorCode::kNotFound, "unknown offer");
    Offer& o = it->second;
    if (o.owner != owner) fail(ErrorCode::kAuthentication, "only the offer's owner can deliver the key");
    if (o.state != OfferState::kOpen) fail(ErrorCode::kInvalidState, "offer is not open");
    if (envelope.empty()) fail(ErrorCode::kInvalidArgument, "empty key envelope");
    o.envelope.assign(envelope.begin(), envelope.end());
    o.state = OfferState::kKeyDelivered;
    o.delivered_block = block_;
    r.id = o.id;
  });
}

Receipt Ledger::withdraw_payment(const Address& owner, std::uint64_t offer_id) {
  Bytes payload = u64_bytes(offer_id);
  return execute(owner, Op::kWithdrawPayment, ByteView(payload), [&](Receipt& r) {
    auto it = offers_.find(offer_id);
    if (it == offers_.end()) fail(ErrorCode::kNotFound, "unknown offer");
    Offer& o = it->second;
    if (o.owner != owner) fail(ErrorCode::kAuthentication, "only the offer's owner can withdraw");
    if (o.state != OfferState::kKeyDelivered) fail(ErrorCode::kInvalidState, "key has not been delivered");
    if (block_ < o.delivered_block + policy_.dispute_window_blocks) {
      fail(ErrorCode::kPolicy, "dispute window has not elapsed");
    }
    balances_.at(owner) += o.amount;
    o.state = OfferState::kCompleted;
    r.id = o.id;
  });
}

Receipt Ledger::dispute(const Address& buyer, std::uint64_t offer_id, const DisputeClaim& claim) {
  Bytes payload = payload_of({ByteView(u64_bytes(offer_id)), ByteView(u64_bytes(claim.commitment_id)),
                              ByteView(u64_bytes(claim.index)), ByteView(u64_bytes(claim.message.coord_word)),
                              ByteView(claim.message.oid.bytes), ByteView(claim.proof)});
  return execute(buyer, Op::kDispute, ByteView(payload), [&](Receipt& r) {
    auto it = offers_.find(offer_id);
    if (it == offers_.end()) fail(ErrorCode::kNotFound, "unknown offer");
    Offer& o = it->second;
    if (o.buyer != buyer) fail(ErrorCode::kAuthentication, "only the offer's buyer can dispute");
    if (o.state != OfferState::kKeyDelivered) fail(ErrorCode::kInvalidState, "offer is not awaiting settlement");
    if (block_ >= o.delivered_block + policy_.dispute_window_blocks) fail(ErrorCode::kPolicy, "dispute window closed");
    auto cit = commitments_.find(claim.commitment_id);
    if (cit == commitments_.end()) fail(ErrorCode::kNotFound, "unknown commitment");
    CommitmentRecord& rec = cit->second;
    if (rec.owner != o.owner) fail(ErrorCode::kInvalidArgument, "commitment belongs to another owner");
    if (claim.index >= rec.object_count) fail(ErrorCode::kOutOfDomain, "index outside the committed batch");
    if (!(claim.message.oid == o.oid)) fail(ErrorCode::kInvalidArgument, "opening is for a different object");
    auto pit = params_.find(o.owner);
    if (pit == params_.end() || !vc::verify(pit->second, rec.cc, claim.message, claim.index, claim.proof)) {
      fail(ErrorCode::kIntegrity, "opening proof does not verify against the on-chain commitment");
    }
    if (claim.message.location() == claim.observed) {
      fail(ErrorCode::kPolicy, "delivered object matches the committed geo-tag");
    }
    balances_.at(buyer) += o.amount;
    o.state = OfferState::kReversed;
    if (rec.deposit_state == CommitmentRecord::DepositState::kHeld) {
      forfeited_ += rec.deposit;
      rec.deposit_state = CommitmentRecord::DepositState::kForfeited;
    }
    r.id = o.id;
  });
}

Receipt Ledger::transfer(const Address& from, const Address& to, Wei amount) {
  Bytes payload = payload_of({view(to), ByteView(u64_bytes(static_cast<std::uint64_t>(amount)))});
  return execute(from, Op::kTransfer, ByteView(payload), [&](Receipt&) {
    if (amount < 0) fail(ErrorCode::kInvalidArgument, "negative transfer");
    auto dst = balances_.find(to);
    if (dst == balances_.end()) fail(ErrorCode::kNotFound, "unknown recipient");
    Wei& bal = balances_.at(from);
    if (bal < amount) fail(ErrorCode::kInsufficientFunds, "balance does not cover the transfer");
    bal -= amount;
    dst->second += amount;
  });
}

void Ledger::advance_blocks(std::uint64_t n) {
  std::unique_lock lock(mu_);
  block_ += n;
}

std::uint64_t Ledger::block() const {
  std::shared_lock lock(mu_);
  return block_;
}

std::uint64_t Ledger::day() const {
  std::shared_lock lock(mu_);
  return block_ / policy_.blocks_per_day;
}

Wei Ledger::balance(const Address& a) const {
  std::shared_lock lock(mu_);
  auto it = balances_.find(a);
  if (it == balances_.end()) fail(ErrorCode::kNotFound, "unknown account " + a);
  return it->second;
}

bool Ledger::is_owner(const Address& a) const {
  std::shared_lock lock(mu_);
  return owners_.count(a) != 0;
}

std::optional<crypto::Digest> Ledger::params_digest(const Address& owner) const {
  std::shared_lock lock(mu_);
  auto it = params_.find(owner);
  if (it == params_.end()) return std::nullopt;
  return it->second.digest();
}

std::optional<vc::Params> Ledger::params(const Address& owner) const {
  std::shared_lock lock(mu_);
  auto it = params_.find(owner);
  if (it == params_.end()) return std::nullopt;
  return it->second;
}

std::optional<CommitmentRecord> Ledger::commitment(std::uint64_t id) const {
  std::shared_lock lock(mu_);
  auto it = commitments_.find(id);
  if (it == commitments_.end()) return std::nullopt;
  return it->second;
}

std::optional<Offer> Ledger::offer(std::uint64_t id) const {
  std::shared_lock lock(mu_);
  auto it = offers_.find(id);
  if (it == offers_.end()) return std::nullopt;
  return it->second;
}

std::vector<IndexInfo> Ledger::index_infos() const {
  std::shared_lock lock(mu_);
  return index_infos_;
}

std::uint32_t Ledger::commitments_today(const Address& owner) const {
  std::shared_lock lock(mu_);
  auto it = daily_counts_.find({owner, block_ / policy_.blocks_per_day});
  return it == daily_counts_.end() ? 0 : it->second;
}

Wei Ledger::total_supply() const {
  std::shared_lock lock(mu_);
  return supply_;
}

Wei Ledger::total_balances() const {
  std::shared_lock lock(mu_);
  Wei sum = 0;
  for (const auto& [a, b] : balances_) sum += b;
  return sum;
}

Wei Ledger::total_escrow() const {
  std::shared_lock lock(mu_);
  Wei sum = 0;
  for (const auto& [id, o] : offers_) {
    if (o.state == OfferState::kOpen || o.state == OfferState::kKeyDelivered) sum += o.amount;
  }
  return sum;
}

Wei Ledger::total_deposits() const {
  std::shared_lock lock(mu_);
  Wei sum = 0;
  for (const auto& [id, c] : commitments_) {
    if (c.deposit_state == CommitmentRecord::DepositState::kHeld) sum += c.deposit;
  }
  return sum;
}

Wei Ledger::forfeited() const {
  std::shared_lock lock(mu_);
  return forfeited_;
}

Wei Ledger::fees_collected() const {
  std::shared_lock lock(mu_);
  return fees_;
}

bool Ledger::conserved() const {
  std::shared_lock lock(mu_);
  Wei sum = forfeited_ + fees_;
  for (const auto& [a, b] : balances_) sum += b;
  for (const auto& [id, o] : offers_) {
    if (o.state == OfferState::kOpen || o.state == OfferState::kKeyDelivered) sum += o.amount;
  }
  for (const auto& [id, c] : commitments_) {
    if (c.deposit_state == CommitmentRecord::DepositState::kHeld) sum += c.deposit;
  }
  return sum == supply_;
}

std::vector<LogEntry> Ledger::log() const {
  std::shared_lock lock(mu_);
  return log_;
}

std::string Ledger::export_jsonl() const {
  std::shared_lock lock(mu_);
  std::ostringstream out;
  for (const LogEntry& e : log_) {
    nlohmann::json j = {
        {"seq", e.seq},
        {"block", e.block},
        {"sender", e.sender},
        {"op", op_name(e.op)},
        {"status", e.status == Status::kSuccess ? "success" : e.status == Status::kReverted ? "reverted" : "rejected"},
        {"gas", e.gas},
        {"fee_wei", e.fee},
        {"payload_sha256", e.payload_hash},
    };
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace geomarket::ledger
