#pragma once

// Deterministic single-node ledger with gas metering and the marketplace
// contract: owner registry, commitment records with deposits, offers with
// escrow, key delivery, withdrawals and disputes.
//
// Amounts are integer wei. Every transaction is charged gas * gas_price from
// the sender into a fee sink, unless the sender cannot cover the fee (then it
// is rejected outright and nothing changes).

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "geomarket/commitment.hpp"
#include "geomarket/common.hpp"
#include "geomarket/crypto.hpp"

namespace geomarket::ledger {

using Wei = std::int64_t;
using Address = std::string;  // "0x" + 40 hex digits

inline constexpr Wei kWeiPerEther = 1'000'000'000'000'000'000;
inline constexpr Wei kWeiPerGwei = 1'000'000'000;

enum class Op : std::uint8_t {
  kRegisterOwner,
  kSetCommitmentParams,
  kPublishIndexInfo,
  kSubmitCommitment,
  kMakeOffer,
  kDeliverKey,
  kWithdrawPayment,
  kDispute,
  kRefundDeposit,
  kTransfer,
};

std::string_view op_name(Op op);

struct GasSchedule {
  std::map<Op, std::uint64_t> gas;
  Wei gas_price_wei = 2'240'000'000;  // 2.24 gwei
  double ether_usd = 133.0;

  static GasSchedule defaults();
  std::uint64_t cost(Op op) const;
  double usd(std::uint64_t gas_used) const;
  Wei usd_to_wei(double usd) const;  // rounded up
};

struct Policy {
  double min_deposit_usd = 1.0;
  std::uint32_t max_commitments_per_day = 50;
  std::uint32_t max_objects_per_commitment = 20;
  std::uint64_t blocks_per_day = 5760;  // 15 s blocks
  /// Blocks after key delivery during which the buyer may dispute; also the
  /// deposit lock period.
  std::uint64_t dispute_window_blocks = 5760;
};

enum class Status : std::uint8_t {
  kSuccess,
  kReverted,  // contract check failed; gas charged, state unchanged
  kRejected,  // sender unknown or cannot pay gas; nothing charged
};

struct Receipt {
  Status status = Status::kRejected;
  Op op = Op::kTransfer;
  std::uint64_t gas_used = 0;
  Wei fee = 0;
  std::uint64_t block = 0;
  std::uint64_t id = 0;  // commitment or offer id where applicable
  std::optional<ErrorCode> error;
  std::string message;

  bool ok() const noexcept { return status == Status::kSuccess; }
};

enum class OfferState : std::uint8_t { kOpen, kKeyDelivered, kCompleted, kReversed };
std::string_view offer_state_name(OfferState s);

struct CommitmentRecord {
  std::uint64_t id = 0;
  Address owner;
  Bytes cc;
  std::uint32_t object_count = 0;
  std::uint64_t block = 0;
  Wei deposit = 0;
  enum class DepositState : std::uint8_t { kHeld, kRefunded, kForfeited } deposit_state = DepositState::kHeld;
};

struct Offer {
  std::uint64_t id = 0;
  Address buyer;
  Address owner;
  ObjectId oid;
  Wei amount = 0;
  OfferState state = OfferState::kOpen;
  std::uint64_t opened_block = 0;
  std::uint64_t delivered_block = 0;
  Bytes envelope;  // key sealed to the buyer
};

struct IndexInfo {
  Address publisher;
  std::string kind;  // "sse" or "hve"
  Bytes handle;
};

struct LogEntry {
  std::uint64_t seq = 0;
  std::uint64_t block = 0;
  Address sender;
  Op op = Op::kTransfer;
  Status status = Status::kRejected;
  std::uint64_t gas = 0;
  Wei fee = 0;
  std::string payload_hash;  // hex SHA-256 of the call payload
};

/// Evidence for a dispute: the opening of the buyer's object in the owner's
/// commitment, plus the location the buyer observed for the delivered data.
struct DisputeClaim {
  std::uint64_t commitment_id = 0;
  std::uint32_t index = 0;
  vc::CommitMessage message;
  Bytes proof;
  geo::GridLocation observed;
};

Address address_of(ByteView public_key);

class Ledger {
 public:
  explicit Ledger(GasSchedule schedule = GasSchedule::defaults(), Policy policy = Policy{});

  const GasSchedule& schedule() const noexcept { return schedule_; }
  const Policy& policy() const noexcept { return policy_; }
  Wei min_deposit_wei() const { return schedule_.usd_to_wei(policy_.min_deposit_usd); }

  /// Genesis funding; the only way value enters the ledger.
  Address create_account(ByteView public_key, Wei initial_balance);

  Receipt register_owner(const Address& owner);
  Receipt set_commitment_params(const Address& owner, const vc::Params& params);
  Receipt publish_index_info(const Address& publisher, const std::string& kind, ByteView handle);
  Receipt submit_commitment(const Address& owner, ByteView cc, std::uint32_t object_count, Wei deposit);
  Receipt refund_deposit(const Address& owner, std::uint64_t commitment_id);
  Receipt make_offer(const Address& buyer, const Address& owner, const ObjectId& oid, Wei amount);
  Receipt deliver_key(const Address& owner, std::uint64_t offer_id, ByteView envelope);
  Receipt withdraw_payment(const Address& owner, std::uint64_t offer_id);
  Receipt dispute(const Address& buyer, std::uint64_t offer_id, const DisputeClaim& claim);
  Receipt transfer(const Address& from, const Address& to, Wei amount);

  void advance_blocks(std::uint64_t n);
  std::uint64_t block() const;
  std::uint64_t day() const;

  Wei balance(const Address& a) const;
  bool is_owner(const Address& a) const;
  std::optional<crypto::Digest> params_digest(const Address& owner) const;
  std::optional<vc::Params> params(const Address& owner) const;
  std::optional<CommitmentRecord> commitment(std::uint64_t id) const;
  std::optional<Offer> offer(std::uint64_t id) const;
  std::vector<IndexInfo> index_infos() const;
  std::uint32_t commitments_today(const Address& owner) const;

  Wei total_supply() const;
  Wei total_balances() const;
  Wei total_escrow() const;
  Wei total_deposits() const;
  Wei forfeited() const;
  Wei fees_collected() const;
  /// Balances + escrow + held deposits + forfeited + fees == supply.
  bool conserved() const;

  std::vector<LogEntry> log() const;
  /// One JSON object per line.
  std::string export_jsonl() const;

 private:
  Receipt execute(const Address& sender, Op op, ByteView payload, const std::function<void(Receipt&)>& body);

  GasSchedule schedule_;
  Policy policy_;
  mutable std::shared_mutex mu_;
  std::uint64_t block_ = 0;
  std::map<Address, Wei> balances_;
  std::map<Address, bool> owners_;
  std::map<Address, vc::Params> params_;
  std::map<std::uint64_t, CommitmentRecord> commitments_;
  std::map<std::pair<Address, std::uint64_t>, std::uint32_t> daily_counts_;
  std::map<std::uint64_t, Offer> offers_;
  std::vector<IndexInfo> index_infos_;
  std::vector<LogEntry> log_;
  Wei supply_ = 0;
  Wei forfeited_ = 0;
  Wei fees_ = 0;
  std::uint64_t next_commitment_ = 1;
  std::uint64_t next_offer_ = 1;
};

}  // namespace geomarket::ledger
