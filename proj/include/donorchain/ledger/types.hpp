#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "donorchain/common/bytes.hpp"
#include "donorchain/crypto/crypto.hpp"
#include "donorchain/identity/identity.hpp"

namespace donorchain::ledger {

// (block, tx-index) of the write that produced a value. (0,0) is reserved
// for values installed by the genesis block.
struct StateVersion {
  std::uint64_t block = 0;
  std::uint64_t tx = 0;

  auto operator<=>(const StateVersion&) const = default;
};

struct VersionedValue {
  std::string key;
  std::string value;
  StateVersion version;
  bool deleted = false;

  bool operator==(const VersionedValue&) const = default;
};

// `version` is what the simulation observed: the version of the latest write
// to the key (a tombstone included), or nullopt if the key was never written.
struct KVRead {
  std::string key;
  std::optional<StateVersion> version;

  bool operator==(const KVRead&) const = default;
};

// value == nullopt marks a delete.
struct KVWrite {
  std::string key;
  std::optional<std::string> value;

  bool is_delete() const { return !value.has_value(); }
  bool operator==(const KVWrite&) const = default;
};

struct ReadWriteSet {
  std::vector<KVRead> reads;
  std::vector<KVWrite> writes;

  // Sorts both lists by key. Duplicate keys are a caller bug.
  void normalize();
  void encode(ByteWriter& w) const;
  static ReadWriteSet decode(ByteReader& r);
  Bytes canonical_bytes() const;

  bool operator==(const ReadWriteSet&) const = default;
};

struct ChaincodeEvent {
  std::string name;
  std::string payload;

  bool operator==(const ChaincodeEvent&) const = default;
};

struct Endorsement {
  std::string org_id;
  identity::Signature signature;

  bool operator==(const Endorsement&) const = default;
};

enum class ValidationFlag : std::uint8_t {
  Valid = 0,
  MVCCConflict = 1,
  PolicyFailure = 2,
  BadSignature = 3,
  DuplicateTxId = 4,
  NotValidated = 255,
};

std::string_view to_string(ValidationFlag flag);
ValidationFlag parse_validation_flag(std::string_view s);

// The fields a client commits to when it asks peers to simulate.
struct Proposal {
  std::string tx_id;
  std::string channel;
  std::string chaincode_id;
  std::string method;
  std::vector<std::string> args;
  std::string submitter;
  std::int64_t timestamp_ms = 0;

  crypto::Digest digest() const;
};

// Bytes every endorser signs: proposal digest, rwset, then the optional
// chaincode event.
Bytes endorsed_payload(const crypto::Digest& proposal_digest, const ReadWriteSet& rwset,
                       const std::optional<ChaincodeEvent>& event);

struct Transaction {
  std::string tx_id;
  std::string channel;
  std::string chaincode_id;
  std::string method;
  std::vector<std::string> args;
  ReadWriteSet rwset;
  std::optional<ChaincodeEvent> event;
  std::vector<Endorsement> endorsements;
  identity::Signature client_signature;
  std::string submitter;
  std::int64_t timestamp_ms = 0;  // client clock, informational

  Proposal proposal() const;
  Bytes endorsed_payload() const;
  // Everything except client_signature; this is what the client signs.
  Bytes signed_bytes() const;

  void encode(ByteWriter& w) const;
  static Transaction decode(ByteReader& r);
  Bytes to_bytes() const;
  static Transaction from_bytes(ByteView data);

  bool operator==(const Transaction&) const = default;
};

inline constexpr std::size_t kHeaderEncodingSize = 72;

struct BlockHeader {
  std::uint64_t number = 0;
  crypto::Digest prev_hash{};
  crypto::Digest data_hash{};

  // number (8 bytes, big-endian) || prev_hash || data_hash
  std::array<std::uint8_t, kHeaderEncodingSize> encode() const;

  bool operator==(const BlockHeader&) const = default;
};

crypto::Digest compute_block_hash(const BlockHeader& header);
crypto::Digest compute_data_hash(std::span<const Transaction> transactions);

// Not covered by the header hash: the orderer's cut time and the commit-time
// validation flags.
struct BlockMetadata {
  std::int64_t timestamp_ms = 0;
  std::vector<ValidationFlag> validation_flags;

  bool operator==(const BlockMetadata&) const = default;
};

struct Block {
  BlockHeader header;
  std::vector<Transaction> transactions;
  BlockMetadata metadata;

  static Block assemble(std::uint64_t number, const crypto::Digest& prev_hash,
                        std::vector<Transaction> transactions, std::int64_t timestamp_ms);

  void encode(ByteWriter& w) const;
  static Block decode(ByteReader& r);
  Bytes to_bytes() const;
  static Block from_bytes(ByteView data);

  bool operator==(const Block&) const = default;
};

}  // namespace donorchain::ledger
