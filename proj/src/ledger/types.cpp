#include "donorchain/ledger/types.hpp"

#include <algorithm>

#include "donorchain/common/error.hpp"

namespace donorchain::ledger {

namespace {

void encode_signature(ByteWriter& w, const identity::Signature& sig) {
  w.str(sig.signer).bytes(sig.bytes);
}

identity::Signature decode_signature(ByteReader& r) {
  identity::Signature sig;
  sig.signer = r.str();
  sig.bytes = r.bytes();
  return sig;
}

void encode_args(ByteWriter& w, const std::vector<std::string>& args) {
  w.u32(static_cast<std::uint32_t>(args.size()));
  for (const auto& a : args) w.str(a);
}

std::vector<std::string> decode_args(ByteReader& r) {
  auto n = r.u32();
  std::vector<std::string> args;
  args.reserve(std::min<std::uint32_t>(n, 1024));
  for (std::uint32_t i = 0; i < n; ++i) args.push_back(r.str());
  return args;
}

void encode_event(ByteWriter& w, const std::optional<ChaincodeEvent>& event) {
  w.boolean(event.has_value());
  if (event) w.str(event->name).str(event->payload);
}

std::optional<ChaincodeEvent> decode_event(ByteReader& r) {
  if (!r.boolean()) return std::nullopt;
  ChaincodeEvent ev;
  ev.name = r.str();
  ev.payload = r.str();
  return ev;
}

void encode_proposal_fields(ByteWriter& w, const Proposal& p) {
  w.str(p.tx_id).str(p.channel).str(p.chaincode_id).str(p.method);
  encode_args(w, p.args);
  w.str(p.submitter).u64(static_cast<std::uint64_t>(p.timestamp_ms));
}

}  // namespace

std::string_view to_string(ValidationFlag flag) {
  switch (flag) {
    case ValidationFlag::Valid: return "Valid";
    case ValidationFlag::MVCCConflict: return "MVCCConflict";
    case ValidationFlag::PolicyFailure: return "PolicyFailure";
    case ValidationFlag::BadSignature: return "BadSignature";
    case ValidationFlag::DuplicateTxId: return "DuplicateTxId";
    case ValidationFlag::NotValidated: return "NotValidated";
  }
  return "?";
}

ValidationFlag parse_validation_flag(std::string_view s) {
  for (auto f : {ValidationFlag::Valid, ValidationFlag::MVCCConflict, ValidationFlag::PolicyFailure,
                 ValidationFlag::BadSignature, ValidationFlag::DuplicateTxId, ValidationFlag::NotValidated}) {
    if (to_string(f) == s) return f;
  }
  throw Error(Errc::Decode, "unknown validation flag '" + std::string(s) + "'");
}

void ReadWriteSet::normalize() {
  std::sort(reads.begin(), reads.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  std::sort(writes.begin(), writes.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
}

void ReadWriteSet::encode(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(reads.size()));
  for (const auto& r : reads) {
    w.str(r.key).boolean(r.version.has_value());
    if (r.version) w.u64(r.version->block).u64(r.version->tx);
  }
  w.u32(static_cast<std::uint32_t>(writes.size()));
  for (const auto& wr : writes) {
    w.str(wr.key).boolean(wr.is_delete());
    if (wr.value) w.str(*wr.value);
  }
}

ReadWriteSet ReadWriteSet::decode(ByteReader& r) {
  ReadWriteSet rw;
  auto nreads = r.u32();
  for (std::uint32_t i = 0; i < nreads; ++i) {
    KVRead read;
    read.key = r.str();
    if (r.boolean()) {
      StateVersion v;
      v.block = r.u64();
      v.tx = r.u64();
      read.version = v;
    }
    rw.reads.push_back(std::move(read));
  }
  auto nwrites = r.u32();
  for (std::uint32_t i = 0; i < nwrites; ++i) {
    KVWrite write;
    write.key = r.str();
    if (!r.boolean()) write.value = r.str();
    rw.writes.push_back(std::move(write));
  }
  return rw;
}

Bytes ReadWriteSet::canonical_bytes() const {
  ReadWriteSet copy = *this;
  copy.normalize();
  ByteWriter w;
  copy.encode(w);
  return w.take();
}

crypto::Digest Proposal::digest() const {
  ByteWriter w;
  encode_proposal_fields(w, *this);
  return crypto::sha256(w.view());
}

Bytes endorsed_payload(const crypto::Digest& proposal_digest, const ReadWriteSet& rwset,
                       const std::optional<ChaincodeEvent>& event) {
  ByteWriter w;
  w.raw(proposal_digest);
  w.raw(rwset.canonical_bytes());
  encode_event(w, event);
  return w.take();
}

Proposal Transaction::proposal() const {
  return Proposal{tx_id, channel, chaincode_id, method, args, submitter, timestamp_ms};
}

Bytes Transaction::endorsed_payload() const {
  return ledger::endorsed_payload(proposal().digest(), rwset, event);
}

Bytes Transaction::signed_bytes() const {
  ByteWriter w;
  encode_proposal_fields(w, proposal());
  rwset.encode(w);
  encode_event(w, event);
  w.u32(static_cast<std::uint32_t>(endorsements.size()));
  for (const auto& e : endorsements) {
    w.str(e.org_id);
    encode_signature(w, e.signature);
  }
  return w.take();
}

void Transaction::encode(ByteWriter& w) const {
  w.raw(signed_bytes());
  encode_signature(w, client_signature);
}

Transaction Transaction::decode(ByteReader& r) {
  Transaction tx;
  tx.tx_id = r.str();
  tx.channel = r.str();
  tx.chaincode_id = r.str();
  tx.method = r.str();
  tx.args = decode_args(r);
  tx.submitter = r.str();
  tx.timestamp_ms = static_cast<std::int64_t>(r.u64());
  tx.rwset = ReadWriteSet::decode(r);
  tx.event = decode_event(r);
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    Endorsement e;
    e.org_id = r.str();
    e.signature = decode_signature(r);
    tx.endorsements.push_back(std::move(e));
  }
  tx.client_signature = decode_signature(r);
  return tx;
}

Bytes Transaction::to_bytes() const {
  ByteWriter w;
  encode(w);
  return w.take();
}

Transaction Transaction::from_bytes(ByteView data) {
  ByteReader r(data);
  auto tx = decode(r);
  r.expect_done();
  return tx;
}

std::array<std::uint8_t, kHeaderEncodingSize> BlockHeader::encode() const {
  std::array<std::uint8_t, kHeaderEncodingSize> out{};
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(number >> (56 - 8 * i));
  std::copy(prev_hash.begin(), prev_hash.end(), out.begin() + 8);
  std::copy(data_hash.begin(), data_hash.end(), out.begin() + 40);
  return out;
}

crypto::Digest compute_block_hash(const BlockHeader& header) {
  auto bytes = header.encode();
  return crypto::sha256(bytes);
}

crypto::Digest compute_data_hash(std::span<const Transaction> transactions) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(transactions.size()));
  for (const auto& tx : transactions) w.bytes(tx.to_bytes());
  return crypto::sha256(w.view());
}

Block Block::assemble(std::uint64_t number, const crypto::Digest& prev_hash,
                      std::vector<Transaction> transactions, std::int64_t timestamp_ms) {
  Block b;
  b.header.number = number;
  b.header.prev_hash = prev_hash;
  b.header.data_hash = compute_data_hash(transactions);
  b.transactions = std::move(transactions);
  b.metadata.timestamp_ms = timestamp_ms;
  return b;
}

void Block::encode(ByteWriter& w) const {
  w.raw(header.encode());
  w.u32(static_cast<std::uint32_t>(transactions.size()));
  for (const auto& tx : transactions) w.bytes(tx.to_bytes());
  w.u64(static_cast<std::uint64_t>(metadata.timestamp_ms));
  w.u32(static_cast<std::uint32_t>(metadata.validation_flags.size()));
  for (auto f : metadata.validation_flags) w.u8(static_cast<std::uint8_t>(f));
}

Block Block::decode(ByteReader& r) {
  Block b;
  auto hdr = r.raw(kHeaderEncodingSize);
  for (int i = 0; i < 8; ++i) b.header.number = (b.header.number << 8) | hdr[i];
  std::copy(hdr.begin() + 8, hdr.begin() + 40, b.header.prev_hash.begin());
  std::copy(hdr.begin() + 40, hdr.end(), b.header.data_hash.begin());
  auto ntx = r.u32();
  for (std::uint32_t i = 0; i < ntx; ++i) {
    auto raw = r.bytes();
    b.transactions.push_back(Transaction::from_bytes(raw));
  }
  b.metadata.timestamp_ms = static_cast<std::int64_t>(r.u64());
  auto nflags = r.u32();
  for (std::uint32_t i = 0; i < nflags; ++i) b.metadata.validation_flags.push_back(static_cast<ValidationFlag>(r.u8()));
  return b;
}

Bytes Block::to_bytes() const {
  ByteWriter w;
  encode(w);
  return w.take();
}

Block Block::from_bytes(ByteView data) {
  ByteReader r(data);
  auto b = decode(r);
  r.expect_done();
  return b;
}

}  // namespace donorchain::ledger
