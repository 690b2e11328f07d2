#pragma once

#include <string>
#include <vector>

#include "donorchain/ledger/ledger.hpp"

namespace fixtures {

using namespace donorchain::ledger;

inline Transaction make_tx(std::string id, std::vector<KVRead> reads, std::vector<KVWrite> writes,
                           std::vector<std::string> args = {}) {
  Transaction tx;
  tx.tx_id = std::move(id);
  tx.channel = "test";
  tx.chaincode_id = "kv";
  tx.method = "put";
  tx.args = std::move(args);
  tx.rwset.reads = std::move(reads);
  tx.rwset.writes = std::move(writes);
  tx.rwset.normalize();
  tx.submitter = "client";
  tx.timestamp_ms = 1;
  return tx;
}

inline KVWrite put(std::string key, std::string value) { return KVWrite{std::move(key), std::move(value)}; }
inline KVWrite del(std::string key) { return KVWrite{std::move(key), std::nullopt}; }
inline KVRead read(std::string key, std::optional<StateVersion> v) { return KVRead{std::move(key), v}; }

// Commits a block of transactions on top of the ledger's tip.
inline std::vector<ValidationFlag> commit(Ledger& ledger, std::vector<Transaction> txs, std::int64_t ts = 0) {
  auto block = Block::assemble(ledger.height(), ledger.store().tip_hash(), std::move(txs), ts);
  return ledger.commit_block(std::move(block), accept_all);
}

}  // namespace fixtures
