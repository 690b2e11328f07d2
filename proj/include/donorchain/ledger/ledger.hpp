#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "donorchain/ledger/block_store.hpp"
#include "donorchain/ledger/types.hpp"
#include "donorchain/ledger/world_state.hpp"

namespace donorchain::ledger {

// Signature and endorsement-policy check for one transaction. Returns Valid
// or the flag that disqualifies it. Must be safe to call concurrently.
using TxPrecheck = std::function<ValidationFlag(const Transaction&)>;

// Valid iff every read version equals the committed version and no read key
// was written by an earlier valid transaction of the same block.
ValidationFlag mvcc_validate(const WorldState& state, const Transaction& tx,
                             const std::set<std::string, std::less<>>& earlier_writes_in_block);

// One channel's ledger on one peer: the block log plus the world state derived
// from it. commit_block is the only writer.
class Ledger {
 public:
  Ledger() = default;
  // Persists into `dir` as <name>.blocks and <name>.state.wal.
  Ledger(const std::filesystem::path& dir, const std::string& name);

  BlockStore& store() { return *store_; }
  const BlockStore& store() const { return *store_; }
  WorldState& state() { return *state_; }
  const WorldState& state() const { return *state_; }

  std::uint64_t height() const { return store_->height(); }

  // Validates each transaction in order (precheck, duplicate tx_id, MVCC),
  // stores the block with its flags, then applies the valid writes at version
  // (block, tx_index). Throws ChainGap/HashMismatch before touching anything.
  std::vector<ValidationFlag> commit_block(Block block, const TxPrecheck& precheck);

  std::optional<std::string> get_state(std::string_view key) const { return state_->get(key); }
  std::vector<HistoryEntry> get_history(std::string_view key) const { return store_->history(key); }

 private:
  std::unique_ptr<BlockStore> store_ = std::make_unique<BlockStore>();
  std::unique_ptr<WorldState> state_ = std::make_unique<WorldState>();
};

// Precheck that accepts everything; for ledgers driven without a network.
ValidationFlag accept_all(const Transaction&);

}  // namespace donorchain::ledger
