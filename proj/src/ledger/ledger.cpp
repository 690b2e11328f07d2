#include "donorchain/ledger/ledger.hpp"

#include "donorchain/common/error.hpp"
#include "donorchain/kernels/validation.hpp"

namespace donorchain::ledger {

ValidationFlag accept_all(const Transaction&) { return ValidationFlag::Valid; }

ValidationFlag mvcc_validate(const WorldState& state, const Transaction& tx,
                             const std::set<std::string, std::less<>>& earlier_writes_in_block) {
  for (const auto& read : tx.rwset.reads) {
    if (earlier_writes_in_block.contains(read.key)) return ValidationFlag::MVCCConflict;
    if (state.version(read.key) != read.version) return ValidationFlag::MVCCConflict;
  }
  return ValidationFlag::Valid;
}

Ledger::Ledger(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  store_ = std::make_unique<BlockStore>(dir / (name + ".blocks"));
  state_ = std::make_unique<WorldState>(dir / (name + ".state.wal"));
}

std::vector<ValidationFlag> Ledger::commit_block(Block block, const TxPrecheck& precheck) {
  const auto height = store_->height();
  if (block.header.number != height) {
    throw Error(Errc::ChainGap, "expected block " + std::to_string(height) + ", got " +
                                    std::to_string(block.header.number));
  }
  if (block.header.prev_hash != store_->tip_hash()) {
    throw Error(Errc::HashMismatch, "prev_hash of block " + std::to_string(height) + " does not match tip");
  }

  auto flags = kernels::precheck_parallel(block.transactions, precheck);

  std::set<std::string, std::less<>> written;
  std::set<std::string, std::less<>> seen_ids;
  std::vector<WorldState::Update> updates;
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    const auto& tx = block.transactions[i];
    const bool duplicate = !seen_ids.insert(tx.tx_id).second || store_->find_tx(tx.tx_id).has_value();
    if (flags[i] == ValidationFlag::Valid && duplicate) flags[i] = ValidationFlag::DuplicateTxId;
    if (flags[i] == ValidationFlag::Valid) flags[i] = mvcc_validate(*state_, tx, written);
    if (flags[i] != ValidationFlag::Valid) continue;
    for (const auto& w : tx.rwset.writes) written.insert(w.key);
    if (!tx.rwset.writes.empty()) {
      updates.push_back({StateVersion{block.header.number, i}, tx.rwset.writes});
    }
  }

  block.metadata.validation_flags = flags;
  store_->append(std::move(block));
  state_->apply(updates);
  return flags;
}

}  // namespace donorchain::ledger
