#pragma once

#include <span>
#include <filesystem>
#include <fstream>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "donorchain/ledger/types.hpp"

namespace donorchain::ledger {

struct TxLocation {
  std::uint64_t block = 0;
  std::uint32_t index = 0;
  ValidationFlag flag = ValidationFlag::NotValidated;
};

struct HistoryEntry {
  std::string tx_id;
  std::uint64_t block = 0;
  std::optional<std::string> value;  // nullopt = delete

  bool operator==(const HistoryEntry&) const = default;
};

// Hash-chained, append-only block log. With a backing file every block is
// written as a u32 big-endian length followed by the canonical block
// encoding, and flushed before append() returns.
class BlockStore {
 public:
  BlockStore() = default;
  // Loads whatever the file holds without validating it; verify_chain() is
  // the integrity check.
  explicit BlockStore(const std::filesystem::path& file);

  BlockStore(const BlockStore&) = delete;
  BlockStore& operator=(const BlockStore&) = delete;

  // Throws ChainGap if block.header.number != height(), HashMismatch if
  // prev_hash is not the hash of the current tip header (zeros for genesis).
  void append(Block block);

  std::uint64_t height() const;
  Block block(std::uint64_t number) const;
  crypto::Digest tip_hash() const;

  std::optional<std::uint64_t> verify_chain() const;

  std::optional<TxLocation> find_tx(const std::string& tx_id) const;
  std::vector<HistoryEntry> history(std::string_view key) const;

  template <typename F>
  void for_each_block(F&& fn) const {
    std::shared_lock lock(mu_);
    for (const auto& b : blocks_) fn(b);
  }

  static std::vector<Block> read_file(const std::filesystem::path& file);
  static void write_file(const std::filesystem::path& file, std::span<const Block> blocks);

 private:
  void index_locked(const Block& block);

  mutable std::shared_mutex mu_;
  std::vector<Block> blocks_;
  std::unordered_map<std::string, TxLocation> tx_index_;
  std::optional<std::ofstream> file_;
};

}  // namespace donorchain::ledger
