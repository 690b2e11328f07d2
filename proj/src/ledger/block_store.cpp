#include "donorchain/ledger/block_store.hpp"

#include <mutex>

#include "donorchain/common/error.hpp"
#include "donorchain/kernels/validation.hpp"

namespace donorchain::ledger {

namespace {

void write_record(std::ostream& out, const Block& block) {
  auto bytes = block.to_bytes();
  ByteWriter len;
  len.u32(static_cast<std::uint32_t>(bytes.size()));
  out.write(reinterpret_cast<const char*>(len.view().data()), 4);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

std::vector<Block> BlockStore::read_file(const std::filesystem::path& file) {
  std::vector<Block> blocks;
  std::ifstream in(file, std::ios::binary);
  if (!in) return blocks;
  while (true) {
    std::uint8_t len_bytes[4];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 4)) break;
    std::uint32_t len = (std::uint32_t{len_bytes[0]} << 24) | (std::uint32_t{len_bytes[1]} << 16) |
                        (std::uint32_t{len_bytes[2]} << 8) | std::uint32_t{len_bytes[3]};
    Bytes record(len);
    if (!in.read(reinterpret_cast<char*>(record.data()), len)) {
      throw Error(Errc::Decode, "truncated block record in " + file.string());
    }
    blocks.push_back(Block::from_bytes(record));
  }
  return blocks;
}

void BlockStore::write_file(const std::filesystem::path& file, std::span<const Block> blocks) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + file.string());
  for (const auto& b : blocks) write_record(out, b);
  out.flush();
  if (!out) throw Error(Errc::Io, "write failed for " + file.string());
}

BlockStore::BlockStore(const std::filesystem::path& file) {
  for (auto& b : read_file(file)) {
    index_locked(b);
    blocks_.push_back(std::move(b));
  }
  file_.emplace(file, std::ios::binary | std::ios::app);
  if (!*file_) throw Error(Errc::Io, "cannot open block file " + file.string());
}

void BlockStore::index_locked(const Block& block) {
  for (std::uint32_t i = 0; i < block.transactions.size(); ++i) {
    auto flag = i < block.metadata.validation_flags.size() ? block.metadata.validation_flags[i]
                                                           : ValidationFlag::NotValidated;
    // First occurrence wins; later duplicates are flagged DuplicateTxId.
    tx_index_.try_emplace(block.transactions[i].tx_id, TxLocation{block.header.number, i, flag});
  }
}

void BlockStore::append(Block block) {
  std::unique_lock lock(mu_);
  const auto height = static_cast<std::uint64_t>(blocks_.size());
  if (block.header.number != height) {
    throw Error(Errc::ChainGap, "expected block " + std::to_string(height) + ", got " +
                                    std::to_string(block.header.number));
  }
  const auto expected_prev = blocks_.empty() ? crypto::kZeroDigest : compute_block_hash(blocks_.back().header);
  if (block.header.prev_hash != expected_prev) {
    throw Error(Errc::HashMismatch, "prev_hash of block " + std::to_string(height) + " does not match tip");
  }
  if (file_) {
    write_record(*file_, block);
    file_->flush();
    if (!*file_) throw Error(Errc::Io, "block file write failed");
  }
  index_locked(block);
  blocks_.push_back(std::move(block));
}

std::uint64_t BlockStore::height() const {
  std::shared_lock lock(mu_);
  return blocks_.size();
}

Block BlockStore::block(std::uint64_t number) const {
  std::shared_lock lock(mu_);
  if (number >= blocks_.size()) throw Error(Errc::NotFound, "block " + std::to_string(number) + " not stored");
  return blocks_[number];
}

crypto::Digest BlockStore::tip_hash() const {
  std::shared_lock lock(mu_);
  return blocks_.empty() ? crypto::kZeroDigest : compute_block_hash(blocks_.back().header);
}

std::optional<std::uint64_t> BlockStore::verify_chain() const {
  std::shared_lock lock(mu_);
  auto digests = kernels::block_digests_parallel(blocks_);
  return kernels::first_bad_block(blocks_, digests);
}

std::optional<TxLocation> BlockStore::find_tx(const std::string& tx_id) const {
  std::shared_lock lock(mu_);
  auto it = tx_index_.find(tx_id);
  if (it == tx_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<HistoryEntry> BlockStore::history(std::string_view key) const {
  std::shared_lock lock(mu_);
  std::vector<HistoryEntry> out;
  for (const auto& b : blocks_) {
    for (std::size_t i = 0; i < b.transactions.size(); ++i) {
      if (i >= b.metadata.validation_flags.size() || b.metadata.validation_flags[i] != ValidationFlag::Valid) continue;
      for (const auto& w : b.transactions[i].rwset.writes) {
        if (w.key == key) out.push_back({b.transactions[i].tx_id, b.header.number, w.value});
      }
    }
  }
  return out;
}

}  // namespace donorchain::ledger
