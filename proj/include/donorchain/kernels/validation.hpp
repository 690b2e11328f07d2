#pragma once

#include <functional>
#include <span>
#include <vector>

#include "donorchain/ledger/types.hpp"

// Per-transaction and per-block work that is independent across elements.
// Each kernel has a serial reference and an OpenMP version; both must return
// identical results, which the unit tests check element by element.
namespace donorchain::kernels {

using TxPrecheck = std::function<ledger::ValidationFlag(const ledger::Transaction&)>;

std::vector<ledger::ValidationFlag> precheck_serial(std::span<const ledger::Transaction> txs,
                                                    const TxPrecheck& check);
// `check` must be safe to call concurrently. An exception from any element is
// rethrown after the loop.
std::vector<ledger::ValidationFlag> precheck_parallel(std::span<const ledger::Transaction> txs,
                                                      const TxPrecheck& check);

struct BlockDigests {
  crypto::Digest data_hash;    // recomputed from the stored transactions
  crypto::Digest header_hash;  // hash of the stored header

  bool operator==(const BlockDigests&) const = default;
};

std::vector<BlockDigests> block_digests_serial(std::span<const ledger::Block> blocks);
std::vector<BlockDigests> block_digests_parallel(std::span<const ledger::Block> blocks);

// First block whose stored data_hash or prev_hash disagrees with the
// recomputed digests, or nullopt for an intact chain.
std::optional<std::uint64_t> first_bad_block(std::span<const ledger::Block> blocks,
                                             std::span<const BlockDigests> digests);

}  // namespace donorchain::kernels
