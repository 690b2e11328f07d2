#include "donorchain/kernels/validation.hpp"

#include <exception>
#include <mutex>

namespace donorchain::kernels {

std::vector<ledger::ValidationFlag> precheck_serial(std::span<const ledger::Transaction> txs,
                                                    const TxPrecheck& check) {
  std::vector<ledger::ValidationFlag> flags;
  flags.reserve(txs.size());
  for (const auto& tx : txs) flags.push_back(check(tx));
  return flags;
}

std::vector<ledger::ValidationFlag> precheck_parallel(std::span<const ledger::Transaction> txs,
                                                      const TxPrecheck& check) {
  const auto n = static_cast<std::ptrdiff_t>(txs.size());
  std::vector<ledger::ValidationFlag> flags(txs.size(), ledger::ValidationFlag::NotValidated);
  std::exception_ptr failure;
  std::mutex failure_mu;

#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      flags[i] = check(txs[i]);
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return flags;
}

std::vector<BlockDigests> block_digests_serial(std::span<const ledger::Block> blocks) {
  std::vector<BlockDigests> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) {
    out.push_back({ledger::compute_data_hash(b.transactions), ledger::compute_block_hash(b.header)});
  }
  return out;
}

std::vector<BlockDigests> block_digests_parallel(std::span<const ledger::Block> blocks) {
  const auto n = static_cast<std::ptrdiff_t>(blocks.size());
  std::vector<BlockDigests> out(blocks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = {ledger::compute_data_hash(blocks[i].transactions), ledger::compute_block_hash(blocks[i].header)};
  }
  return out;
}

std::optional<std::uint64_t> first_bad_block(std::span<const ledger::Block> blocks,
                                             std::span<const BlockDigests> digests) {
  for (std::size_t n = 0; n < blocks.size(); ++n) {
    const auto& header = blocks[n].header;
    if (header.number != n) return n;
    if (digests[n].data_hash != header.data_hash) return n;
    const auto& expected_prev = n == 0 ? crypto::kZeroDigest : digests[n - 1].header_hash;
    if (header.prev_hash != expected_prev) return n;
  }
  return std::nullopt;
}

}  // namespace donorchain::kernels
