#include "donorchain/ordering/batch.hpp"

#include <stdexcept>

namespace donorchain::ordering {

std::size_t Batch::bytes() const {
  std::size_t total = 0;
  for (const auto& e : envelopes) total += e.size();
  return total;
}

Bytes Batch::encode() const {
  ByteWriter w;
  w.u64(static_cast<std::uint64_t>(cut_time_ms));
  w.u32(static_cast<std::uint32_t>(envelopes.size()));
  for (const auto& e : envelopes) {
    w.str(e.tx_id);
    w.bytes(e.payload);
  }
  return w.take();
}

Batch Batch::decode(ByteView data) {
  ByteReader r(data);
  Batch b;
  b.cut_time_ms = static_cast<std::int64_t>(r.u64());
  auto n = r.u32();
  b.envelopes.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Envelope e;
    e.tx_id = r.str();
    e.payload = r.bytes();
    b.envelopes.push_back(std::move(e));
  }
  r.expect_done();
  return b;
}

std::optional<Batch> cut_batch(std::deque<Envelope>& pending, const OrderingConfig& config,
                               bool timer_expired, std::int64_t now_ms) {
  if (pending.empty()) return std::nullopt;
  std::size_t count = 0;
  std::size_t bytes = 0;
  bool full = false;
  while (count < pending.size()) {
    if (count == config.max_tx_per_block) {
      full = true;
      break;
    }
    auto next = pending[count].size();
    if (bytes + next > config.max_block_bytes) {
      full = true;
      break;
    }
    bytes += next;
    ++count;
  }
  if (count == config.max_tx_per_block || bytes == config.max_block_bytes) full = true;
  if (!full && !timer_expired) return std::nullopt;
  if (count == 0) throw std::logic_error("envelope larger than max_block_bytes reached the cutter");

  Batch batch;
  batch.cut_time_ms = now_ms;
  batch.envelopes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    batch.envelopes.push_back(std::move(pending.front()));
    pending.pop_front();
  }
  return batch;
}

}  // namespace donorchain::ordering
