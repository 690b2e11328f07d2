#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "donorchain/common/bytes.hpp"
#include "donorchain/ordering/config.hpp"

namespace donorchain::ordering {

// A transaction as the orderer sees it: an id for deduplication and opaque
// bytes. Signatures are checked by committing peers, not here.
struct Envelope {
  std::string tx_id;
  Bytes payload;

  std::size_t size() const { return tx_id.size() + payload.size(); }
  bool operator==(const Envelope&) const = default;
};

struct Batch {
  std::vector<Envelope> envelopes;
  std::int64_t cut_time_ms = 0;

  std::size_t bytes() const;
  Bytes encode() const;
  static Batch decode(ByteView data);
  bool operator==(const Batch&) const = default;
};

struct DeliveredBatch {
  std::uint64_t sequence = 0;
  Batch batch;
  bool operator==(const DeliveredBatch&) const = default;
};

// Takes a batch off the front of `pending` when it is full by count, full by
// bytes (the next envelope would not fit), or the timer expired. Arrival order
// is preserved. Returns nullopt when none of those hold or pending is empty.
std::optional<Batch> cut_batch(std::deque<Envelope>& pending, const OrderingConfig& config,
                               bool timer_expired, std::int64_t now_ms = 0);

}  // namespace donorchain::ordering
