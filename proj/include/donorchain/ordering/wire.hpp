#pragma once

#include <cstdint>
#include <variant>

#include "donorchain/common/bytes.hpp"
#include "donorchain/ordering/batch.hpp"
#include "donorchain/ordering/orderer.hpp"
#include "donorchain/ordering/raft.hpp"

// Frame layout on the socket, all integers big-endian:
//
//   u32 body_length | u8 kind | fields...
//
//   kind 1  RequestVote    str from, str to, u64 term, u64 last_log_index, u64 last_log_term
//   kind 2  VoteReply      str from, str to, u64 term, u8 granted
//   kind 3  AppendEntries  str from, str to, u64 term, u64 prev_index, u64 prev_term,
//                          u64 leader_commit, u32 n, n x (u64 term, bytes payload)
//   kind 4  AppendReply    str from, str to, u64 term, u8 success, u64 match_index
//   kind 16 Submit         str tx_id, bytes payload
//   kind 17 SubmitReply    u8 status, u8 has_hint, [str hint], str detail
//
// str and bytes are a u32 length followed by the raw octets.
namespace donorchain::ordering {

struct SubmitRequest {
  Envelope envelope;
  bool operator==(const SubmitRequest&) const = default;
};

struct SubmitReply {
  SubmitResult result;
  bool operator==(const SubmitReply&) const = default;
};

using Frame = std::variant<RaftMessage, SubmitRequest, SubmitReply>;

// Body only, without the length prefix.
Bytes encode_frame_body(const Frame& frame);
// Throws Error(Decode) on malformed input, including trailing bytes.
Frame decode_frame_body(ByteView body);

// Length prefix plus body.
Bytes encode_frame(const Frame& frame);

constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

}  // namespace donorchain::ordering
