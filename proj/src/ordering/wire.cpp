#include "donorchain/ordering/wire.hpp"

#include "donorchain/common/error.hpp"

namespace donorchain::ordering {

namespace {

enum Kind : std::uint8_t {
  kRequestVote = 1,
  kVoteReply = 2,
  kAppendEntries = 3,
  kAppendReply = 4,
  kSubmit = 16,
  kSubmitReply = 17,
};

void encode_raft(ByteWriter& w, const RaftMessage& m) {
  auto header = [&](Kind kind) {
    w.u8(kind);
    w.str(m.from);
    w.str(m.to);
    w.u64(m.term);
  };
  if (const auto* rv = std::get_if<RequestVote>(&m.body)) {
    header(kRequestVote);
    w.u64(rv->last_log_index);
    w.u64(rv->last_log_term);
  } else if (const auto* vr = std::get_if<VoteReply>(&m.body)) {
    header(kVoteReply);
    w.boolean(vr->granted);
  } else if (const auto* ae = std::get_if<AppendEntries>(&m.body)) {
    header(kAppendEntries);
    w.u64(ae->prev_index);
    w.u64(ae->prev_term);
    w.u64(ae->leader_commit);
    w.u32(static_cast<std::uint32_t>(ae->entries.size()));
    for (const auto& e : ae->entries) {
      w.u64(e.term);
      w.bytes(e.payload);
    }
  } else {
    const auto& ar = std::get<AppendReply>(m.body);
    header(kAppendReply);
    w.boolean(ar.success);
    w.u64(ar.match_index);
  }
}

}  // namespace

Bytes encode_frame_body(const Frame& frame) {
  ByteWriter w;
  if (const auto* m = std::get_if<RaftMessage>(&frame)) {
    encode_raft(w, *m);
  } else if (const auto* s = std::get_if<SubmitRequest>(&frame)) {
    w.u8(kSubmit);
    w.str(s->envelope.tx_id);
    w.bytes(s->envelope.payload);
  } else {
    const auto& r = std::get<SubmitReply>(frame).result;
    w.u8(kSubmitReply);
    w.u8(static_cast<std::uint8_t>(r.status));
    w.boolean(r.leader_hint.has_value());
    if (r.leader_hint) w.str(*r.leader_hint);
    w.str(r.detail);
  }
  return w.take();
}

Frame decode_frame_body(ByteView body) {
  ByteReader r(body);
  auto kind = r.u8();
  Frame out;
  if (kind >= kRequestVote && kind <= kAppendReply) {
    RaftMessage m;
    m.from = r.str();
    m.to = r.str();
    m.term = r.u64();
    switch (kind) {
      case kRequestVote: {
        RequestVote rv;
        rv.last_log_index = r.u64();
        rv.last_log_term = r.u64();
        m.body = rv;
        break;
      }
      case kVoteReply:
        m.body = VoteReply{r.boolean()};
        break;
      case kAppendEntries: {
        AppendEntries ae;
        ae.prev_index = r.u64();
        ae.prev_term = r.u64();
        ae.leader_commit = r.u64();
        auto n = r.u32();
        if (n > r.remaining() / 12) throw Error(Errc::Decode, "entry count exceeds frame");
        ae.entries.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) {
          LogEntry e;
          e.term = r.u64();
          e.payload = r.bytes();
          ae.entries.push_back(std::move(e));
        }
        m.body = std::move(ae);
        break;
      }
      default: {
        AppendReply ar;
        ar.success = r.boolean();
        ar.match_index = r.u64();
        m.body = ar;
      }
    }
    out = std::move(m);
  } else if (kind == kSubmit) {
    SubmitRequest s;
    s.envelope.tx_id = r.str();
    s.envelope.payload = r.bytes();
    out = std::move(s);
  } else if (kind == kSubmitReply) {
    SubmitReply s;
    auto status = r.u8();
    if (status > static_cast<std::uint8_t>(SubmitStatus::Rejected)) {
      throw Error(Errc::Decode, "unknown submit status " + std::to_string(status));
    }
    s.result.status = static_cast<SubmitStatus>(status);
    if (r.boolean()) s.result.leader_hint = r.str();
    s.result.detail = r.str();
    out = std::move(s);
  } else {
    throw Error(Errc::Decode, "unknown frame kind " + std::to_string(kind));
  }
  r.expect_done();
  return out;
}

Bytes encode_frame(const Frame& frame) {
  auto body = encode_frame_body(frame);
  ByteWriter w;
  w.bytes(body);
  return w.take();
}

}  // namespace donorchain::ordering
