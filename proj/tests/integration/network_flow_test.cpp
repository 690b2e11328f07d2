#include <doctest.h>

#include <atomic>
#include <mutex>

#include "donorchain/common/error.hpp"
#include "../support/test_network.hpp"

using namespace donorchain;
using namespace donorchain::network;
using donorchain::testing::kCommitTimeout;
using donorchain::testing::record_json;
using ledger::ValidationFlag;
using nlohmann::json;

namespace {

constexpr auto kChannel = "donation-system";

template <typename F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

struct Demo {
  explicit Demo(int peers = 1, const std::string& ordering = "{mode: solo, batch_timeout_ms: 20}")
      : boot(testing::make_demo(peers, ordering)), net(*boot.network) {}

  const ClientIdentity& who(const std::string& id) { return boot.wallet.at(id); }

  InvokeResult invoke(const std::string& id, const std::string& cc, const std::string& method,
                      std::vector<std::string> args) {
    auto r = net.invoke(who(id), kChannel, cc, method, std::move(args), kCommitTimeout);
    REQUIRE(r.status);
    return r;
  }

  void quiesce() {
    auto h = net.height(kChannel);
    for (const auto& id : net.channel_peers(kChannel)) {
      auto& store = net.peer(id).ledger(kChannel).store();
      for (int i = 0; i < 2000 && store.height() < h; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }

  void check_replicated() {
    quiesce();
    auto peers = net.channel_peers(kChannel);
    REQUIRE(peers.size() >= 2);
    const auto& first = net.peer(peers[0]).ledger(kChannel);
    for (const auto& id : peers) {
      CAPTURE(id);
      const auto& l = net.peer(id).ledger(kChannel);
      CHECK(l.height() == first.height());
      CHECK(l.store().tip_hash() == first.store().tip_hash());
      CHECK(l.state().export_json() == first.state().export_json());
      CHECK_FALSE(l.store().verify_chain());
    }
  }

  Bootstrapped boot;
  Network& net;
};

}  // namespace

TEST_CASE("addPatient runs the full flow and commits Valid on every peer") {
  Demo d(2);
  auto r = d.invoke("staffA", "donation", "addPatient", {record_json("p1").dump()});
  CHECK(r.status->flag == ValidationFlag::Valid);
  CHECK(json::parse(r.result)["key"] == "PAT_p1");
  CHECK(r.status->block_number >= 1);
  CHECK(r.status->block_timestamp_ms > 0);
  REQUIRE(r.status->event);
  CHECK(r.status->event->name == "RecordAdded");
  CHECK(d.net.status(kChannel, r.tx_id)->flag == ValidationFlag::Valid);
  d.check_replicated();
  for (const auto& id : d.net.channel_peers(kChannel)) CHECK(d.net.peer(id).ledger(kChannel).get_state("PAT_p1"));
}

TEST_CASE("honest peers produce byte-identical endorsements") {
  Demo d(2);
  auto prop = d.net.propose(d.who("staffA"), kChannel, "donation", "addPatient", {record_json("p1").dump()});
  auto a = d.net.endorse("hospA.peer0", prop);
  auto b = d.net.endorse("hospA.peer1", prop);
  auto g = d.net.endorse("gov.peer0", prop);
  CHECK(a.rwset.canonical_bytes() == b.rwset.canonical_bytes());
  CHECK(a.payload() == b.payload());
  CHECK(a.payload() == g.payload());
  CHECK(a.endorsement.org_id == "hospA");
  CHECK(g.endorsement.org_id == "gov");
}

TEST_CASE("a tampered peer is caught before ordering") {
  Demo d(1);
  d.invoke("staffA", "donation", "addPatient", {record_json("p1").dump()});
  d.invoke("staffB", "donation", "addDonor", {record_json("d1").dump()});
  d.quiesce();
  auto forged = json::parse(*d.net.peer("gov.peer0").ledger(kChannel).get_state("DON_d1"));
  forged["firstName"] = "Mallory";
  d.net.peer("gov.peer0").ledger(kChannel).state().corrupt_for_testing("DON_d1", forged.dump());

  auto height = d.net.height(kChannel);
  auto prop = d.net.propose(d.who("staffA"), kChannel, "donation", "selectMatch", {"p1", "d1"});
  auto responses = d.net.endorse_for_policy(prop);
  REQUIRE(responses.size() == 2);
  CHECK(error_of([&] { d.net.submit(d.who("staffA"), prop, responses); }) == Errc::EndorsementMismatch);
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  CHECK(d.net.height(kChannel) == height);
  CHECK_FALSE(d.net.status(kChannel, prop.proposal.tx_id));
  CHECK(json::parse(*d.net.peer("hospA.peer0").ledger(kChannel).get_state("DON_d1"))["status"] == "available");
}

TEST_CASE("endorsements from too few orgs commit as PolicyFailure") {
  Demo d(1);
  auto prop = d.net.propose(d.who("staffA"), kChannel, "donation", "addPatient", {record_json("p1").dump()});
  auto responses = d.net.endorse_for_policy(prop, {"gov.peer0"});
  auto future = d.net.watch(kChannel, prop.proposal.tx_id);
  d.net.submit(d.who("staffA"), prop, responses);
  REQUIRE(future.wait_for(kCommitTimeout) == std::future_status::ready);
  CHECK(future.get().flag == ValidationFlag::PolicyFailure);
  CHECK_FALSE(future.get().event);
  d.quiesce();
  CHECK_FALSE(d.net.peer("hospA.peer0").ledger(kChannel).get_state("PAT_p1"));

  // The submitter's own org alone is not enough either.
  auto prop2 = d.net.propose(d.who("staffA"), kChannel, "donation", "addPatient", {record_json("p2").dump()});
  auto r2 = d.net.endorse_for_policy(prop2, {"hospA.peer0"});
  auto f2 = d.net.watch(kChannel, prop2.proposal.tx_id);
  d.net.submit(d.who("staffA"), prop2, r2);
  REQUIRE(f2.wait_for(kCommitTimeout) == std::future_status::ready);
  CHECK(f2.get().flag == ValidationFlag::PolicyFailure);
}

TEST_CASE("endorsement refuses unauthorized callers and unknown targets") {
  Demo d(1);
  d.invoke("staffA", "donation", "addPatient", {record_json("p2").dump()});
  CHECK(error_of([&] { d.net.query(d.who("patient1"), kChannel, "donation", "getPatient", {"p2"}); }) ==
        Errc::Unauthorized);
  CHECK(error_of([&] { d.net.query(d.who("staffA"), kChannel, "nope", "x", {}); }) == Errc::UnknownChaincode);
  CHECK(error_of([&] { d.net.query(d.who("staffA"), "elsewhere", "donation", "getPatient", {"p2"}); }) ==
        Errc::UnknownChannel);

  auto prop = d.net.propose(d.who("staffA"), kChannel, "donation", "getPatient", {"p2"});
  prop.proposal.args = {"p3"};
  CHECK(error_of([&] { d.net.endorse("gov.peer0", prop); }) == Errc::Unauthorized);
}

TEST_CASE("two orgs with two peers each stay identical over 100 transactions") {
  Demo d(2);
  std::vector<std::string> tx_ids;
  std::vector<std::shared_future<TxStatus>> futures;
  for (int i = 0; i < 100; ++i) {
    const auto& client = d.who(i % 2 == 0 ? "staffA" : "staffB");
    auto prop = d.net.propose(client, kChannel, "kv", "put", {"k" + std::to_string(i % 37), std::to_string(i)});
    auto responses = d.net.endorse_for_policy(prop);
    futures.push_back(d.net.watch(kChannel, prop.proposal.tx_id));
    tx_ids.push_back(d.net.submit(client, prop, responses));
  }
  for (auto& f : futures) {
    REQUIRE(f.wait_for(kCommitTimeout) == std::future_status::ready);
    CHECK(f.get().flag == ValidationFlag::Valid);
  }
  d.check_replicated();
  CHECK(d.net.peer("gov.peer1").ledger(kChannel).get_state("k0") == std::optional<std::string>("74"));
}

TEST_CASE("a conflicting transaction is flagged identically on every peer") {
  Demo d(2);
  d.invoke("staffA", "kv", "put", {"counter", "0"});
  std::vector<SignedProposal> props;
  std::vector<std::vector<ProposalResponse>> endorsed;
  for (auto client : {"staffA", "staffB"}) {
    props.push_back(d.net.propose(d.who(client), kChannel, "kv", "incr", {"counter"}));
    endorsed.push_back(d.net.endorse_for_policy(props.back()));
  }
  std::vector<std::shared_future<TxStatus>> futures;
  for (std::size_t i = 0; i < props.size(); ++i) {
    futures.push_back(d.net.watch(kChannel, props[i].proposal.tx_id));
    d.net.submit(d.who(i == 0 ? "staffA" : "staffB"), props[i], endorsed[i]);
  }
  std::vector<ValidationFlag> flags;
  for (auto& f : futures) {
    REQUIRE(f.wait_for(kCommitTimeout) == std::future_status::ready);
    flags.push_back(f.get().flag);
  }
  CHECK(std::count(flags.begin(), flags.end(), ValidationFlag::Valid) == 1);
  CHECK(std::count(flags.begin(), flags.end(), ValidationFlag::MVCCConflict) == 1);
  d.quiesce();
  for (const auto& id : d.net.channel_peers(kChannel)) {
    const auto& store = d.net.peer(id).ledger(kChannel).store();
    for (std::size_t i = 0; i < props.size(); ++i) CHECK(store.find_tx(props[i].proposal.tx_id)->flag == flags[i]);
    CHECK(d.net.peer(id).ledger(kChannel).get_state("counter") == std::optional<std::string>("1"));
  }
  d.check_replicated();
}

TEST_CASE("a resubmitted transaction id commits once") {
  Demo d(1);
  auto prop = d.net.propose(d.who("staffA"), kChannel, "kv", "put", {"once", "1"});
  auto responses = d.net.endorse_for_policy(prop);
  auto future = d.net.watch(kChannel, prop.proposal.tx_id);
  d.net.submit(d.who("staffA"), prop, responses);
  REQUIRE(future.wait_for(kCommitTimeout) == std::future_status::ready);
  auto first = future.get();
  d.net.submit(d.who("staffA"), prop, responses);
  auto marker = d.invoke("staffA", "kv", "put", {"after", "1"});
  CHECK(d.net.status(kChannel, prop.proposal.tx_id)->block_number == first.block_number);
  CHECK(first.flag == ValidationFlag::Valid);
  CHECK(marker.status->flag == ValidationFlag::Valid);
}

TEST_CASE("a peer joining late replays to the same state") {
  auto reg = std::make_shared<identity::MembershipRegistry>();
  reg->register_org("Ministry", identity::OrgKind::Government, "gov");
  reg->register_org("Hospital A", identity::OrgKind::Hospital, "hospA");
  auto staff = reg->enroll_identity("hospA", identity::Role::HospitalStaff, "staff");
  std::vector<std::pair<std::string, identity::Enrollment>> peers;
  for (auto [id, org] : {std::pair{"gov.peer0", "gov"}, {"hospA.peer0", "hospA"}, {"hospA.peer1", "hospA"}}) {
    peers.emplace_back(id, reg->enroll_identity(org, identity::Role::Peer, id, identity::EnrollOptions{id, {}}));
  }
  reg->seal();
  Network net(reg);
  for (auto& [id, e] : peers) net.add_peer(id, std::move(e));
  ChannelConfig config;
  config.name = kChannel;
  config.member_orgs = {"gov", "hospA"};
  config.policy = PolicyExpr::parse("(and gov (submitter))");
  config.ordering.batch_timeout = std::chrono::milliseconds(20);
  config.chaincodes = {"donation"};
  net.create_channel(config, false);
  net.join_channel("gov.peer0", kChannel);
  net.join_channel("hospA.peer0", kChannel);
  net.install_chaincode(kChannel, chaincode::donation_factory());

  ClientIdentity client{staff.identity, std::make_shared<const crypto::SigningKey>(std::move(staff.signing_key))};
  for (int i = 0; i < 20; ++i) {
    auto r = net.invoke(client, kChannel, "donation", i % 2 ? "addDonor" : "addPatient",
                        {record_json("r" + std::to_string(i)).dump()}, kCommitTimeout);
    REQUIRE(r.status);
    CHECK(r.status->flag == ValidationFlag::Valid);
  }
  net.join_channel("hospA.peer1", kChannel);
  const auto& late = net.peer("hospA.peer1").ledger(kChannel);
  const auto& ref = net.peer("gov.peer0").ledger(kChannel);
  CHECK(late.height() == ref.height());
  CHECK(late.state().export_json() == ref.state().export_json());
  CHECK(late.store().tip_hash() == ref.store().tip_hash());
  CHECK(net.peer("hospA.peer1").has_chaincode(kChannel, "donation"));

  auto r = net.invoke(client, kChannel, "donation", "selectMatch", {"r0", "r1"}, kCommitTimeout,
                      {"gov.peer0", "hospA.peer1"});
  REQUIRE(r.status);
  CHECK(r.status->flag == ValidationFlag::Valid);
  CHECK(net.wait_for_height(kChannel, ref.height(), kCommitTimeout));
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  CHECK(late.state().export_json() == ref.state().export_json());
  CHECK(error_of([&] { net.join_channel("nobody", kChannel); }) == Errc::InvalidConfig);
}

TEST_CASE("commit events reach subscribers by tx id and by event name") {
  std::mutex mu;
  std::vector<CommitEvent> by_tx, matches, all;
  Demo d(1);
  d.net.subscribe(kChannel, {}, [&](const CommitEvent& e) {
    std::lock_guard lock(mu);
    all.push_back(e);
  });
  auto prop = d.net.propose(d.who("staffA"), kChannel, "donation", "addPatient", {record_json("p1").dump()});
  d.net.subscribe(kChannel, EventFilter{prop.proposal.tx_id, std::nullopt}, [&](const CommitEvent& e) {
    std::lock_guard lock(mu);
    by_tx.push_back(e);
  });
  d.net.subscribe(kChannel, EventFilter{std::nullopt, "MatchSelected"}, [&](const CommitEvent& e) {
    std::lock_guard lock(mu);
    matches.push_back(e);
  });
  auto future = d.net.watch(kChannel, prop.proposal.tx_id);
  d.net.submit(d.who("staffA"), prop, d.net.endorse_for_policy(prop));
  REQUIRE(future.wait_for(kCommitTimeout) == std::future_status::ready);
  d.invoke("staffB", "donation", "addDonor", {record_json("d1").dump()});
  auto sel = d.invoke("staffA", "donation", "selectMatch", {"p1", "d1"});
  d.net.flush_events(kChannel);

  std::lock_guard lock(mu);
  REQUIRE(by_tx.size() == 1);
  CHECK(by_tx[0].flag == ValidationFlag::Valid);
  CHECK(by_tx[0].method == "addPatient");
  CHECK(by_tx[0].event->name == "RecordAdded");
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].tx_id == sel.tx_id);
  auto payload = json::parse(matches[0].event->payload);
  CHECK(payload["patientId"] == "p1");
  CHECK(payload["donorId"] == "d1");
  CHECK(payload["organ"] == "kidney");
  CHECK(all.size() == 3);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].block_number <= all[i].block_number);
}

TEST_CASE("concurrent selections of one donor leave exactly one match") {
  Demo d(1);
  d.invoke("staffA", "donation", "addPatient", {record_json("pa").dump()});
  d.invoke("staffB", "donation", "addPatient", {record_json("pb").dump()});
  d.invoke("staffB", "donation", "addDonor", {record_json("d1").dump()});
  auto pa = d.net.propose(d.who("staffA"), kChannel, "donation", "selectMatch", {"pa", "d1"});
  auto pb = d.net.propose(d.who("staffB"), kChannel, "donation", "selectMatch", {"pb", "d1"});
  auto ra = d.net.endorse_for_policy(pa);
  auto rb = d.net.endorse_for_policy(pb);
  auto fa = d.net.watch(kChannel, pa.proposal.tx_id);
  auto fb = d.net.watch(kChannel, pb.proposal.tx_id);
  d.net.submit(d.who("staffA"), pa, ra);
  d.net.submit(d.who("staffB"), pb, rb);
  REQUIRE(fa.wait_for(kCommitTimeout) == std::future_status::ready);
  REQUIRE(fb.wait_for(kCommitTimeout) == std::future_status::ready);
  std::multiset<ValidationFlag> flags{fa.get().flag, fb.get().flag};
  CHECK(flags == std::multiset<ValidationFlag>{ValidationFlag::Valid, ValidationFlag::MVCCConflict});
  auto winner = fa.get().flag == ValidationFlag::Valid ? "pa" : "pb";
  auto donor = json::parse(d.net.query(d.who("root"), kChannel, "donation", "getDonor", {"d1"}));
  CHECK(donor["match"] == winner);
  auto patients = json::parse(d.net.query(d.who("root"), kChannel, "donation", "getAllPatients", {}));
  int matched = 0;
  for (const auto& p : patients) matched += p["status"] == "matched";
  CHECK(matched == 1);
}

TEST_CASE("the donation channel also runs on a Raft ordering cluster") {
  Demo d(1, "{mode: raft, cluster: [o0, o1, o2], batch_timeout_ms: 20}");
  for (int i = 0; i < 5; ++i) {
    auto r = d.invoke("staffA", "donation", "addPatient", {record_json("p" + std::to_string(i)).dump()});
    CHECK(r.status->flag == ValidationFlag::Valid);
  }
  d.check_replicated();
  CHECK(json::parse(d.net.query(d.who("root"), kChannel, "donation", "getAllPatients", {})).size() == 5);
}
