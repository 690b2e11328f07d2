#include <atomic>
#include <filesystem>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <unistd.h>

#include "donorchain/common/error.hpp"
#include "donorchain/ledger/block_store.hpp"
#include "rig.hpp"

namespace acceptance {

namespace fs = std::filesystem;
using ledger::ValidationFlag;

namespace {

fs::path scratch_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("dc-accept-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool committed_valid(const network::InvokeResult& r) {
  return r.status && r.status->flag == ValidationFlag::Valid;
}

Verdict tamper_detection() {
  Checks c;
  auto dir = scratch_dir("tamper");
  {
    Rig::Options o;
    o.orgs = {{"gov", identity::OrgKind::Government, 2}, {"hospA", identity::OrgKind::Hospital, 2}};
    o.clients = {{"staffA", "hospA", identity::Role::HospitalStaff, {}}};
    o.policy = "(and gov hospA)";
    o.ordering.batch_timeout = std::chrono::milliseconds(20);
    o.data_dir = dir;
    Rig rig(o);
    auto& net = rig.net();

    // 160 registrations, then 20 matches and 20 deletions on disjoint records.
    std::atomic<int> valid{0};
    parallel_for(160, 8, [&](int i) {
      bool patient = i < 80;
      int k = i % 80;
      auto id = (patient ? "p" : "d") + std::to_string(k);
      auto r = rig.invoke("staffA", patient ? "addPatient" : "addDonor", {record_body(id, k).dump()});
      if (committed_valid(r)) ++valid;
    });
    parallel_for(40, 8, [&](int i) {
      auto r = i < 20 ? rig.invoke("staffA", "selectMatch", {"p" + std::to_string(i), "d" + std::to_string(i)})
                      : rig.invoke("staffA", "deleteDonor", {"d" + std::to_string(20 + i)});
      if (committed_valid(r)) ++valid;
    });
    c.expect(valid == 200, "committed valid " + std::to_string(valid.load()) + " of 200");

    const std::string kTampered = "hospA.peer1";
    auto before = net.peer("gov.peer0").ledger(kChannel).state().export_json();
    auto height = net.height(kChannel);
    auto forged = json::parse(*net.peer(kTampered).ledger(kChannel).get_state("PAT_p30"));
    forged["firstName"] = "Mallory";
    net.peer(kTampered).ledger(kChannel).state().corrupt_for_testing("PAT_p30", forged.dump());

    auto prop = net.propose(rig.client("staffA"), kChannel, "donation", "selectMatch", {"p30", "d30"});
    auto clean = net.endorse_for_policy(prop, {"gov.peer0", "hospA.peer0"});
    c.expect(clean.size() == 2 && clean[0].payload() == clean[1].payload(), "honest endorsements differ");
    auto mixed = net.endorse_for_policy(prop, {"gov.peer0", kTampered});
    c.expect(mixed.size() == 2 && mixed[0].payload() != mixed[1].payload(),
             "tampered peer produced the honest rwset");
    bool aborted = false;
    try {
      net.submit(rig.client("staffA"), prop, mixed);
    } catch (const Error& e) {
      aborted = e.code() == Errc::EndorsementMismatch;
    }
    c.expect(aborted, "client did not abort with EndorsementMismatch");
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    c.expect(net.height(kChannel) == height, "height moved after the aborted submission");
    c.expect(!net.status(kChannel, prop.proposal.tx_id).has_value(), "aborted transaction was committed");
    for (const auto& p : {"gov.peer0", "gov.peer1", "hospA.peer0"}) {
      c.expect(net.peer(p).ledger(kChannel).state().export_json() == before, std::string(p) + " state changed");
    }

    // Block-store tampering: each mutated copy must be reported at exactly
    // the block that was edited.
    auto file = dir / kTampered / (std::string(kChannel) + ".blocks");
    auto blocks = ledger::BlockStore::read_file(file);
    auto last = blocks.size() - 1;
    c.expect(!ledger::BlockStore(file).verify_chain().has_value(), "untouched store fails verification");
    std::vector<std::uint64_t> reported;
    for (auto target : {std::uint64_t{1}, std::uint64_t(last / 2), std::uint64_t(last)}) {
      auto copy = blocks;
      auto& tx = copy[target].transactions.at(0);
      tx.args.at(0) += " ";
      auto mutated = dir / ("mutated-" + std::to_string(target) + ".blocks");
      ledger::BlockStore::write_file(mutated, copy);
      auto bad = ledger::BlockStore(mutated).verify_chain();
      c.expect(bad == target, "edit of block " + std::to_string(target) + " reported at " +
                                  (bad ? std::to_string(*bad) : std::string("none")));
      reported.push_back(bad.value_or(0));
    }
    auto detail = "200/200 valid, mismatch aborted pre-order, edits at blocks 1/" + std::to_string(last / 2) + "/" +
                  std::to_string(last) + " reported at " + std::to_string(reported[0]) + "/" +
                  std::to_string(reported[1]) + "/" + std::to_string(reported[2]);
    fs::remove_all(dir);
    return c.verdict(detail);
  }
}

Verdict mvcc_exclusivity() {
  Checks c;
  Rig::Options o;
  o.orgs = {{"gov", identity::OrgKind::Government, 1}, {"hospA", identity::OrgKind::Hospital, 1}};
  o.clients = {{"staffA", "hospA", identity::Role::HospitalStaff, {}}};
  o.ordering.batch_timeout = std::chrono::milliseconds(20);
  Rig rig(o);
  auto& net = rig.net();
  constexpr int kRounds = 50;

  std::atomic<int> registered{0};
  parallel_for(kRounds * 3, 8, [&](int i) {
    int r = i / 3;
    std::string id = (i % 3 == 0 ? "a" : i % 3 == 1 ? "b" : "d") + std::to_string(r);
    auto r_ = rig.invoke("staffA", i % 3 == 2 ? "addDonor" : "addPatient", {record_body(id, r).dump()});
    if (committed_valid(r_)) ++registered;
  });
  c.expect(registered == kRounds * 3, "setup registrations failed");

  int one_each = 0;
  for (int r = 0; r < kRounds; ++r) {
    auto d = "d" + std::to_string(r);
    // Both selections are endorsed against the same snapshot before either
    // is ordered, which is what makes them concurrent.
    std::vector<network::SignedProposal> props;
    std::vector<std::vector<network::ProposalResponse>> responses;
    for (auto p : {"a" + std::to_string(r), "b" + std::to_string(r)}) {
      props.push_back(net.propose(rig.client("staffA"), kChannel, "donation", "selectMatch", {p, d}));
      responses.push_back(net.endorse_for_policy(props.back()));
    }
    std::vector<std::shared_future<network::TxStatus>> futures;
    for (auto& p : props) futures.push_back(net.watch(kChannel, p.proposal.tx_id));
    std::thread other([&] { net.submit(rig.client("staffA"), props[1], responses[1]); });
    net.submit(rig.client("staffA"), props[0], responses[0]);
    other.join();
    int valid = 0, conflict = 0;
    for (auto& f : futures) {
      if (f.wait_for(std::chrono::seconds(20)) != std::future_status::ready) continue;
      auto flag = f.get().flag;
      valid += flag == ValidationFlag::Valid;
      conflict += flag == ValidationFlag::MVCCConflict;
    }
    if (valid == 1 && conflict == 1) ++one_each;
  }
  c.expect(one_each == kRounds, std::to_string(one_each) + " of 50 rounds had one Valid and one MVCCConflict");

  // Final state: every donor matched to exactly one of its two suitors and
  // back, and no patient holds more than one donor.
  const auto& state = net.peer("gov.peer0").ledger(kChannel);
  int bijective = 0;
  std::set<std::string> matched_patients;
  for (int r = 0; r < kRounds; ++r) {
    auto donor = json::parse(*state.get_state("DON_d" + std::to_string(r)));
    auto a = json::parse(*state.get_state("PAT_a" + std::to_string(r)));
    auto b = json::parse(*state.get_state("PAT_b" + std::to_string(r)));
    auto winner = donor["match"].get<std::string>();
    const auto& w = winner == a["ID"] ? a : b;
    const auto& l = winner == a["ID"] ? b : a;
    bool ok = donor["status"] == "matched" && (winner == a["ID"] || winner == b["ID"]) &&
              w["match"] == donor["ID"] && w["status"] == "matched" && l["match"] == "" && l["status"] == "waiting";
    if (ok && matched_patients.insert(winner).second) ++bijective;
  }
  c.expect(bijective == kRounds, std::to_string(bijective) + " of 50 donors bijectively matched");
  return c.verdict(std::to_string(one_each) + "/50 rounds Valid+MVCCConflict, " + std::to_string(bijective) +
                   "/50 bijective matches");
}

Verdict replication_determinism() {
  Checks c;
  Rig::Options o;
  o.orgs = {{"gov", identity::OrgKind::Government, 2}, {"hospA", identity::OrgKind::Hospital, 2}};
  o.clients = {{"staffA", "hospA", identity::Role::HospitalStaff, {}}};
  o.spare_peers = {{"hospA.fresh", "hospA"}};
  o.ordering.batch_timeout = std::chrono::milliseconds(20);
  Rig rig(o);
  auto& net = rig.net();

  // A seeded operation list; selections and deletions target records that
  // earlier operations register, and racing clients make some conflict.
  struct Op {
    std::string method;
    std::vector<std::string> args;
  };
  std::mt19937_64 rng(2024);
  std::vector<Op> ops;
  int patients = 0, donors = 0;
  for (int i = 0; i < 1000; ++i) {
    auto roll = rng() % 100;
    if (roll < 40 || patients < 10 || donors < 10) {
      bool patient = rng() % 2 == 0;
      int& n = patient ? patients : donors;
      auto id = (patient ? "P" : "D") + std::to_string(n++);
      ops.push_back({patient ? "addPatient" : "addDonor", {record_body(id, static_cast<int>(rng() % 6)).dump()}});
    } else if (roll < 85) {
      ops.push_back({"selectMatch", {"P" + std::to_string(rng() % patients), "D" + std::to_string(rng() % donors)}});
    } else {
      bool patient = rng() % 2 == 0;
      ops.push_back({patient ? "deletePatient" : "deleteDonor",
                     {(patient ? "P" : "D") + std::to_string(rng() % (patient ? patients : donors))}});
    }
  }

  std::mutex mu;
  std::map<std::string, int> outcomes;
  parallel_for(static_cast<int>(ops.size()), 16, [&](int i) {
    std::string key;
    try {
      auto r = rig.invoke("staffA", ops[i].method, ops[i].args);
      key = r.status ? std::string(ledger::to_string(r.status->flag)) : "Timeout";
    } catch (const Error& e) {
      key = "rejected:" + std::string(to_string(e.code()));
    }
    std::lock_guard lock(mu);
    ++outcomes[key];
  });

  auto height = net.height(kChannel);
  std::vector<std::string> exports;
  for (const auto& p : {"gov.peer0", "gov.peer1", "hospA.peer0", "hospA.peer1"}) {
    const auto& l = net.peer(p).ledger(kChannel);
    c.expect(l.height() == height, std::string(p) + " height differs");
    exports.push_back(l.state().export_json());
  }
  bool identical = std::all_of(exports.begin(), exports.end(), [&](const auto& e) { return e == exports[0]; });
  c.expect(identical, "world-state exports differ between peers");

  rig.join_spare("hospA.fresh");
  const auto& fresh = net.peer("hospA.fresh").ledger(kChannel);
  c.expect(fresh.height() == height, "fresh peer stopped at height " + std::to_string(fresh.height()));
  c.expect(fresh.state().export_json() == exports[0], "fresh peer replay diverges");
  c.expect(fresh.store().tip_hash() == net.peer("gov.peer0").ledger(kChannel).store().tip_hash(),
           "fresh peer tip differs");

  std::string mix;
  for (const auto& [k, v] : outcomes) mix += (mix.empty() ? "" : ", ") + k + " " + std::to_string(v);
  return c.verdict("1000 tx (" + mix + "), " + std::to_string(height) + " blocks, 4 exports of " +
                   std::to_string(exports[0].size()) + " bytes identical, fresh replay matches");
}

}  // namespace

std::vector<Criterion> ledger_criteria() {
  return {{"tamper-detection", Seconds(30), tamper_detection},
          {"mvcc-exclusivity", Seconds(60), mvcc_exclusivity},
          {"replication-determinism", Seconds(120), replication_determinism}};
}

}  // namespace acceptance
