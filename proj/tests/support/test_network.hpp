#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "donorchain/chaincode/donation.hpp"
#include "donorchain/chaincode/records.hpp"
#include "donorchain/common/error.hpp"
#include "donorchain/network/network.hpp"
#include "donorchain/network/topology.hpp"

namespace donorchain::testing {

// A key/value contract with no access control: put(key, value), get(key),
// del(key), incr(key).
class KvChaincode final : public network::Chaincode {
 public:
  std::string id() const override { return "kv"; }
  std::string invoke(network::ChaincodeStub& stub, std::string_view method,
                     const std::vector<std::string>& args) override {
    if (method == "put") {
      stub.put_state(args.at(0), args.at(1));
      stub.set_event("Put", args.at(0));
      return "ok";
    }
    if (method == "get") return stub.get_state(args.at(0)).value_or("");
    if (method == "del") {
      stub.del_state(args.at(0));
      return "ok";
    }
    if (method == "incr") {
      auto current = stub.get_state(args.at(0));
      auto next = std::to_string((current ? std::stoll(*current) : 0) + 1);
      stub.put_state(args.at(0), next);
      return next;
    }
    throw Error(Errc::UnknownMethod, std::string(method));
  }
};

inline network::ChaincodeFactory kv_factory() {
  return [] { return std::make_shared<KvChaincode>(); };
}

// Government, an admin org, two hospitals and a transporter pool. Hospital A
// has a patient identity bound to record "p1".
inline std::string demo_topology(int peers_per_org = 1, const std::string& ordering =
                                                              "{mode: solo, batch_timeout_ms: 20}") {
  auto p = std::to_string(peers_per_org);
  return "orgs:\n"
         "  - {id: gov, name: Ministry of Health, kind: government, peers: " + p + ",\n"
         "     identities: [{id: auditor, role: government_auditor}]}\n"
         "  - {id: admin, name: Registry Admin, kind: admin, peers: 1,\n"
         "     identities: [{id: root, role: administrator}]}\n"
         "  - {id: hospA, name: Hospital A, kind: hospital, peers: " + p + ",\n"
         "     identities: [{id: staffA, role: hospital_staff}, {id: patient1, role: patient, subject: p1}]}\n"
         "  - {id: hospB, name: Hospital B, kind: hospital, peers: " + p + ",\n"
         "     identities: [{id: staffB, role: hospital_staff}]}\n"
         "  - {id: couriers, name: Couriers, kind: transporter_pool, peers: 0,\n"
         "     identities: [{id: courier, role: transporter}]}\n"
         "ordering: " + ordering + "\n"
         "channels:\n"
         "  - {name: donation-system, members: [gov, admin, hospA, hospB],\n"
         "     policy: \"(and gov (submitter))\", chaincodes: [donation, kv]}\n";
}

inline std::map<std::string, network::ChaincodeFactory> standard_chaincodes(
    chaincode::MatchKernel kernel = chaincode::MatchKernel::Parallel) {
  return {{"donation", chaincode::donation_factory(kernel)}, {"kv", kv_factory()}};
}

inline network::Bootstrapped make_demo(int peers_per_org = 1,
                                       const std::string& ordering = "{mode: solo, batch_timeout_ms: 20}") {
  return network::bootstrap(network::Topology::parse(demo_topology(peers_per_org, ordering)), {},
                            standard_chaincodes());
}

inline nlohmann::json record_json(const std::string& id, const std::string& organ = "kidney",
                                  const std::string& blood = "o+", const std::string& gender = "f", int age = 40) {
  return {{"ID", id},          {"firstName", "Ada"},   {"lastName", "Lovelace"}, {"age", age},
          {"phoneNumber", "555-0100"}, {"address", "1 Main St"}, {"organRequired", organ},
          {"bloodgroup", blood}, {"gender", gender},  {"medhistory", "none"}};
}

inline constexpr auto kCommitTimeout = std::chrono::seconds(20);

}  // namespace donorchain::testing
