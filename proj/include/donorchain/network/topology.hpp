#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "donorchain/identity/identity.hpp"
#include "donorchain/network/network.hpp"
#include "donorchain/ordering/config.hpp"

namespace donorchain::network {

// Network description consumed by `network up`. YAML or JSON:
//
//   orgs:
//     - {id: gov, name: Ministry of Health, kind: government, peers: 1,
//        identities: [{id: auditor, role: government_auditor, name: Auditor}]}
//   ordering: {mode: raft, cluster: [o0, o1, o2], batch_timeout_ms: 500}
//   channels:
//     - {name: donation-system, members: [gov, hospA], policy: "(and gov (submitter))",
//        chaincodes: [donation]}
//
// Peers are named "<org>.peer<i>".
struct Topology {
  struct IdentitySpec {
    std::string id;
    identity::Role role = identity::Role::HospitalStaff;
    std::string name;
    std::optional<std::string> subject;
  };
  struct OrgSpec {
    std::string id;
    std::string name;
    identity::OrgKind kind = identity::OrgKind::Hospital;
    int peers = 1;
    std::vector<IdentitySpec> identities;
  };
  struct ChannelSpec {
    std::string name;
    std::vector<std::string> members;
    std::string policy;
    std::vector<std::string> chaincodes;
    // Installed after the channel was created; not part of its genesis.
    std::vector<std::string> deployed;
  };

  std::vector<OrgSpec> orgs;
  ordering::OrderingConfig ordering;
  std::vector<ChannelSpec> channels;

  // Throws Error(InvalidConfig) on malformed input.
  static Topology parse(const std::string& text);
  static Topology load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  static std::string peer_id(const std::string& org_id, int index);
};

struct Bootstrapped {
  std::unique_ptr<Network> network;
  std::map<std::string, ClientIdentity> wallet;  // every non-peer identity
  std::map<std::string, std::string> seeds;       // identity id -> key seed hex, peers included
};

// Builds registry, peers and channels. With `membership` and `seeds` the
// registry and keys are restored instead of freshly enrolled, which is what
// reopening a persisted data directory needs.
Bootstrapped bootstrap(const Topology& topology, Network::Options options,
                       const std::map<std::string, ChaincodeFactory>& chaincodes,
                       const std::optional<nlohmann::json>& membership = std::nullopt,
                       const std::map<std::string, std::string>& seeds = {});

}  // namespace donorchain::network
