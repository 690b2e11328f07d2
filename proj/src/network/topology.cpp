#include "donorchain/network/topology.hpp"

#include <fstream>
#include <sstream>

#include "donorchain/common/config_text.hpp"
#include "donorchain/common/error.hpp"

namespace donorchain::network {

std::string Topology::peer_id(const std::string& org_id, int index) {
  return org_id + ".peer" + std::to_string(index);
}

Topology Topology::parse(const std::string& text) {
  auto doc = parse_config_text(text, "topology");
  Topology t;
  try {
    for (const auto& o : doc.at("orgs")) {
      OrgSpec org;
      org.id = o.at("id").get<std::string>();
      org.name = o.value("name", org.id);
      org.kind = identity::parse_org_kind(o.at("kind").get<std::string>());
      org.peers = o.value("peers", 1);
      if (org.peers < 0) throw Error(Errc::InvalidConfig, "org " + org.id + " has a negative peer count");
      for (const auto& i : o.value("identities", nlohmann::json::array())) {
        IdentitySpec spec;
        spec.id = i.at("id").get<std::string>();
        spec.role = identity::parse_role(i.at("role").get<std::string>());
        spec.name = i.value("name", spec.id);
        if (i.contains("subject")) spec.subject = i.at("subject").get<std::string>();
        org.identities.push_back(std::move(spec));
      }
      t.orgs.push_back(std::move(org));
    }
    if (doc.contains("ordering")) t.ordering = ordering::OrderingConfig::from_json(doc.at("ordering"));
    for (const auto& c : doc.value("channels", nlohmann::json::array())) {
      ChannelSpec ch;
      ch.name = c.at("name").get<std::string>();
      ch.members = c.at("members").get<std::vector<std::string>>();
      ch.policy = c.at("policy").get<std::string>();
      ch.chaincodes = c.value("chaincodes", std::vector<std::string>{});
      ch.deployed = c.value("deployed", std::vector<std::string>{});
      t.channels.push_back(std::move(ch));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("topology: ") + e.what());
  }
  return t;
}

Topology Topology::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read topology " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

nlohmann::json Topology::to_json() const {
  auto orgs_json = nlohmann::json::array();
  for (const auto& o : orgs) {
    auto ids = nlohmann::json::array();
    for (const auto& i : o.identities) {
      nlohmann::json j = {{"id", i.id}, {"role", identity::to_string(i.role)}, {"name", i.name}};
      if (i.subject) j["subject"] = *i.subject;
      ids.push_back(std::move(j));
    }
    orgs_json.push_back({{"id", o.id},
                         {"name", o.name},
                         {"kind", identity::to_string(o.kind)},
                         {"peers", o.peers},
                         {"identities", std::move(ids)}});
  }
  auto channels_json = nlohmann::json::array();
  for (const auto& c : channels) {
    nlohmann::json entry{{"name", c.name}, {"members", c.members}, {"policy", c.policy}, {"chaincodes", c.chaincodes}};
    if (!c.deployed.empty()) entry["deployed"] = c.deployed;
    channels_json.push_back(std::move(entry));
  }
  return {{"orgs", orgs_json}, {"ordering", ordering.to_json()}, {"channels", channels_json}};
}

void Topology::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write topology " + path.string());
  out << to_json().dump(2) << "\n";
}

Bootstrapped bootstrap(const Topology& topology, Network::Options options,
                       const std::map<std::string, ChaincodeFactory>& chaincodes,
                       const std::optional<nlohmann::json>& membership,
                       const std::map<std::string, std::string>& seeds) {
  auto registry = std::make_shared<identity::MembershipRegistry>();
  Bootstrapped out;
  auto restore = [&](const std::string& id) {
    auto seed = seeds.find(id);
    if (seed == seeds.end()) throw Error(Errc::UnknownIdentity, "no key for " + id);
    auto key = crypto::SigningKey::from_seed_hex(seed->second);
    auto ident = registry->identity(id);
    if (key.public_key() != ident->public_key) throw Error(Errc::UnknownIdentity, "key for " + id + " does not match");
    return identity::Enrollment{ident, std::move(key)};
  };
  auto keep = [&](identity::Enrollment& e) {
    out.seeds[e.identity->identity_id] = e.signing_key.seed_hex();
  };

  if (membership) {
    registry->import_json(*membership);
  } else {
    for (const auto& o : topology.orgs) registry->register_org(o.name, o.kind, o.id);
  }

  std::vector<std::pair<std::string, identity::Enrollment>> peer_enrollments;
  for (const auto& o : topology.orgs) {
    for (const auto& spec : o.identities) {
      auto e = membership ? restore(spec.id)
                          : registry->enroll_identity(o.id, spec.role, spec.name,
                                                      identity::EnrollOptions{spec.id, spec.subject});
      keep(e);
      out.wallet[spec.id] = ClientIdentity{e.identity,
                                           std::make_shared<const crypto::SigningKey>(std::move(e.signing_key))};
    }
    for (int i = 0; i < o.peers; ++i) {
      auto id = Topology::peer_id(o.id, i);
      auto e = membership ? restore(id)
                          : registry->enroll_identity(o.id, identity::Role::Peer, id, identity::EnrollOptions{id, {}});
      keep(e);
      peer_enrollments.emplace_back(id, std::move(e));
    }
  }
  if (!registry->sealed()) registry->seal();

  out.network = std::make_unique<Network>(registry, std::move(options));
  for (auto& [id, e] : peer_enrollments) out.network->add_peer(id, std::move(e));
  for (const auto& c : topology.channels) {
    ChannelConfig config;
    config.name = c.name;
    config.member_orgs = {c.members.begin(), c.members.end()};
    config.policy = PolicyExpr::parse(c.policy);
    config.ordering = topology.ordering;
    config.chaincodes = c.chaincodes;
    std::vector<ChaincodeFactory> factories;
    for (const auto& list : {c.chaincodes, c.deployed}) {
      for (const auto& cc : list) {
        auto it = chaincodes.find(cc);
        if (it == chaincodes.end()) throw Error(Errc::UnknownChaincode, "unknown chaincode '" + cc + "'");
        factories.push_back(it->second);
      }
    }
    out.network->create_channel(config);
    for (const auto& f : factories) out.network->install_chaincode(c.name, f);
  }
  return out;
}

}  // namespace donorchain::network
