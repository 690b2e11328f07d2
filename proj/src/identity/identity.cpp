#include "donorchain/identity/identity.hpp"

#include <mutex>

#include "donorchain/common/error.hpp"

namespace donorchain::identity {

std::string_view to_string(OrgKind kind) {
  switch (kind) {
    case OrgKind::Hospital: return "hospital";
    case OrgKind::Government: return "government";
    case OrgKind::Admin: return "admin";
    case OrgKind::TransporterPool: return "transporter_pool";
  }
  return "?";
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::HospitalStaff: return "hospital_staff";
    case Role::Administrator: return "administrator";
    case Role::GovernmentAuditor: return "government_auditor";
    case Role::Transporter: return "transporter";
    case Role::Patient: return "patient";
    case Role::Peer: return "peer";
  }
  return "?";
}

OrgKind parse_org_kind(std::string_view s) {
  for (auto k : {OrgKind::Hospital, OrgKind::Government, OrgKind::Admin, OrgKind::TransporterPool}) {
    if (to_string(k) == s) return k;
  }
  throw Error(Errc::Decode, "unknown org kind '" + std::string(s) + "'");
}

Role parse_role(std::string_view s) {
  for (auto r : {Role::HospitalStaff, Role::Administrator, Role::GovernmentAuditor, Role::Transporter,
                 Role::Patient, Role::Peer}) {
    if (to_string(r) == s) return r;
  }
  throw Error(Errc::Decode, "unknown role '" + std::string(s) + "'");
}

bool role_compatible(Role role, OrgKind kind) {
  switch (role) {
    case Role::HospitalStaff:
    case Role::Patient:
      return kind == OrgKind::Hospital;
    case Role::Administrator:
      return kind == OrgKind::Admin || kind == OrgKind::Government;
    case Role::GovernmentAuditor:
      return kind == OrgKind::Government;
    case Role::Transporter:
      return kind == OrgKind::TransporterPool;
    case Role::Peer:
      return true;
  }
  return false;
}

Signature sign_as(const Identity& signer, const crypto::SigningKey& key, ByteView message) {
  return Signature{signer.identity_id, crypto::sign(key, message)};
}

void MembershipRegistry::insert_org_locked(Org org) {
  if (org.display_name.empty() || org.org_id.empty()) throw Error(Errc::EmptyName, "org name and id must be non-empty");
  if (orgs_.contains(org.org_id)) throw Error(Errc::InvalidConfig, "duplicate org id '" + org.org_id + "'");
  if (org.kind == OrgKind::Government) {
    for (const auto& [id, existing] : orgs_) {
      if (existing.kind == OrgKind::Government) {
        throw Error(Errc::DuplicateGovernment, "government org already registered as '" + id + "'");
      }
    }
  }
  org_order_.push_back(org.org_id);
  orgs_.emplace(org.org_id, std::move(org));
}

Org MembershipRegistry::register_org(const std::string& display_name, OrgKind kind,
                                     std::optional<std::string> org_id) {
  std::unique_lock lock(mu_);
  if (sealed_) throw Error(Errc::NetworkSealed, "membership is sealed");
  if (display_name.empty()) throw Error(Errc::EmptyName, "org display name is empty");
  std::string id;
  if (org_id) {
    id = *org_id;
  } else {
    do {
      id = "org-" + std::to_string(next_org_++);
    } while (orgs_.contains(id));
  }
  Org org{id, display_name, kind};
  insert_org_locked(org);
  return org;
}

void MembershipRegistry::insert_identity_locked(Identity identity) {
  if (identities_.contains(identity.identity_id)) {
    throw Error(Errc::InvalidConfig, "duplicate identity id '" + identity.identity_id + "'");
  }
  if (keys_.contains(identity.public_key)) {
    throw Error(Errc::InvalidConfig, "public key already enrolled");
  }
  keys_.emplace(identity.public_key, identity.identity_id);
  auto id = identity.identity_id;
  identities_.emplace(std::move(id), std::make_shared<const Identity>(std::move(identity)));
}

Enrollment MembershipRegistry::enroll_identity(const std::string& org_id, Role role,
                                               const std::string& display_name,
                                               EnrollOptions options) {
  auto pair = crypto::KeyPair::generate();
  std::unique_lock lock(mu_);
  auto it = orgs_.find(org_id);
  if (it == orgs_.end()) throw Error(Errc::UnknownOrg, "org '" + org_id + "' not registered");
  if (!role_compatible(role, it->second.kind)) {
    throw Error(Errc::RoleOrgMismatch, std::string(to_string(role)) + " cannot belong to a " +
                                           std::string(to_string(it->second.kind)) + " org");
  }
  std::string id;
  if (options.identity_id) {
    id = *options.identity_id;
    if (id.empty()) throw Error(Errc::EmptyName, "identity id is empty");
  } else {
    do {
      id = "id-" + std::to_string(next_identity_++);
    } while (identities_.contains(id));
  }
  insert_identity_locked(Identity{id, org_id, role, display_name, pair.public_key, options.subject_id});
  return Enrollment{identities_.at(id), std::move(pair.signing_key)};
}

void MembershipRegistry::seal() {
  std::unique_lock lock(mu_);
  sealed_ = true;
}

bool MembershipRegistry::sealed() const {
  std::shared_lock lock(mu_);
  return sealed_;
}

std::optional<Org> MembershipRegistry::find_org(std::string_view org_id) const {
  std::shared_lock lock(mu_);
  auto it = orgs_.find(org_id);
  if (it == orgs_.end()) return std::nullopt;
  return it->second;
}

Org MembershipRegistry::org(std::string_view org_id) const {
  auto found = find_org(org_id);
  if (!found) throw Error(Errc::UnknownOrg, "org '" + std::string(org_id) + "' not registered");
  return *found;
}

std::optional<Org> MembershipRegistry::government() const {
  std::shared_lock lock(mu_);
  for (const auto& [id, org] : orgs_) {
    if (org.kind == OrgKind::Government) return org;
  }
  return std::nullopt;
}

std::vector<Org> MembershipRegistry::orgs() const {
  std::shared_lock lock(mu_);
  std::vector<Org> out;
  for (const auto& id : org_order_) out.push_back(orgs_.at(id));
  return out;
}

IdentityPtr MembershipRegistry::find_identity(std::string_view identity_id) const {
  std::shared_lock lock(mu_);
  auto it = identities_.find(identity_id);
  return it == identities_.end() ? nullptr : it->second;
}

IdentityPtr MembershipRegistry::identity(std::string_view identity_id) const {
  auto found = find_identity(identity_id);
  if (!found) throw Error(Errc::UnknownIdentity, "identity '" + std::string(identity_id) + "' not enrolled");
  return found;
}

std::vector<IdentityPtr> MembershipRegistry::identities() const {
  std::shared_lock lock(mu_);
  std::vector<IdentityPtr> out;
  out.reserve(identities_.size());
  for (const auto& [id, ptr] : identities_) out.push_back(ptr);
  return out;
}

bool MembershipRegistry::verify(const Signature& signature, ByteView message) const {
  auto signer = find_identity(signature.signer);
  if (!signer) return false;
  return crypto::verify(signer->public_key, message, signature.bytes);
}

nlohmann::json MembershipRegistry::export_json() const {
  std::shared_lock lock(mu_);
  nlohmann::json doc;
  doc["orgs"] = nlohmann::json::array();
  for (const auto& id : org_order_) {
    const auto& org = orgs_.at(id);
    doc["orgs"].push_back({{"org_id", org.org_id},
                           {"display_name", org.display_name},
                           {"kind", std::string(to_string(org.kind))}});
  }
  doc["identities"] = nlohmann::json::array();
  for (const auto& [id, ident] : identities_) {
    nlohmann::json entry{{"id", ident->identity_id},
                         {"org", ident->org_id},
                         {"role", std::string(to_string(ident->role))},
                         {"display_name", ident->display_name},
                         {"public_key_hex", ident->public_key.hex()}};
    if (ident->subject_id) entry["subject"] = *ident->subject_id;
    doc["identities"].push_back(std::move(entry));
  }
  doc["sealed"] = sealed_;
  return doc;
}

void MembershipRegistry::import_json(const nlohmann::json& doc) {
  std::unique_lock lock(mu_);
  try {
    for (const auto& o : doc.at("orgs")) {
      insert_org_locked(Org{o.at("org_id").get<std::string>(), o.at("display_name").get<std::string>(),
                            parse_org_kind(o.at("kind").get<std::string>())});
    }
    for (const auto& i : doc.at("identities")) {
      Identity ident;
      ident.identity_id = i.at("id").get<std::string>();
      ident.org_id = i.at("org").get<std::string>();
      ident.role = parse_role(i.at("role").get<std::string>());
      ident.display_name = i.value("display_name", ident.identity_id);
      ident.public_key = crypto::PublicKey::from_hex(i.at("public_key_hex").get<std::string>());
      if (i.contains("subject")) ident.subject_id = i.at("subject").get<std::string>();
      auto org_it = orgs_.find(ident.org_id);
      if (org_it == orgs_.end()) throw Error(Errc::UnknownOrg, "identity references unknown org '" + ident.org_id + "'");
      if (!role_compatible(ident.role, org_it->second.kind)) {
        throw Error(Errc::RoleOrgMismatch, "identity '" + ident.identity_id + "' role/org mismatch");
      }
      insert_identity_locked(std::move(ident));
    }
    sealed_ = doc.value("sealed", sealed_);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Decode, std::string("membership document: ") + e.what());
  }
}

}  // namespace donorchain::identity
