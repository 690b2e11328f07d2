#pragma once

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "donorchain/common/bytes.hpp"
#include "donorchain/crypto/crypto.hpp"

namespace donorchain::identity {

enum class OrgKind { Hospital, Government, Admin, TransporterPool };

enum class Role { HospitalStaff, Administrator, GovernmentAuditor, Transporter, Patient, Peer };

std::string_view to_string(OrgKind kind);
std::string_view to_string(Role role);
OrgKind parse_org_kind(std::string_view s);
Role parse_role(std::string_view s);

// Role/org-kind compatibility: staff and patients belong to hospitals,
// auditors to the government, transporters to a transporter pool. Peer
// identities sign endorsements and may belong to any org.
bool role_compatible(Role role, OrgKind kind);

struct Org {
  std::string org_id;
  std::string display_name;
  OrgKind kind = OrgKind::Hospital;

  bool operator==(const Org&) const = default;
};

struct Identity {
  std::string identity_id;
  std::string org_id;
  Role role = Role::HospitalStaff;
  std::string display_name;
  crypto::PublicKey public_key;
  // Patient identities are bound to the patient record they may read.
  std::optional<std::string> subject_id;

  bool operator==(const Identity&) const = default;
};

using IdentityPtr = std::shared_ptr<const Identity>;

struct Signature {
  std::string signer;
  Bytes bytes;

  bool operator==(const Signature&) const = default;
};

// Returned exactly once by enroll_identity; the registry keeps only the
// public half.
struct Enrollment {
  IdentityPtr identity;
  crypto::SigningKey signing_key;
};

struct EnrollOptions {
  std::optional<std::string> identity_id;
  std::optional<std::string> subject_id;
};

Signature sign_as(const Identity& signer, const crypto::SigningKey& key, ByteView message);

class MembershipRegistry {
 public:
  MembershipRegistry() = default;
  MembershipRegistry(const MembershipRegistry&) = delete;
  MembershipRegistry& operator=(const MembershipRegistry&) = delete;

  Org register_org(const std::string& display_name, OrgKind kind,
                   std::optional<std::string> org_id = std::nullopt);

  Enrollment enroll_identity(const std::string& org_id, Role role, const std::string& display_name,
                             EnrollOptions options = {});

  void seal();
  bool sealed() const;

  std::optional<Org> find_org(std::string_view org_id) const;
  Org org(std::string_view org_id) const;  // throws UnknownOrg
  std::optional<Org> government() const;
  std::vector<Org> orgs() const;

  IdentityPtr find_identity(std::string_view identity_id) const;
  IdentityPtr identity(std::string_view identity_id) const;  // throws UnknownIdentity
  std::vector<IdentityPtr> identities() const;

  // True only if the signer is enrolled and the signature verifies.
  bool verify(const Signature& signature, ByteView message) const;

  // {orgs:[...], identities:[{id, org, role, public_key_hex, ...}]}
  nlohmann::json export_json() const;
  void import_json(const nlohmann::json& doc);

 private:
  void insert_org_locked(Org org);
  void insert_identity_locked(Identity identity);

  mutable std::shared_mutex mu_;
  bool sealed_ = false;
  std::map<std::string, Org, std::less<>> orgs_;
  std::vector<std::string> org_order_;
  std::map<std::string, IdentityPtr, std::less<>> identities_;
  std::map<crypto::PublicKey, std::string> keys_;
  std::size_t next_org_ = 1;
  std::size_t next_identity_ = 1;
};

}  // namespace donorchain::identity
