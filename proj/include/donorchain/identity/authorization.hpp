#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "donorchain/identity/identity.hpp"

namespace donorchain::identity {

enum class Action {
  AddPatient,
  AddDonor,
  GetPatient,
  GetDonor,
  GetAllPatients,
  GetAllDonors,
  GetMyPatients,
  GetMyDonors,
  DeletePatient,
  DeleteDonor,
  FindMatch,
  SelectMatch,
  GetPatientStatus,
  ReadTransportFeed,
  VerifyChain,
};

std::string_view to_string(Action action);
Action parse_action(std::string_view s);
const std::vector<Action>& all_actions();

// What the action touches. owner_org is the hospitalId of the record (or the
// hospital named in a getMy* call); subject_id is the record ID.
struct Resource {
  std::optional<std::string> owner_org;
  std::optional<std::string> subject_id;
};

enum class Decision { Allow, Deny };

// Any: unconditional. OwnOrg: resource.owner_org equals the caller's org.
// OwnRecord: resource.subject_id equals the caller's bound subject.
enum class Scope { Any, OwnOrg, OwnRecord };

struct Rule {
  Role role;
  Action action;
  Scope scope;
};

class AuthorizationMatrix {
 public:
  explicit AuthorizationMatrix(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  static const AuthorizationMatrix& standard();

  // Pure in (role, org, subject, action, resource); default deny.
  Decision decide(const Identity& who, Action action, const Resource& resource) const;

  // Whether any rule grants the action to the role at all, ignoring scope.
  bool role_may(Role role, Action action) const;

  const std::vector<Rule>& rules() const { return rules_; }

  nlohmann::json to_json() const;
  static AuthorizationMatrix from_json(const nlohmann::json& doc);

 private:
  std::vector<Rule> rules_;
};

// Throws Error(UnknownIdentity) when `who` is not the enrolled identity of
// that id.
Decision authorize(const MembershipRegistry& registry, const Identity& who, Action action,
                   const Resource& resource,
                   const AuthorizationMatrix& matrix = AuthorizationMatrix::standard());

}  // namespace donorchain::identity
