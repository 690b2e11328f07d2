#include "donorchain/identity/authorization.hpp"

#include <algorithm>

#include "donorchain/common/error.hpp"

namespace donorchain::identity {

namespace {

struct ActionName {
  Action action;
  std::string_view name;
};

constexpr ActionName kActionNames[] = {
    {Action::AddPatient, "addPatient"},
    {Action::AddDonor, "addDonor"},
    {Action::GetPatient, "getPatient"},
    {Action::GetDonor, "getDonor"},
    {Action::GetAllPatients, "getAllPatients"},
    {Action::GetAllDonors, "getAllDonors"},
    {Action::GetMyPatients, "getMyPatients"},
    {Action::GetMyDonors, "getMyDonors"},
    {Action::DeletePatient, "deletePatient"},
    {Action::DeleteDonor, "deleteDonor"},
    {Action::FindMatch, "findMatch"},
    {Action::SelectMatch, "selectMatch"},
    {Action::GetPatientStatus, "getPatientStatus"},
    {Action::ReadTransportFeed, "readTransportFeed"},
    {Action::VerifyChain, "verifyChain"},
};

std::string_view scope_name(Scope s) {
  switch (s) {
    case Scope::Any: return "any";
    case Scope::OwnOrg: return "own_org";
    case Scope::OwnRecord: return "own_record";
  }
  return "?";
}

Scope parse_scope(std::string_view s) {
  for (auto scope : {Scope::Any, Scope::OwnOrg, Scope::OwnRecord}) {
    if (scope_name(scope) == s) return scope;
  }
  throw Error(Errc::Decode, "unknown scope '" + std::string(s) + "'");
}

std::vector<Rule> standard_rules() {
  using A = Action;
  std::vector<Rule> rules;
  auto grant = [&rules](Role role, std::initializer_list<Action> actions, Scope scope) {
    for (auto a : actions) rules.push_back({role, a, scope});
  };
  // Hospitals manage their own records and run matchmaking for their patients.
  grant(Role::HospitalStaff,
        {A::AddPatient, A::AddDonor, A::GetPatient, A::GetDonor, A::GetMyPatients, A::GetMyDonors,
         A::DeletePatient, A::DeleteDonor, A::FindMatch, A::SelectMatch, A::GetPatientStatus},
        Scope::OwnOrg);
  // Administrators moderate: read everything, delete unmatched records.
  grant(Role::Administrator,
        {A::GetPatient, A::GetDonor, A::GetAllPatients, A::GetAllDonors, A::GetMyPatients,
         A::GetMyDonors, A::DeletePatient, A::DeleteDonor, A::GetPatientStatus, A::VerifyChain},
        Scope::Any);
  // The government monitors: every read, no writes.
  grant(Role::GovernmentAuditor,
        {A::GetPatient, A::GetDonor, A::GetAllPatients, A::GetAllDonors, A::GetMyPatients,
         A::GetMyDonors, A::GetPatientStatus, A::ReadTransportFeed, A::VerifyChain},
        Scope::Any);
  grant(Role::Patient, {A::GetPatient, A::GetPatientStatus}, Scope::OwnRecord);
  grant(Role::Transporter, {A::ReadTransportFeed}, Scope::Any);
  return rules;
}

}  // namespace

std::string_view to_string(Action action) {
  for (const auto& entry : kActionNames) {
    if (entry.action == action) return entry.name;
  }
  return "?";
}

Action parse_action(std::string_view s) {
  for (const auto& entry : kActionNames) {
    if (entry.name == s) return entry.action;
  }
  throw Error(Errc::Decode, "unknown action '" + std::string(s) + "'");
}

const std::vector<Action>& all_actions() {
  static const std::vector<Action> actions = [] {
    std::vector<Action> out;
    for (const auto& entry : kActionNames) out.push_back(entry.action);
    return out;
  }();
  return actions;
}

const AuthorizationMatrix& AuthorizationMatrix::standard() {
  static const AuthorizationMatrix matrix(standard_rules());
  return matrix;
}

Decision AuthorizationMatrix::decide(const Identity& who, Action action, const Resource& resource) const {
  for (const auto& rule : rules_) {
    if (rule.role != who.role || rule.action != action) continue;
    switch (rule.scope) {
      case Scope::Any:
        return Decision::Allow;
      case Scope::OwnOrg:
        if (resource.owner_org && *resource.owner_org == who.org_id) return Decision::Allow;
        break;
      case Scope::OwnRecord:
        if (resource.subject_id && who.subject_id && *resource.subject_id == *who.subject_id) {
          return Decision::Allow;
        }
        break;
    }
  }
  return Decision::Deny;
}

bool AuthorizationMatrix::role_may(Role role, Action action) const {
  return std::any_of(rules_.begin(), rules_.end(),
                     [&](const Rule& r) { return r.role == role && r.action == action; });
}

nlohmann::json AuthorizationMatrix::to_json() const {
  auto doc = nlohmann::json::array();
  for (const auto& r : rules_) {
    doc.push_back({{"role", std::string(to_string(r.role))},
                   {"action", std::string(to_string(r.action))},
                   {"scope", std::string(scope_name(r.scope))}});
  }
  return doc;
}

AuthorizationMatrix AuthorizationMatrix::from_json(const nlohmann::json& doc) {
  std::vector<Rule> rules;
  try {
    for (const auto& r : doc) {
      rules.push_back({parse_role(r.at("role").get<std::string>()),
                       parse_action(r.at("action").get<std::string>()),
                       parse_scope(r.at("scope").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Decode, std::string("authorization matrix: ") + e.what());
  }
  return AuthorizationMatrix(std::move(rules));
}

Decision authorize(const MembershipRegistry& registry, const Identity& who, Action action,
                   const Resource& resource, const AuthorizationMatrix& matrix) {
  auto enrolled = registry.find_identity(who.identity_id);
  if (!enrolled || enrolled->public_key != who.public_key) {
    throw Error(Errc::UnknownIdentity, "identity '" + who.identity_id + "' not enrolled");
  }
  return matrix.decide(*enrolled, action, resource);
}

}  // namespace donorchain::identity
