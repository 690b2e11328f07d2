#include "donorchain/common/error.hpp"

namespace donorchain {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateGovernment: return "DuplicateGovernment";
    case Errc::EmptyName: return "EmptyName";
    case Errc::RoleOrgMismatch: return "RoleOrgMismatch";
    case Errc::UnknownIdentity: return "UnknownIdentity";
    case Errc::UnknownOrg: return "UnknownOrg";
    case Errc::NetworkSealed: return "NetworkSealed";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::ChainGap: return "ChainGap";
    case Errc::HashMismatch: return "HashMismatch";
    case Errc::Decode: return "Decode";
    case Errc::Io: return "Io";
    case Errc::AheadOfChain: return "AheadOfChain";
    case Errc::OrdererUnavailable: return "OrdererUnavailable";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::PolicyViolation: return "PolicyViolation";
    case Errc::PolicyParse: return "PolicyParse";
    case Errc::NotJoined: return "NotJoined";
    case Errc::UnknownChannel: return "UnknownChannel";
    case Errc::UnknownChaincode: return "UnknownChaincode";
    case Errc::EndorsementMismatch: return "EndorsementMismatch";
    case Errc::DuplicateID: return "DuplicateID";
    case Errc::NotFound: return "NotFound";
    case Errc::ValidationError: return "ValidationError";
    case Errc::MatchedRecordLocked: return "MatchedRecordLocked";
    case Errc::AlreadyMatched: return "AlreadyMatched";
    case Errc::NotAMatch: return "NotAMatch";
    case Errc::UnknownMethod: return "UnknownMethod";
    case Errc::TargetUnreachable: return "TargetUnreachable";
    case Errc::EmptyObservations: return "EmptyObservations";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace donorchain
