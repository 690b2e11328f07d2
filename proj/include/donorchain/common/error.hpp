#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace donorchain {

// One code space for the whole engine. Callers switch on code(); the message
// is for humans and logs.
enum class Errc {
  // identity
  DuplicateGovernment,
  EmptyName,
  RoleOrgMismatch,
  UnknownIdentity,
  UnknownOrg,
  NetworkSealed,
  Unauthorized,
  // ledger
  ChainGap,
  HashMismatch,
  Decode,
  Io,
  // ordering
  AheadOfChain,
  OrdererUnavailable,
  InvalidConfig,
  // network
  PolicyViolation,
  PolicyParse,
  NotJoined,
  UnknownChannel,
  UnknownChaincode,
  EndorsementMismatch,
  // chaincode
  DuplicateID,
  NotFound,
  ValidationError,
  MatchedRecordLocked,
  AlreadyMatched,
  NotAMatch,
  UnknownMethod,
  // bench
  TargetUnreachable,
  EmptyObservations,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace donorchain
