#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "donorchain/identity/authorization.hpp"
#include "donorchain/identity/identity.hpp"
#include "donorchain/ledger/ledger.hpp"
#include "donorchain/network/chaincode.hpp"

namespace donorchain::network {

// A proposal plus the submitter's signature over its digest.
struct SignedProposal {
  ledger::Proposal proposal;
  identity::Signature signature;
};

struct ProposalResponse {
  std::string peer_id;
  crypto::Digest proposal_digest{};
  ledger::ReadWriteSet rwset;
  std::optional<ledger::ChaincodeEvent> event;
  std::string result;
  ledger::Endorsement endorsement;

  // The bytes the endorsement signs; equal across honest endorsers.
  Bytes payload() const { return ledger::endorsed_payload(proposal_digest, rwset, event); }
};

// An endorsing and committing peer. Holds one ledger per joined channel and
// the chaincodes installed there. Endorsement never mutates state.
class Peer {
 public:
  Peer(std::string peer_id, identity::Enrollment enrollment, const identity::MembershipRegistry& registry,
       const identity::AuthorizationMatrix& matrix,
       std::optional<std::filesystem::path> data_dir = std::nullopt);

  const std::string& id() const { return peer_id_; }
  const std::string& org_id() const { return identity_->org_id; }
  const identity::Identity& identity() const { return *identity_; }

  // Opens (or creates) the channel ledger. Returns true if it was empty.
  bool join(const std::string& channel);
  bool joined(const std::string& channel) const;
  void install(const std::string& channel, std::shared_ptr<Chaincode> chaincode);
  bool has_chaincode(const std::string& channel, const std::string& chaincode_id) const;

  // Throws Error(NotJoined).
  ledger::Ledger& ledger(const std::string& channel);
  const ledger::Ledger& ledger(const std::string& channel) const;

  // Simulates the proposal against current state and signs the outcome.
  // Throws NotJoined, UnknownChaincode, UnknownIdentity, Unauthorized (bad
  // proposal signature or denied action) and any chaincode error.
  ProposalResponse endorse(const SignedProposal& signed_proposal) const;

 private:
  struct ChannelSlot {
    std::unique_ptr<ledger::Ledger> ledger;
    std::map<std::string, std::shared_ptr<Chaincode>> chaincodes;
  };

  const ChannelSlot& slot(const std::string& channel) const;

  std::string peer_id_;
  identity::IdentityPtr identity_;
  crypto::SigningKey key_;
  const identity::MembershipRegistry& registry_;
  const identity::AuthorizationMatrix& matrix_;
  std::optional<std::filesystem::path> data_dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, ChannelSlot> channels_;
};

}  // namespace donorchain::network
