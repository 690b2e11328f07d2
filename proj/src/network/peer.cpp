#include "donorchain/network/peer.hpp"

#include <mutex>

#include "donorchain/common/error.hpp"

namespace donorchain::network {

Peer::Peer(std::string peer_id, identity::Enrollment enrollment, const identity::MembershipRegistry& registry,
           const identity::AuthorizationMatrix& matrix, std::optional<std::filesystem::path> data_dir)
    : peer_id_(std::move(peer_id)),
      identity_(std::move(enrollment.identity)),
      key_(std::move(enrollment.signing_key)),
      registry_(registry),
      matrix_(matrix),
      data_dir_(std::move(data_dir)) {}

bool Peer::join(const std::string& channel) {
  std::unique_lock lock(mu_);
  auto it = channels_.find(channel);
  if (it != channels_.end()) return it->second.ledger->height() == 0;
  ChannelSlot slot;
  if (data_dir_) {
    auto dir = *data_dir_ / peer_id_;
    std::filesystem::create_directories(dir);
    slot.ledger = std::make_unique<ledger::Ledger>(dir, channel);
  } else {
    slot.ledger = std::make_unique<ledger::Ledger>();
  }
  bool empty = slot.ledger->height() == 0;
  channels_.emplace(channel, std::move(slot));
  return empty;
}

bool Peer::joined(const std::string& channel) const {
  std::shared_lock lock(mu_);
  return channels_.contains(channel);
}

void Peer::install(const std::string& channel, std::shared_ptr<Chaincode> chaincode) {
  std::unique_lock lock(mu_);
  auto it = channels_.find(channel);
  if (it == channels_.end()) throw Error(Errc::NotJoined, peer_id_ + " has not joined " + channel);
  auto id = chaincode->id();
  it->second.chaincodes[id] = std::move(chaincode);
}

bool Peer::has_chaincode(const std::string& channel, const std::string& chaincode_id) const {
  std::shared_lock lock(mu_);
  auto it = channels_.find(channel);
  return it != channels_.end() && it->second.chaincodes.contains(chaincode_id);
}

const Peer::ChannelSlot& Peer::slot(const std::string& channel) const {
  std::shared_lock lock(mu_);
  auto it = channels_.find(channel);
  if (it == channels_.end()) throw Error(Errc::NotJoined, peer_id_ + " has not joined " + channel);
  return it->second;
}

ledger::Ledger& Peer::ledger(const std::string& channel) { return *slot(channel).ledger; }

const ledger::Ledger& Peer::ledger(const std::string& channel) const { return *slot(channel).ledger; }

ProposalResponse Peer::endorse(const SignedProposal& signed_proposal) const {
  const auto& proposal = signed_proposal.proposal;
  const auto& s = slot(proposal.channel);
  std::shared_ptr<Chaincode> chaincode;
  {
    std::shared_lock lock(mu_);
    auto it = s.chaincodes.find(proposal.chaincode_id);
    if (it == s.chaincodes.end()) {
      throw Error(Errc::UnknownChaincode,
                  "chaincode '" + proposal.chaincode_id + "' not installed on " + peer_id_ + " for " + proposal.channel);
    }
    chaincode = it->second;
  }
  auto caller = registry_.identity(proposal.submitter);
  auto digest = proposal.digest();
  if (signed_proposal.signature.signer != proposal.submitter ||
      !registry_.verify(signed_proposal.signature, digest)) {
    throw Error(Errc::Unauthorized, "proposal signature does not verify for " + proposal.submitter);
  }

  ChaincodeStub::Context ctx{proposal.channel, proposal.tx_id, proposal.timestamp_ms, s.ledger->height()};
  auto authorizer = [this, caller](identity::Action action, const identity::Resource& resource) {
    return identity::authorize(registry_, *caller, action, resource, matrix_);
  };
  ChaincodeStub stub(s.ledger->state(), *caller, ctx, authorizer, matrix_);

  ProposalResponse response;
  response.peer_id = peer_id_;
  response.proposal_digest = digest;
  response.result = chaincode->invoke(stub, proposal.method, proposal.args);
  response.rwset = stub.take_rwset();
  response.event = stub.event();
  response.endorsement.org_id = identity_->org_id;
  response.endorsement.signature = identity::sign_as(*identity_, key_, response.payload());
  return response;
}

}  // namespace donorchain::network
