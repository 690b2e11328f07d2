#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "donorchain/identity/authorization.hpp"
#include "donorchain/identity/identity.hpp"
#include "donorchain/network/chaincode.hpp"
#include "donorchain/network/events.hpp"
#include "donorchain/network/peer.hpp"
#include "donorchain/network/policy.hpp"
#include "donorchain/ordering/service.hpp"

namespace donorchain::network {

inline constexpr std::string_view kDonationChannel = "donation-system";

struct ChannelConfig {
  std::string name;
  std::set<std::string> member_orgs;
  PolicyExpr policy = PolicyExpr::submitter();
  ordering::OrderingConfig ordering;
  std::vector<std::string> chaincodes;

  nlohmann::json to_json() const;
  static ChannelConfig from_json(const nlohmann::json& doc);
};

// A client identity together with its signing key, as held by a wallet.
struct ClientIdentity {
  identity::IdentityPtr identity;
  std::shared_ptr<const crypto::SigningKey> key;
};

struct TxStatus {
  std::string tx_id;
  ledger::ValidationFlag flag = ledger::ValidationFlag::NotValidated;
  std::uint64_t block_number = 0;
  std::uint32_t tx_index = 0;
  std::int64_t block_timestamp_ms = 0;
  std::optional<ledger::ChaincodeEvent> event;
};

struct InvokeResult {
  std::string tx_id;
  std::string result;
  // Unset when the commit did not arrive before the timeout.
  std::optional<TxStatus> status;
};

// Peers, channels and their ordering services in one process, plus the
// client-side flow: propose, endorse, check agreement, submit, await commit.
//
// Each channel runs a commit pipeline thread that pulls batches from its
// orderer, turns each into the next block and commits it on every joined
// peer. Block n carries orderer sequence n - 1; block 0 is the channel's
// config, built identically by every peer.
class Network {
 public:
  struct Options {
    std::optional<std::filesystem::path> data_dir;
    identity::AuthorizationMatrix matrix = identity::AuthorizationMatrix::standard();
    ordering::TransportKind transport = ordering::TransportKind::InProcess;
  };

  explicit Network(std::shared_ptr<identity::MembershipRegistry> registry);
  Network(std::shared_ptr<identity::MembershipRegistry> registry, Options options);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  ~Network();

  identity::MembershipRegistry& registry() { return *registry_; }
  const identity::MembershipRegistry& registry() const { return *registry_; }
  const identity::AuthorizationMatrix& matrix() const { return options_.matrix; }

  // Enrolls a Peer-role identity for the org and keeps its key inside the peer.
  Peer& add_peer(const std::string& peer_id, const std::string& org_id);
  // Uses an identity enrolled earlier, e.g. restored from a key file.
  Peer& add_peer(const std::string& peer_id, identity::Enrollment enrollment);
  Peer& peer(const std::string& peer_id);
  const Peer& peer(const std::string& peer_id) const;
  std::vector<std::string> peer_ids() const;

  // Throws UnknownOrg, PolicyViolation, InvalidConfig.
  void create_channel(ChannelConfig config, bool join_member_peers = true);
  // Joins a peer and brings its ledger up to the channel's height.
  void join_channel(const std::string& peer_id, const std::string& channel);
  void install_chaincode(const std::string& channel, const ChaincodeFactory& factory);

  std::vector<std::string> channels() const;
  const ChannelConfig& channel_config(const std::string& channel) const;
  std::vector<std::string> channel_peers(const std::string& channel) const;
  bool halted(const std::string& channel) const;
  std::uint64_t height(const std::string& channel) const;
  bool wait_for_height(const std::string& channel, std::uint64_t height, std::chrono::milliseconds timeout) const;
  ordering::LocalOrderingCluster& orderer(const std::string& channel);

  SignedProposal propose(const ClientIdentity& client, const std::string& channel, const std::string& chaincode,
                         const std::string& method, std::vector<std::string> args) const;
  ProposalResponse endorse(const std::string& peer_id, const SignedProposal& proposal) const;
  // One peer from each org the policy needs, or exactly the listed peers.
  std::vector<ProposalResponse> endorse_for_policy(const SignedProposal& proposal,
                                                   const std::vector<std::string>& peers = {}) const;
  // Throws EndorsementMismatch before anything is ordered if the responses
  // disagree, OrdererUnavailable if ordering refuses. Returns the tx_id.
  std::string submit(const ClientIdentity& client, const SignedProposal& proposal,
                     const std::vector<ProposalResponse>& responses);
  // Register before submit to be sure to see the commit.
  std::shared_future<TxStatus> watch(const std::string& channel, const std::string& tx_id);
  std::optional<TxStatus> status(const std::string& channel, const std::string& tx_id) const;

  InvokeResult invoke(const ClientIdentity& client, const std::string& channel, const std::string& chaincode,
                      const std::string& method, std::vector<std::string> args,
                      std::chrono::milliseconds timeout = std::chrono::seconds(30),
                      const std::vector<std::string>& peers = {});
  // Endorse on one peer and return the result; nothing is ordered.
  std::string query(const ClientIdentity& client, const std::string& channel, const std::string& chaincode,
                    const std::string& method, std::vector<std::string> args,
                    const std::optional<std::string>& peer = std::nullopt) const;

  std::uint64_t subscribe(const std::string& channel, EventFilter filter, EventBus::Handler handler);
  void unsubscribe(const std::string& channel, std::uint64_t id);
  void flush_events(const std::string& channel);

  void shutdown();

 private:
  struct Channel;

  Channel& channel(const std::string& name);
  const Channel& channel(const std::string& name) const;
  void run_pipeline(Channel& ch);
  void commit_batch(Channel& ch, const ordering::DeliveredBatch& batch);
  void catch_up(Channel& ch, Peer& peer);
  ledger::TxPrecheck make_precheck(const ChannelConfig& config) const;

  std::shared_ptr<identity::MembershipRegistry> registry_;
  Options options_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Peer>> peers_;
  std::vector<std::string> peer_order_;
  std::map<std::string, std::unique_ptr<Channel>> channels_;
  std::atomic<bool> running_{true};
  mutable std::atomic<std::uint64_t> round_robin_{0};
};

// Genesis block for a channel: one config transaction at timestamp 0.
ledger::Block genesis_block(const ChannelConfig& config);

}  // namespace donorchain::network
