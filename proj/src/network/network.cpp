#include "donorchain/network/network.hpp"

#include <shared_mutex>

#include <spdlog/spdlog.h>

#include "donorchain/common/error.hpp"

namespace donorchain::network {

using ledger::ValidationFlag;

nlohmann::json ChannelConfig::to_json() const {
  return {
      {"name", name},
      {"member_orgs", member_orgs},
      {"policy", policy.to_string()},
      {"ordering", ordering.to_json()},
      {"chaincodes", chaincodes},
  };
}

ChannelConfig ChannelConfig::from_json(const nlohmann::json& doc) {
  ChannelConfig c;
  try {
    c.name = doc.at("name").get<std::string>();
    c.member_orgs = doc.at("member_orgs").get<std::set<std::string>>();
    c.policy = PolicyExpr::parse(doc.at("policy").get<std::string>());
    if (doc.contains("ordering")) c.ordering = ordering::OrderingConfig::from_json(doc.at("ordering"));
    c.chaincodes = doc.value("chaincodes", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("channel config: ") + e.what());
  }
  return c;
}

ledger::Block genesis_block(const ChannelConfig& config) {
  ledger::Transaction tx;
  tx.tx_id = "genesis:" + config.name;
  tx.channel = config.name;
  tx.chaincode_id = "_config";
  tx.method = "config";
  tx.args = {config.to_json().dump()};
  return ledger::Block::assemble(0, crypto::kZeroDigest, {tx}, 0);
}

struct Network::Channel {
  ChannelConfig config;
  ledger::Block genesis;
  std::unique_ptr<ordering::LocalOrderingCluster> orderer;
  ledger::TxPrecheck precheck;
  std::map<std::string, ChaincodeFactory> factories;

  mutable std::shared_mutex members_mu;
  std::vector<Peer*> peers;  // peers[0] is the reference chain

  std::mutex commit_mu;
  std::uint64_t base = 0;
  std::uint64_t next_seq = 0;
  std::atomic<bool> halted{false};
  mutable std::mutex height_mu;
  mutable std::condition_variable height_cv;
  std::uint64_t height = 0;

  std::mutex waiters_mu;
  std::multimap<std::string, std::shared_ptr<std::promise<TxStatus>>> waiters;

  EventBus bus;
  std::thread pipeline;
};

Network::Network(std::shared_ptr<identity::MembershipRegistry> registry)
    : Network(std::move(registry), Options{}) {}

Network::Network(std::shared_ptr<identity::MembershipRegistry> registry, Options options)
    : registry_(std::move(registry)), options_(std::move(options)) {}

Network::~Network() { shutdown(); }

void Network::shutdown() {
  if (!running_.exchange(false)) return;
  std::lock_guard lock(mu_);
  for (auto& [name, ch] : channels_) {
    if (ch->pipeline.joinable()) ch->pipeline.join();
    ch->orderer->stop();
    ch->bus.stop();
  }
}

Peer& Network::add_peer(const std::string& peer_id, const std::string& org_id) {
  return add_peer(peer_id, registry_->enroll_identity(org_id, identity::Role::Peer, peer_id,
                                                      identity::EnrollOptions{peer_id, std::nullopt}));
}

Peer& Network::add_peer(const std::string& peer_id, identity::Enrollment enrollment) {
  if (enrollment.identity->role != identity::Role::Peer) {
    throw Error(Errc::RoleOrgMismatch, enrollment.identity->identity_id + " is not a peer identity");
  }
  std::lock_guard lock(mu_);
  if (peers_.contains(peer_id)) throw Error(Errc::InvalidConfig, "duplicate peer id '" + peer_id + "'");
  auto peer = std::make_unique<Peer>(peer_id, std::move(enrollment), *registry_, options_.matrix, options_.data_dir);
  auto& ref = *peer;
  peers_.emplace(peer_id, std::move(peer));
  peer_order_.push_back(peer_id);
  return ref;
}

Peer& Network::peer(const std::string& peer_id) {
  return const_cast<Peer&>(std::as_const(*this).peer(peer_id));
}

const Peer& Network::peer(const std::string& peer_id) const {
  std::lock_guard lock(mu_);
  auto it = peers_.find(peer_id);
  if (it == peers_.end()) throw Error(Errc::InvalidConfig, "unknown peer '" + peer_id + "'");
  return *it->second;
}

std::vector<std::string> Network::peer_ids() const {
  std::lock_guard lock(mu_);
  return peer_order_;
}

Network::Channel& Network::channel(const std::string& name) {
  return const_cast<Channel&>(std::as_const(*this).channel(name));
}

const Network::Channel& Network::channel(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = channels_.find(name);
  if (it == channels_.end()) throw Error(Errc::UnknownChannel, "unknown channel '" + name + "'");
  return *it->second;
}

ledger::TxPrecheck Network::make_precheck(const ChannelConfig& config) const {
  return [registry = registry_, policy = config.policy, name = config.name](const ledger::Transaction& tx) {
    if (tx.channel != name || tx.chaincode_id == "_config") return ValidationFlag::BadSignature;
    auto submitter = registry->find_identity(tx.submitter);
    if (!submitter || tx.client_signature.signer != tx.submitter ||
        !registry->verify(tx.client_signature, tx.signed_bytes())) {
      return ValidationFlag::BadSignature;
    }
    auto payload = tx.endorsed_payload();
    std::set<std::string> orgs;
    for (const auto& e : tx.endorsements) {
      auto signer = registry->find_identity(e.signature.signer);
      if (!signer || signer->role != identity::Role::Peer || signer->org_id != e.org_id ||
          !registry->verify(e.signature, payload)) {
        return ValidationFlag::BadSignature;
      }
      orgs.insert(e.org_id);
    }
    return policy.evaluate(orgs, submitter->org_id) ? ValidationFlag::Valid : ValidationFlag::PolicyFailure;
  };
}

void Network::create_channel(ChannelConfig config, bool join_member_peers) {
  if (config.name.empty()) throw Error(Errc::InvalidConfig, "channel name is empty");
  if (config.member_orgs.empty()) throw Error(Errc::InvalidConfig, "channel " + config.name + " has no member orgs");
  for (const auto& org : config.member_orgs) {
    if (!registry_->find_org(org)) throw Error(Errc::UnknownOrg, "unknown org '" + org + "' in channel " + config.name);
  }
  for (const auto& org : config.policy.referenced_orgs()) {
    if (!config.member_orgs.contains(org)) {
      throw Error(Errc::PolicyViolation, "policy of " + config.name + " names non-member org '" + org + "'");
    }
  }
  if (config.name == kDonationChannel) {
    auto gov = registry_->government();
    if (!gov || !config.policy.referenced_orgs().contains(gov->org_id)) {
      throw Error(Errc::PolicyViolation, std::string(kDonationChannel) + " policy must include the government org");
    }
  }
  config.ordering.validate();

  auto ch = std::make_unique<Channel>();
  ch->config = config;
  ch->genesis = genesis_block(config);
  ch->precheck = make_precheck(config);
  ch->orderer = std::make_unique<ordering::LocalOrderingCluster>(config.ordering, options_.transport);
  auto& ref = *ch;
  {
    std::lock_guard lock(mu_);
    if (channels_.contains(config.name)) throw Error(Errc::InvalidConfig, "channel " + config.name + " exists");
    channels_.emplace(config.name, std::move(ch));
  }
  if (join_member_peers) {
    for (const auto& id : peer_ids()) {
      if (config.member_orgs.contains(peer(id).org_id())) join_channel(id, config.name);
    }
  }
  ref.pipeline = std::thread([this, &ref] { run_pipeline(ref); });
}

void Network::join_channel(const std::string& peer_id, const std::string& channel_name) {
  auto& ch = channel(channel_name);
  auto& p = peer(peer_id);
  if (!ch.config.member_orgs.contains(p.org_id())) {
    throw Error(Errc::NotJoined, peer_id + " belongs to " + p.org_id() + ", not a member of " + channel_name);
  }
  std::lock_guard commit(ch.commit_mu);
  {
    std::shared_lock lock(ch.members_mu);
    for (auto* existing : ch.peers) {
      if (existing == &p) return;
    }
  }
  if (p.join(channel_name)) p.ledger(channel_name).commit_block(ch.genesis, ledger::accept_all);
  if (p.ledger(channel_name).store().block(0).header != ch.genesis.header) {
    throw Error(Errc::HashMismatch, peer_id + " holds a different genesis for " + channel_name);
  }
  for (const auto& [id, factory] : ch.factories) p.install(channel_name, factory());

  std::unique_lock lock(ch.members_mu);
  if (ch.peers.empty()) {
    ch.peers.push_back(&p);
    ch.base = p.ledger(channel_name).height() - 1 - ch.next_seq;
  } else {
    lock.unlock();
    auto& leader = *ch.peers.front();
    if (p.ledger(channel_name).height() > leader.ledger(channel_name).height()) {
      throw Error(Errc::ChainGap, peer_id + " is ahead of the channel on " + channel_name);
    }
    catch_up(ch, p);
    lock.lock();
    ch.peers.push_back(&p);
  }
  std::lock_guard hl(ch.height_mu);
  ch.height = ch.peers.front()->ledger(channel_name).height();
  ch.height_cv.notify_all();
}

void Network::catch_up(Channel& ch, Peer& p) {
  const auto& name = ch.config.name;
  auto& source = ch.peers.front()->ledger(name).store();
  auto& target = p.ledger(name);
  for (auto n = target.height(); n < source.height(); ++n) {
    auto block = source.block(n);
    block.metadata.validation_flags.clear();
    target.commit_block(std::move(block), ch.precheck);
  }
}

void Network::install_chaincode(const std::string& channel_name, const ChaincodeFactory& factory) {
  auto& ch = channel(channel_name);
  std::lock_guard commit(ch.commit_mu);
  auto id = factory()->id();
  ch.factories[id] = factory;
  if (std::find(ch.config.chaincodes.begin(), ch.config.chaincodes.end(), id) == ch.config.chaincodes.end()) {
    ch.config.chaincodes.push_back(id);
  }
  std::shared_lock lock(ch.members_mu);
  for (auto* p : ch.peers) p->install(channel_name, factory());
}

std::vector<std::string> Network::channels() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, _] : channels_) out.push_back(name);
  return out;
}

const ChannelConfig& Network::channel_config(const std::string& name) const { return channel(name).config; }

std::vector<std::string> Network::channel_peers(const std::string& name) const {
  const auto& ch = channel(name);
  std::shared_lock lock(ch.members_mu);
  std::vector<std::string> out;
  for (auto* p : ch.peers) out.push_back(p->id());
  return out;
}

bool Network::halted(const std::string& name) const { return channel(name).halted; }

std::uint64_t Network::height(const std::string& name) const {
  const auto& ch = channel(name);
  std::lock_guard lock(ch.height_mu);
  return ch.height;
}

bool Network::wait_for_height(const std::string& name, std::uint64_t h, std::chrono::milliseconds timeout) const {
  const auto& ch = channel(name);
  std::unique_lock lock(ch.height_mu);
  return ch.height_cv.wait_for(lock, timeout, [&] { return ch.height >= h; });
}

ordering::LocalOrderingCluster& Network::orderer(const std::string& name) { return *channel(name).orderer; }

void Network::run_pipeline(Channel& ch) {
  while (running_ && !ch.halted) {
    if (!ch.orderer->wait_for_height(ch.next_seq + 1, std::chrono::milliseconds(50))) continue;
    std::vector<ordering::DeliveredBatch> batches;
    try {
      batches = ch.orderer->deliver(ch.next_seq);
    } catch (const Error& e) {
      spdlog::warn("channel {}: deliver failed: {}", ch.config.name, e.what());
      continue;
    }
    for (const auto& batch : batches) {
      if (!running_ || ch.halted) return;
      commit_batch(ch, batch);
    }
  }
}

void Network::commit_batch(Channel& ch, const ordering::DeliveredBatch& batch) {
  const auto& name = ch.config.name;
  std::vector<ledger::Transaction> txs;
  txs.reserve(batch.batch.envelopes.size());
  for (const auto& env : batch.batch.envelopes) {
    try {
      auto tx = ledger::Transaction::from_bytes(env.payload);
      if (tx.tx_id != env.tx_id) throw Error(Errc::Decode, "envelope id differs from transaction id");
      txs.push_back(std::move(tx));
    } catch (const Error& e) {
      spdlog::warn("channel {}: dropping undecodable envelope {}: {}", name, env.tx_id, e.what());
    }
  }

  std::unique_lock commit(ch.commit_mu);
  std::vector<Peer*> peers;
  {
    std::shared_lock lock(ch.members_mu);
    peers = ch.peers;
  }
  if (peers.empty()) return;
  auto number = ch.base + batch.sequence + 1;
  auto block = ledger::Block::assemble(number, peers.front()->ledger(name).store().tip_hash(), std::move(txs),
                                       batch.batch.cut_time_ms);

  std::vector<std::vector<ValidationFlag>> flags(peers.size());
  std::vector<std::string> failures(peers.size());
  const auto count = static_cast<std::ptrdiff_t>(peers.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      flags[i] = peers[i]->ledger(name).commit_block(block, ch.precheck);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < peers.size(); ++i) {
    if (!failures[i].empty() || flags[i] != flags[0]) {
      spdlog::error("channel {}: halting at block {}: peer {} {}", name, number, peers[i]->id(),
                    failures[i].empty() ? "disagrees on validation flags" : failures[i]);
      ch.halted = true;
      return;
    }
  }
  ch.next_seq = batch.sequence + 1;
  commit.unlock();
  {
    std::lock_guard lock(ch.height_mu);
    ch.height = number + 1;
  }
  ch.height_cv.notify_all();

  std::vector<CommitEvent> events;
  events.reserve(block.transactions.size());
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    const auto& tx = block.transactions[i];
    CommitEvent e;
    e.channel = name;
    e.tx_id = tx.tx_id;
    e.chaincode_id = tx.chaincode_id;
    e.method = tx.method;
    e.submitter = tx.submitter;
    e.block_number = number;
    e.tx_index = static_cast<std::uint32_t>(i);
    e.flag = flags[0][i];
    e.block_timestamp_ms = block.metadata.timestamp_ms;
    if (e.flag == ValidationFlag::Valid) e.event = tx.event;
    events.push_back(std::move(e));
  }
  std::vector<TxStatus> done;
  done.reserve(events.size());
  for (const auto& e : events) {
    done.push_back(TxStatus{e.tx_id, e.flag, e.block_number, e.tx_index, e.block_timestamp_ms, e.event});
  }
  // Published before waiters wake, so a flush after a commit wait sees it.
  ch.bus.publish(std::move(events));
  std::lock_guard lock(ch.waiters_mu);
  for (const auto& s : done) {
    auto [first, last] = ch.waiters.equal_range(s.tx_id);
    for (auto it = first; it != last; ++it) it->second->set_value(s);
    ch.waiters.erase(first, last);
  }
}

SignedProposal Network::propose(const ClientIdentity& client, const std::string& channel_name,
                                const std::string& chaincode, const std::string& method,
                                std::vector<std::string> args) const {
  SignedProposal sp;
  sp.proposal.tx_id = crypto::random_hex(32);
  sp.proposal.channel = channel_name;
  sp.proposal.chaincode_id = chaincode;
  sp.proposal.method = method;
  sp.proposal.args = std::move(args);
  sp.proposal.submitter = client.identity->identity_id;
  sp.proposal.timestamp_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
          .count();
  sp.signature = identity::sign_as(*client.identity, *client.key, sp.proposal.digest());
  return sp;
}

ProposalResponse Network::endorse(const std::string& peer_id, const SignedProposal& proposal) const {
  const auto& ch = channel(proposal.proposal.channel);
  const auto& p = peer(peer_id);
  {
    std::shared_lock lock(ch.members_mu);
    if (std::find(ch.peers.begin(), ch.peers.end(), &p) == ch.peers.end()) {
      throw Error(Errc::NotJoined, peer_id + " has not joined " + proposal.proposal.channel);
    }
  }
  return p.endorse(proposal);
}

std::vector<ProposalResponse> Network::endorse_for_policy(const SignedProposal& proposal,
                                                          const std::vector<std::string>& peers) const {
  std::vector<std::string> targets = peers;
  if (targets.empty()) {
    const auto& ch = channel(proposal.proposal.channel);
    auto submitter = registry_->identity(proposal.proposal.submitter);
    auto orgs = ch.config.policy.choose_endorsers(submitter->org_id);
    std::shared_lock lock(ch.members_mu);
    for (const auto& org : orgs) {
      std::vector<Peer*> candidates;
      for (auto* p : ch.peers) {
        if (p->org_id() == org) candidates.push_back(p);
      }
      if (candidates.empty()) {
        throw Error(Errc::PolicyViolation, "no peer of org '" + org + "' on " + proposal.proposal.channel +
                                               " to satisfy " + ch.config.policy.to_string());
      }
      targets.push_back(candidates[round_robin_++ % candidates.size()]->id());
    }
  }
  std::vector<ProposalResponse> out;
  out.reserve(targets.size());
  for (const auto& id : targets) out.push_back(endorse(id, proposal));
  return out;
}

std::string Network::submit(const ClientIdentity& client, const SignedProposal& proposal,
                            const std::vector<ProposalResponse>& responses) {
  if (responses.empty()) throw Error(Errc::EndorsementMismatch, "no endorsements");
  auto payload = responses.front().payload();
  for (const auto& r : responses) {
    if (r.payload() != payload) {
      throw Error(Errc::EndorsementMismatch, "endorsements from " + responses.front().peer_id + " and " + r.peer_id +
                                                 " disagree for " + proposal.proposal.tx_id);
    }
  }
  const auto& p = proposal.proposal;
  ledger::Transaction tx;
  tx.tx_id = p.tx_id;
  tx.channel = p.channel;
  tx.chaincode_id = p.chaincode_id;
  tx.method = p.method;
  tx.args = p.args;
  tx.rwset = responses.front().rwset;
  tx.event = responses.front().event;
  for (const auto& r : responses) tx.endorsements.push_back(r.endorsement);
  tx.submitter = p.submitter;
  tx.timestamp_ms = p.timestamp_ms;
  tx.client_signature = identity::sign_as(*client.identity, *client.key, tx.signed_bytes());

  auto result = channel(p.channel).orderer->submit(ordering::Envelope{tx.tx_id, tx.to_bytes()});
  if (result.status != ordering::SubmitStatus::Ack) {
    throw Error(Errc::OrdererUnavailable, "ordering refused " + tx.tx_id + ": " +
                                              std::string(ordering::to_string(result.status)) + " " + result.detail);
  }
  return tx.tx_id;
}

std::shared_future<TxStatus> Network::watch(const std::string& channel_name, const std::string& tx_id) {
  auto& ch = channel(channel_name);
  auto promise = std::make_shared<std::promise<TxStatus>>();
  std::shared_future<TxStatus> future = promise->get_future().share();
  std::lock_guard lock(ch.waiters_mu);
  if (auto done = status(channel_name, tx_id)) {
    promise->set_value(*done);
    return future;
  }
  ch.waiters.emplace(tx_id, std::move(promise));
  return future;
}

std::optional<TxStatus> Network::status(const std::string& channel_name, const std::string& tx_id) const {
  const auto& ch = channel(channel_name);
  Peer* reference = nullptr;
  {
    std::shared_lock lock(ch.members_mu);
    if (ch.peers.empty()) return std::nullopt;
    reference = ch.peers.front();
  }
  const auto& store = reference->ledger(channel_name).store();
  auto location = store.find_tx(tx_id);
  if (!location) return std::nullopt;
  auto block = store.block(location->block);
  const auto& tx = block.transactions.at(location->index);
  TxStatus s{tx_id, location->flag, location->block, static_cast<std::uint32_t>(location->index),
             block.metadata.timestamp_ms, std::nullopt};
  if (s.flag == ValidationFlag::Valid) s.event = tx.event;
  return s;
}

InvokeResult Network::invoke(const ClientIdentity& client, const std::string& channel_name,
                             const std::string& chaincode, const std::string& method, std::vector<std::string> args,
                             std::chrono::milliseconds timeout, const std::vector<std::string>& peers) {
  auto proposal = propose(client, channel_name, chaincode, method, std::move(args));
  auto responses = endorse_for_policy(proposal, peers);
  auto future = watch(channel_name, proposal.proposal.tx_id);
  InvokeResult out;
  out.tx_id = submit(client, proposal, responses);
  out.result = responses.front().result;
  if (future.wait_for(timeout) == std::future_status::ready) out.status = future.get();
  return out;
}

std::string Network::query(const ClientIdentity& client, const std::string& channel_name,
                           const std::string& chaincode, const std::string& method, std::vector<std::string> args,
                           const std::optional<std::string>& peer_id) const {
  auto proposal = propose(client, channel_name, chaincode, method, std::move(args));
  if (peer_id) return endorse(*peer_id, proposal).result;
  const auto& ch = channel(channel_name);
  Peer* chosen = nullptr;
  {
    std::shared_lock lock(ch.members_mu);
    if (ch.peers.empty()) throw Error(Errc::NotJoined, "no peers on " + channel_name);
    std::vector<Peer*> own;
    for (auto* p : ch.peers) {
      if (p->org_id() == client.identity->org_id) own.push_back(p);
    }
    const auto& pool = own.empty() ? ch.peers : own;
    chosen = pool[round_robin_++ % pool.size()];
  }
  return chosen->endorse(proposal).result;
}

std::uint64_t Network::subscribe(const std::string& channel_name, EventFilter filter, EventBus::Handler handler) {
  return channel(channel_name).bus.subscribe(std::move(filter), std::move(handler));
}

void Network::unsubscribe(const std::string& channel_name, std::uint64_t id) {
  channel(channel_name).bus.unsubscribe(id);
}

void Network::flush_events(const std::string& channel_name) { channel(channel_name).bus.flush(); }

}  // namespace donorchain::network
