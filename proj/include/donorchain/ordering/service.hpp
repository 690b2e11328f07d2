#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "donorchain/ordering/batch.hpp"
#include "donorchain/ordering/config.hpp"
#include "donorchain/ordering/orderer.hpp"
#include "donorchain/ordering/tcp.hpp"

namespace donorchain::ordering {

// The submit/deliver contract the network layer depends on.
class OrderingService {
 public:
  virtual ~OrderingService() = default;

  // Ack means the service owns the envelope and will deliver it exactly once.
  // Throws Error(OrdererUnavailable) without a live majority.
  virtual SubmitResult submit(const Envelope& envelope) = 0;
  virtual std::vector<DeliveredBatch> deliver(std::uint64_t from) const = 0;
  virtual std::uint64_t height() const = 0;
  virtual bool wait_for_height(std::uint64_t height, std::chrono::milliseconds timeout) const = 0;
};

enum class TransportKind { InProcess, Tcp };

// Runs every member of an ordering cluster in this process, one event-loop
// thread each. Members talk over the in-process transport or over loopback
// TCP frames. The client side keeps each submitted envelope until some
// member has delivered it and resubmits it when the member that accepted it
// stops leading, which is what carries transactions across a leader crash.
class LocalOrderingCluster : public OrderingService {
 public:
  explicit LocalOrderingCluster(OrderingConfig config, TransportKind transport = TransportKind::InProcess,
                                std::uint64_t seed = 1);
  ~LocalOrderingCluster() override;

  SubmitResult submit(const Envelope& envelope) override;
  std::vector<DeliveredBatch> deliver(std::uint64_t from) const override;
  std::uint64_t height() const override;
  bool wait_for_height(std::uint64_t height, std::chrono::milliseconds timeout) const override;

  std::vector<NodeId> members() const;
  std::optional<NodeId> leader() const;
  // Waits until some live member leads. Returns its id.
  std::optional<NodeId> wait_for_leader(std::chrono::milliseconds timeout) const;
  const OrdererNode& node(const NodeId& id) const;
  bool alive(const NodeId& id) const;
  std::optional<std::uint16_t> port(const NodeId& id) const;

  // Stops a member's loop; messages to it are dropped until restart.
  void kill(const NodeId& id);
  void restart(const NodeId& id);
  void stop();

  std::size_t outstanding() const;

 private:
  struct Member;

  std::int64_t now_ms() const;
  void run_member(Member& m);
  void route(const NodeId& from, std::vector<RaftMessage> messages);
  void deliver_local(Member& m, RaftMessage message);
  std::optional<SubmitResult> submit_to(Member& m, const Envelope& envelope);
  SubmitResult try_submit(const Envelope& envelope, NodeId* accepted_by);
  void retry_loop();
  Member* find(const NodeId& id) const;
  std::size_t live_count() const;
  const Member* reference() const;

  OrderingConfig config_;
  TransportKind transport_;
  std::chrono::steady_clock::time_point epoch_;
  // Wall-clock at construction; node clocks advance from it monotonically so
  // batch cut times double as block timestamps.
  std::int64_t wall_epoch_ms_;
  std::vector<std::unique_ptr<Member>> members_;
  std::atomic<bool> running_{true};

  struct Outstanding {
    Envelope envelope;
    NodeId accepted_by;
    std::int64_t submitted_ms = 0;
  };
  mutable std::mutex client_mu_;
  std::condition_variable client_cv_;
  std::map<std::string, Outstanding> outstanding_;
  std::optional<NodeId> leader_cache_;
  std::thread retry_thread_;
};

}  // namespace donorchain::ordering
