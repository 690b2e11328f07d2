#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "donorchain/ledger/types.hpp"

namespace donorchain::network {

// One per committed transaction, valid or not. `event` is only carried for
// Valid transactions.
struct CommitEvent {
  std::string channel;
  std::string tx_id;
  std::string chaincode_id;
  std::string method;
  std::string submitter;
  std::uint64_t block_number = 0;
  std::uint32_t tx_index = 0;
  ledger::ValidationFlag flag = ledger::ValidationFlag::NotValidated;
  std::int64_t block_timestamp_ms = 0;
  std::optional<ledger::ChaincodeEvent> event;
};

struct EventFilter {
  std::optional<std::string> tx_id;
  std::optional<std::string> event_name;

  bool matches(const CommitEvent& e) const;
};

// Fans commit events out to subscribers on its own thread so a slow handler
// never holds up the committer.
class EventBus {
 public:
  using Handler = std::function<void(const CommitEvent&)>;

  EventBus();
  EventBus(const EventBus&) = delete;
  EventBus& operator=(const EventBus&) = delete;
  ~EventBus();

  std::uint64_t subscribe(EventFilter filter, Handler handler);
  void unsubscribe(std::uint64_t id);
  void publish(std::vector<CommitEvent> events);
  // Blocks until everything published so far has been handed to handlers.
  void flush();
  void stop();

 private:
  void run();

  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<CommitEvent> queue_;
  std::map<std::uint64_t, std::pair<EventFilter, Handler>> subscribers_;
  std::uint64_t next_id_ = 1;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace donorchain::network
