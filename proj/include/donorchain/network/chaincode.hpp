#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "donorchain/identity/authorization.hpp"
#include "donorchain/identity/identity.hpp"
#include "donorchain/ledger/types.hpp"
#include "donorchain/ledger/world_state.hpp"

namespace donorchain::network {

// What a chaincode sees of the ledger during simulation. Reads come from a
// pinned snapshot and are recorded with the version observed; writes are
// buffered into the write set and are not visible to later reads in the
// same invocation.
class ChaincodeStub {
 public:
  using Authorizer = std::function<identity::Decision(identity::Action, const identity::Resource&)>;

  struct Context {
    std::string channel;
    std::string tx_id;
    std::int64_t timestamp_ms = 0;
    std::uint64_t snapshot_height = 0;
  };

  ChaincodeStub(const ledger::WorldState& state, const identity::Identity& caller, Context context,
                Authorizer authorizer, const identity::AuthorizationMatrix& matrix);

  std::optional<std::string> get_state(std::string_view key);
  // Live entries under the prefix in key order; each is recorded as a read.
  std::vector<std::pair<std::string, std::string>> get_state_by_prefix(std::string_view prefix);
  void put_state(const std::string& key, std::string value);
  void del_state(const std::string& key);
  void set_event(std::string name, std::string payload);

  const identity::Identity& caller() const { return caller_; }
  const Context& context() const { return context_; }

  // Throws Error(Unauthorized) on deny.
  void require(identity::Action action, const identity::Resource& resource) const;
  bool allowed(identity::Action action, const identity::Resource& resource) const;
  // Whether the caller's role may perform the action on some resource.
  bool role_may(identity::Action action) const;

  ledger::ReadWriteSet take_rwset();
  const std::optional<ledger::ChaincodeEvent>& event() const { return event_; }

 private:
  ledger::WorldState::Snapshot snapshot_;
  const identity::Identity& caller_;
  Context context_;
  Authorizer authorizer_;
  const identity::AuthorizationMatrix& matrix_;
  std::map<std::string, std::optional<ledger::StateVersion>, std::less<>> reads_;
  std::map<std::string, std::optional<std::string>, std::less<>> writes_;
  std::optional<ledger::ChaincodeEvent> event_;
};

// A deterministic contract. invoke returns the response payload (JSON text
// for the donation contract) or throws donorchain::Error.
class Chaincode {
 public:
  virtual ~Chaincode() = default;
  virtual std::string id() const = 0;
  virtual std::string invoke(ChaincodeStub& stub, std::string_view method,
                             const std::vector<std::string>& args) = 0;
};

using ChaincodeFactory = std::function<std::shared_ptr<Chaincode>()>;

}  // namespace donorchain::network
