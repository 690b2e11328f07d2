#include "donorchain/network/chaincode.hpp"

#include "donorchain/common/error.hpp"

namespace donorchain::network {

ChaincodeStub::ChaincodeStub(const ledger::WorldState& state, const identity::Identity& caller,
                             Context context, Authorizer authorizer,
                             const identity::AuthorizationMatrix& matrix)
    : snapshot_(state.snapshot()),
      caller_(caller),
      context_(std::move(context)),
      authorizer_(std::move(authorizer)),
      matrix_(matrix) {}

std::optional<std::string> ChaincodeStub::get_state(std::string_view key) {
  if (!reads_.contains(key)) reads_.emplace(std::string(key), snapshot_.version(key));
  return snapshot_.get(key);
}

std::vector<std::pair<std::string, std::string>> ChaincodeStub::get_state_by_prefix(std::string_view prefix) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto& entry : snapshot_.live_with_prefix(prefix)) {
    if (!reads_.contains(entry.key)) reads_.emplace(entry.key, entry.version);
    out.emplace_back(std::move(entry.key), std::move(entry.value));
  }
  return out;
}

void ChaincodeStub::put_state(const std::string& key, std::string value) {
  writes_.insert_or_assign(key, std::move(value));
}

void ChaincodeStub::del_state(const std::string& key) { writes_.insert_or_assign(key, std::nullopt); }

void ChaincodeStub::set_event(std::string name, std::string payload) {
  event_ = ledger::ChaincodeEvent{std::move(name), std::move(payload)};
}

bool ChaincodeStub::allowed(identity::Action action, const identity::Resource& resource) const {
  return authorizer_(action, resource) == identity::Decision::Allow;
}

void ChaincodeStub::require(identity::Action action, const identity::Resource& resource) const {
  if (!allowed(action, resource)) {
    throw Error(Errc::Unauthorized, std::string(identity::to_string(caller_.role)) + " " + caller_.identity_id +
                                        " may not " + std::string(identity::to_string(action)) +
                                        (resource.subject_id ? " " + *resource.subject_id : std::string()));
  }
}

bool ChaincodeStub::role_may(identity::Action action) const { return matrix_.role_may(caller_.role, action); }

ledger::ReadWriteSet ChaincodeStub::take_rwset() {
  ledger::ReadWriteSet rw;
  for (auto& [key, version] : reads_) rw.reads.push_back({key, version});
  for (auto& [key, value] : writes_) rw.writes.push_back({key, std::move(value)});
  reads_.clear();
  writes_.clear();
  rw.normalize();
  return rw;
}

}  // namespace donorchain::network
