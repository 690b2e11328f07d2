#include "donorchain/bench/targets.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

#include "donorchain/common/bytes.hpp"
#include "donorchain/common/error.hpp"
#include "donorchain/crypto/crypto.hpp"
#include "donorchain/ledger/types.hpp"

namespace donorchain::bench {

using nlohmann::json;

namespace {

constexpr const char* kOrgans[] = {"kidney", "liver", "heart", "lung", "pancreas"};
constexpr const char* kBlood[] = {"a+", "a-", "b+", "b-", "ab+", "ab-", "o+", "o-"};
constexpr const char* kGender[] = {"m", "f", "o"};

std::string bench_id(const std::string& run_tag, std::uint64_t index) {
  return "BENCH_" + run_tag + "_" + std::to_string(index);
}

// Runs fn(i) for i in [0, n) over a few threads and rethrows the first failure.
template <typename Fn>
void fan_out(std::uint32_t n, Fn fn) {
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> threads;
  for (int t = 0; t < 16; ++t) {
    threads.emplace_back([&] {
      for (std::uint32_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

json bench_donor(const std::string& id, std::uint64_t index) {
  return {{"ID", id},
          {"firstName", "Bench"},
          {"lastName", "Donor" + std::to_string(index)},
          {"age", 18 + static_cast<int>(index % 60)},
          {"phoneNumber", "555-" + std::to_string(1000 + index % 9000)},
          {"address", std::to_string(index % 500) + " Bench Rd"},
          {"organRequired", kOrgans[index % 5]},
          {"bloodgroup", kBlood[index % 8]},
          {"gender", kGender[index % 3]},
          {"medhistory", "none"}};
}

NetworkTarget::NetworkTarget(network::Network& net, network::ClientIdentity client, std::string channel,
                             std::string chaincode, std::chrono::milliseconds commit_timeout)
    : net_(net),
      client_(std::move(client)),
      channel_(std::move(channel)),
      chaincode_(std::move(chaincode)),
      commit_timeout_(commit_timeout) {}

std::string NetworkTarget::describe() const {
  return "network " + channel_ + "/" + chaincode_ + " as " + client_.identity->identity_id;
}

void NetworkTarget::setup(const WorkloadConfig& config) {
  run_tag_ = std::to_string(config.seed) + crypto::random_hex(4);
  read_pool_.clear();
  if (config.operation != Operation::ReadRecord) return;
  auto n = std::min(config.total_tx, kReadPoolSize);
  read_pool_.resize(n);
  fan_out(n, [&](std::uint32_t i) {
    auto id = bench_id(run_tag_ + "R", i);
    auto r = net_.invoke(client_, channel_, chaincode_, "addDonor", {bench_donor(id, i).dump()}, commit_timeout_);
    if (!r.status || r.status->flag != ledger::ValidationFlag::Valid) {
      throw Error(Errc::TargetUnreachable, "seeding read pool failed for " + id);
    }
    read_pool_[i] = id;
  });
}

std::string NetworkTarget::prepare(Operation op, std::uint64_t index) {
  if (op == Operation::ReadRecord) return read_pool_[index % read_pool_.size()];
  return bench_donor(bench_id(run_tag_, index), index).dump();
}

TxOutcome NetworkTarget::send(Operation op, const std::string& request) {
  if (op == Operation::ReadRecord) {
    net_.query(client_, channel_, chaincode_, "getDonor", {request});
    return {true, {}, {}};
  }
  auto r = net_.invoke(client_, channel_, chaincode_, "addDonor", {request}, commit_timeout_);
  if (!r.status) return {false, r.tx_id, "CommitTimeout"};
  if (r.status->flag != ledger::ValidationFlag::Valid) {
    return {false, r.tx_id, std::string(ledger::to_string(r.status->flag))};
  }
  return {true, r.tx_id, {}};
}

HttpTarget::HttpTarget(std::string host, int port, std::string identity_id, std::string key_seed_hex)
    : host_(std::move(host)),
      port_(port),
      identity_id_(std::move(identity_id)),
      key_seed_hex_(std::move(key_seed_hex)) {}

std::string HttpTarget::describe() const {
  return "http://" + host_ + ":" + std::to_string(port_) + " as " + identity_id_;
}

void HttpTarget::setup(const WorkloadConfig& config) {
  httplib::Client cli(host_, port_);
  cli.set_connection_timeout(std::chrono::seconds(5));
  auto first = cli.Post("/auth/login", json{{"identity", identity_id_}}.dump(), "application/json");
  if (!first) throw Error(Errc::TargetUnreachable, describe() + ": " + httplib::to_string(first.error()));
  if (first->status != 200) throw Error(Errc::TargetUnreachable, describe() + ": login refused: " + first->body);
  auto challenge = json::parse(first->body);
  auto key = crypto::SigningKey::from_seed_hex(key_seed_hex_);
  auto sig = crypto::sign(key, as_bytes(challenge.at("message").get<std::string>()));
  auto second = cli.Post("/auth/login",
                         json{{"identity", identity_id_}, {"nonce", challenge.at("nonce")}, {"signature", to_hex(sig)}}
                             .dump(),
                         "application/json");
  if (!second || second->status != 200) {
    throw Error(Errc::TargetUnreachable, describe() + ": login failed" + (second ? ": " + second->body : ""));
  }
  token_ = json::parse(second->body).at("token").get<std::string>();

  run_tag_ = std::to_string(config.seed) + crypto::random_hex(4);
  read_pool_.clear();
  if (config.operation != Operation::ReadRecord) return;
  auto n = std::min(config.total_tx, kReadPoolSize);
  read_pool_.resize(n);
  fan_out(n, [&](std::uint32_t i) {
    auto id = bench_id(run_tag_ + "R", i);
    auto outcome = send(Operation::CreateRecord, bench_donor(id, i).dump());
    if (!outcome.success) throw Error(Errc::TargetUnreachable, "seeding read pool failed: " + outcome.fail_reason);
    read_pool_[i] = id;
  });
}

std::string HttpTarget::prepare(Operation op, std::uint64_t index) {
  if (op == Operation::ReadRecord) return read_pool_[index % read_pool_.size()];
  return bench_donor(bench_id(run_tag_, index), index).dump();
}

TxOutcome HttpTarget::send(Operation op, const std::string& request) {
  httplib::Client cli(host_, port_);
  cli.set_read_timeout(std::chrono::seconds(60));
  cli.set_bearer_token_auth(token_);
  auto res = op == Operation::ReadRecord ? cli.Get("/donors/" + request)
                                         : cli.Post("/donors", request, "application/json");
  if (!res) return {false, {}, "Http" + httplib::to_string(res.error())};
  if (op == Operation::ReadRecord) {
    if (res->status == 200) return {true, {}, {}};
    return {false, {}, "HTTP " + std::to_string(res->status)};
  }
  auto body = json::parse(res->body, nullptr, false);
  std::string tx_id = body.is_object() ? body.value("tx_id", "") : "";
  if (res->status == 201) return {true, tx_id, {}};
  if (res->status == 202) return {false, tx_id, "CommitTimeout"};
  std::string reason = body.is_object() ? body.value("flag", body.value("error", "")) : "";
  return {false, tx_id, reason.empty() ? "HTTP " + std::to_string(res->status) : reason};
}

}  // namespace donorchain::bench
