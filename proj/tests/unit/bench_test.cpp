#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <thread>

#include "donorchain/access/gateway.hpp"
#include "donorchain/access/server.hpp"
#include "donorchain/bench/driver.hpp"
#include "donorchain/bench/metrics.hpp"
#include "donorchain/bench/report.hpp"
#include "donorchain/bench/targets.hpp"
#include "donorchain/bench/workload.hpp"
#include "donorchain/common/error.hpp"
#include "../support/test_network.hpp"

using namespace donorchain;
using namespace donorchain::bench;

namespace {

constexpr std::int64_t kSec = 1'000'000'000;

TxObservation obs(std::int64_t issued, std::int64_t completed, bool ok = true) {
  return {"tx", issued, completed, ok, ok ? "" : "MVCCConflict"};
}

WorkloadConfig fixed_load(std::uint32_t load, std::uint32_t total) {
  WorkloadConfig c;
  c.name = "load" + std::to_string(load);
  c.mode = Mode::FixedLoad;
  c.load = load;
  c.total_tx = total;
  return c;
}

WorkloadConfig fixed_rate(double tps, std::uint32_t total, std::uint32_t workers = 1) {
  WorkloadConfig c;
  c.name = "rate";
  c.mode = Mode::FixedRate;
  c.rate_tps = tps;
  c.total_tx = total;
  c.workers = workers;
  return c;
}

class StubTarget final : public Target {
 public:
  explicit StubTarget(std::chrono::milliseconds service, std::chrono::milliseconds prepare_cost = {})
      : service_(service), prepare_cost_(prepare_cost) {}

  std::string describe() const override { return "stub"; }
  void setup(const WorkloadConfig&) override {}
  std::string prepare(Operation, std::uint64_t index) override {
    if (prepare_cost_.count() > 0) std::this_thread::sleep_for(prepare_cost_);
    return std::to_string(index);
  }
  TxOutcome send(Operation, const std::string& request) override {
    auto now = ++active_;
    auto seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(service_);
    --active_;
    return {true, request, {}};
  }

  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};

 private:
  std::chrono::milliseconds service_;
  std::chrono::milliseconds prepare_cost_;
};

class UnreachableTarget final : public Target {
 public:
  std::string describe() const override { return "nowhere"; }
  void setup(const WorkloadConfig&) override { throw std::runtime_error("connection refused"); }
  std::string prepare(Operation, std::uint64_t) override { return {}; }
  TxOutcome send(Operation, const std::string&) override { return {}; }
};

}  // namespace

TEST_CASE("latency statistics over three transactions") {
  std::vector<TxObservation> v{obs(0, 1 * kSec), obs(0, 2 * kSec), obs(0, 3 * kSec)};
  for (const auto& m : {aggregate_serial(v), aggregate_parallel(v)}) {
    CHECK(m.latency_min_s == doctest::Approx(1.0));
    CHECK(m.latency_avg_s == doctest::Approx(2.0));
    CHECK(m.latency_max_s == doctest::Approx(3.0));
    CHECK(m.succeeded == 3);
  }
}

TEST_CASE("throughput is successes over the observation window") {
  std::vector<TxObservation> v;
  for (int i = 0; i < 1000; ++i) v.push_back(obs(i * kSec / 100, i * kSec / 100 + kSec / 100));
  auto m = aggregate_serial(v);
  CHECK(m.window_s == doctest::Approx(10.0));
  CHECK(m.throughput_tps == doctest::Approx(100.0));
  CHECK(m.send_rate_tps == doctest::Approx(1000.0 / 9.99));
}

TEST_CASE("failures count toward send rate but not throughput or latency") {
  std::vector<TxObservation> v{obs(0, kSec), obs(kSec, 5 * kSec, false), obs(2 * kSec, 4 * kSec)};
  auto m = aggregate_serial(v);
  CHECK(m.issued == 3);
  CHECK(m.failed == 1);
  CHECK(m.fail_reasons.at("MVCCConflict") == 1);
  CHECK(m.throughput_tps == doctest::Approx(2.0 / 5.0));
  CHECK(m.send_rate_tps == doctest::Approx(3.0 / 2.0));
  CHECK(m.latency_max_s == doctest::Approx(2.0));
}

TEST_CASE("single issue instant falls back to the full window") {
  std::vector<TxObservation> v{obs(0, 2 * kSec), obs(0, 4 * kSec)};
  auto m = aggregate_serial(v);
  CHECK(m.send_window_s == 0.0);
  CHECK(m.send_rate_tps == doctest::Approx(0.5));
}

TEST_CASE("all failed leaves latency at zero") {
  std::vector<TxObservation> v{obs(0, kSec, false)};
  auto m = aggregate_parallel(v);
  CHECK(m.succeeded == 0);
  CHECK(m.latency_avg_s == 0.0);
  CHECK(m.throughput_tps == 0.0);
}

TEST_CASE("empty observation sets are rejected") {
  std::vector<TxObservation> none;
  CHECK_THROWS_AS(aggregate_serial(none), Error);
  try {
    aggregate_parallel(none);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyObservations);
  }
}

TEST_CASE("parallel aggregation agrees with serial and a direct recomputation") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 100; ++round) {
    std::vector<TxObservation> v(1 + rng() % 5000);
    for (auto& o : v) {
      o.issued_ns = static_cast<std::int64_t>(rng() % (60 * kSec));
      o.completed_ns = o.issued_ns + static_cast<std::int64_t>(rng() % (5 * kSec));
      o.success = rng() % 10 != 0;
      if (!o.success) o.fail_reason = "MVCCConflict";
    }
    auto s = aggregate_serial(v);
    auto p = aggregate_parallel(v);

    std::vector<double> lat;
    for (const auto& o : v) {
      if (o.success) lat.push_back(static_cast<double>(o.completed_ns - o.issued_ns) / 1e9);
    }
    auto first = std::min_element(v.begin(), v.end(), [](auto& a, auto& b) { return a.issued_ns < b.issued_ns; });
    auto last_done =
        std::max_element(v.begin(), v.end(), [](auto& a, auto& b) { return a.completed_ns < b.completed_ns; });
    double window = static_cast<double>(last_done->completed_ns - first->issued_ns) / 1e9;
    double tput = window > 0 ? static_cast<double>(lat.size()) / window : 0.0;
    double avg = lat.empty() ? 0.0 : std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());

    for (const auto& m : {s, p}) {
      CHECK(m.succeeded == lat.size());
      CHECK(std::abs(m.throughput_tps - tput) <= 1e-9 * std::max(1.0, tput));
      CHECK(std::abs(m.latency_avg_s - avg) <= 1e-9);
      if (!lat.empty()) {
        CHECK(std::abs(m.latency_min_s - *std::min_element(lat.begin(), lat.end())) <= 1e-9);
        CHECK(std::abs(m.latency_max_s - *std::max_element(lat.begin(), lat.end())) <= 1e-9);
      }
    }
    CHECK(std::abs(s.send_rate_tps - p.send_rate_tps) <= 1e-9 * s.send_rate_tps);
  }
}

TEST_CASE("workload configs reject contradictory parameters") {
  auto c = fixed_load(4, 10);
  CHECK_NOTHROW(c.validate());
  c.rate_tps = 10;
  CHECK_THROWS_AS(c.validate(), Error);

  auto r = fixed_rate(50, 10);
  CHECK_NOTHROW(r.validate());
  r.rate_tps = 0;
  CHECK_THROWS_AS(r.validate(), Error);
  r.rate_tps = 50;
  r.total_tx = 0;
  CHECK_THROWS_AS(r.validate(), Error);

  CHECK_THROWS_AS(WorkloadConfig::parse_rounds("operation: create\nmode: fixed-load\nload: 0\n"), Error);
  CHECK_THROWS_AS(WorkloadConfig::parse_rounds("operation: fly\nmode: fixed-load\nload: 2\n"), Error);
  CHECK_THROWS_AS(WorkloadConfig::parse_rounds("operation: create\nmode: fixed-rate\n"), Error);
}

TEST_CASE("workload files hold a list of rounds") {
  auto rounds = WorkloadConfig::parse_rounds(R"(
rounds:
  - {name: create-50, operation: create, mode: fixed-load, load: 50, total_tx: 500}
  - {name: read-100, operation: read, mode: fixed-rate, rate_tps: 100, total_tx: 300, workers: 2}
)");
  REQUIRE(rounds.size() == 2);
  CHECK(rounds[0].operation == Operation::CreateRecord);
  CHECK(rounds[0].load == 50u);
  CHECK(rounds[1].mode == Mode::FixedRate);
  CHECK(rounds[1].rate_tps == 100.0);
  CHECK(rounds[1].workers == 2u);
  CHECK(WorkloadConfig::from_json(rounds[1].to_json()).to_json() == rounds[1].to_json());
}

TEST_CASE("fixed load never exceeds the configured backlog") {
  StubTarget stub(std::chrono::milliseconds(5));
  auto result = run_round(stub, fixed_load(5, 60));
  CHECK(result.max_in_flight <= 5u);
  CHECK(result.max_in_flight >= 1u);
  CHECK(stub.peak_.load() <= 5);
  auto m = aggregate_serial(result.observations);
  CHECK(m.succeeded == 60);
  CHECK(m.latency_min_s >= 0.005);
}

TEST_CASE("fixed rate holds the configured send rate") {
  StubTarget stub(std::chrono::milliseconds(10));
  auto result = run_round(stub, fixed_rate(200, 400));
  auto m = aggregate_serial(result.observations);
  CHECK(m.succeeded == 400);
  CHECK(m.send_rate_tps == doctest::Approx(200).epsilon(0.02));
  // Open loop: a slow target accumulates work instead of slowing issue.
  CHECK(result.max_in_flight >= 2u);
}

TEST_CASE("a slow issuer reports the rate it achieved") {
  StubTarget stub(std::chrono::milliseconds(1), std::chrono::milliseconds(5));
  auto result = run_round(stub, fixed_rate(800, 100));
  auto m = aggregate_serial(result.observations);
  CHECK(m.send_rate_tps < 800 * 0.5);
}

TEST_CASE("unreachable targets fail the round") {
  UnreachableTarget t;
  try {
    run_round(t, fixed_load(1, 1));
    FAIL("expected TargetUnreachable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TargetUnreachable);
  }
}

TEST_CASE("report tables and json") {
  StubTarget stub(std::chrono::milliseconds(1));
  BenchmarkReport report{"stub", {}};
  report.rounds.push_back(RoundReport::from(run_round(stub, fixed_load(2, 10))));
  report.rounds.push_back(RoundReport::from(run_round(stub, fixed_rate(100, 10))));
  auto text = report.render_text();
  CHECK(text.find("Transaction Load") != std::string::npos);
  CHECK(text.find("Configured Send Rate (TPS)") != std::string::npos);
  CHECK(text.find("Achieved Send Rate (TPS)") != std::string::npos);
  CHECK(text.find("Throughput (TPS)") != std::string::npos);
  auto back = BenchmarkReport::from_json(report.to_json());
  CHECK(back.to_json() == report.to_json());
}

TEST_CASE("network target creates and reads donors") {
  auto boot = testing::make_demo(1);
  NetworkTarget target(*boot.network, boot.wallet.at("staffA"), "donation-system");
  auto create = aggregate_serial(run_round(target, fixed_load(8, 40)).observations);
  CHECK(create.succeeded == 40);
  auto read_cfg = fixed_load(4, 60);
  read_cfg.operation = Operation::ReadRecord;
  auto read = aggregate_serial(run_round(target, read_cfg).observations);
  CHECK(read.succeeded == 60);
  CHECK(read.latency_avg_s < create.latency_avg_s);
}

TEST_CASE("http target logs in and drives the gateway") {
  auto boot = testing::make_demo(1);
  access::Gateway gateway(*boot.network, boot.wallet, {});
  access::RestServer server(gateway);
  auto port = server.start();
  HttpTarget target("127.0.0.1", port, "staffA", boot.seeds.at("staffA"));
  auto create = aggregate_serial(run_round(target, fixed_load(4, 20)).observations);
  CHECK(create.succeeded == 20);
  auto read_cfg = fixed_rate(50, 30);
  read_cfg.operation = Operation::ReadRecord;
  auto read = aggregate_serial(run_round(target, read_cfg).observations);
  CHECK(read.succeeded == 30);
  server.stop();

  HttpTarget wrong("127.0.0.1", port, "staffA", boot.seeds.at("staffA"));
  CHECK_THROWS_AS(run_round(wrong, fixed_load(1, 1)), Error);
}
