#include "donorchain/bench/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

#include "donorchain/common/error.hpp"

namespace donorchain::bench {

std::int64_t monotonic_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

namespace {

class InFlight {
 public:
  void enter() {
    auto now = ++current_;
    auto seen = max_.load();
    while (now > seen && !max_.compare_exchange_weak(seen, now)) {
    }
  }
  void leave() { --current_; }
  std::uint32_t max() const { return max_.load(); }

 private:
  std::atomic<std::uint32_t> current_{0};
  std::atomic<std::uint32_t> max_{0};
};

TxOutcome guarded_send(Target& target, Operation op, const std::string& request) {
  try {
    return target.send(op, request);
  } catch (const Error& e) {
    return {false, {}, std::string(to_string(e.code()))};
  } catch (const std::exception& e) {
    return {false, {}, e.what()};
  }
}

void record(TxObservation& slot, std::int64_t issued, const TxOutcome& outcome) {
  slot.completed_ns = monotonic_ns();
  slot.issued_ns = issued;
  slot.tx_id = outcome.tx_id;
  slot.success = outcome.success;
  slot.fail_reason = outcome.fail_reason;
}

void run_fixed_load(Target& target, const WorkloadConfig& config, RoundResult& out) {
  std::atomic<std::uint64_t> next{0};
  InFlight in_flight;
  std::vector<std::thread> clients;
  for (std::uint32_t c = 0; c < *config.load; ++c) {
    clients.emplace_back([&] {
      for (;;) {
        auto i = next.fetch_add(1);
        if (i >= config.total_tx) return;
        auto request = target.prepare(config.operation, i);
        in_flight.enter();
        auto issued = monotonic_ns();
        auto outcome = guarded_send(target, config.operation, request);
        record(out.observations[i], issued, outcome);
        in_flight.leave();
      }
    });
  }
  for (auto& t : clients) t.join();
  out.max_in_flight = in_flight.max();
}

struct Pending {
  std::uint64_t index;
  std::int64_t issued_ns;
  std::string request;
};

void run_fixed_rate(Target& target, const WorkloadConfig& config, const DriverOptions& options, RoundResult& out) {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Pending> queue;
  bool done = false;
  InFlight in_flight;

  auto senders = std::min<std::uint32_t>(std::max<std::uint32_t>(options.send_threads, 1), config.total_tx);
  std::vector<std::thread> pool;
  for (std::uint32_t s = 0; s < senders; ++s) {
    pool.emplace_back([&] {
      for (;;) {
        Pending p;
        {
          std::unique_lock lock(mu);
          cv.wait(lock, [&] { return done || !queue.empty(); });
          if (queue.empty()) return;
          p = std::move(queue.front());
          queue.pop_front();
        }
        auto outcome = guarded_send(target, config.operation, p.request);
        record(out.observations[p.index], p.issued_ns, outcome);
        in_flight.leave();
      }
    });
  }

  const auto period = std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / *config.rate_tps));
  const auto start = std::chrono::steady_clock::now() + std::chrono::milliseconds(5);
  std::vector<std::thread> schedulers;
  for (std::uint32_t w = 0; w < config.workers; ++w) {
    schedulers.emplace_back([&, w] {
      for (std::uint64_t i = w; i < config.total_tx; i += config.workers) {
        std::this_thread::sleep_until(start + period * static_cast<std::int64_t>(i));
        auto request = target.prepare(config.operation, i);
        in_flight.enter();
        Pending p{i, monotonic_ns(), std::move(request)};
        {
          std::lock_guard lock(mu);
          queue.push_back(std::move(p));
        }
        cv.notify_one();
      }
    });
  }
  for (auto& t : schedulers) t.join();
  {
    std::lock_guard lock(mu);
    done = true;
  }
  cv.notify_all();
  for (auto& t : pool) t.join();
  out.max_in_flight = in_flight.max();
}

}  // namespace

RoundResult run_round(Target& target, const WorkloadConfig& config, const DriverOptions& options) {
  config.validate();
  try {
    target.setup(config);
  } catch (const Error& e) {
    if (e.code() == Errc::TargetUnreachable) throw;
    throw Error(Errc::TargetUnreachable, target.describe() + ": setup failed: " + e.what());
  } catch (const std::exception& e) {
    throw Error(Errc::TargetUnreachable, target.describe() + ": setup failed: " + e.what());
  }

  RoundResult out;
  out.config = config;
  out.observations.resize(config.total_tx);
  if (config.mode == Mode::FixedLoad) {
    run_fixed_load(target, config, out);
  } else {
    run_fixed_rate(target, config, options, out);
  }
  return out;
}

}  // namespace donorchain::bench
