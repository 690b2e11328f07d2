#include <doctest.h>

#include <atomic>
#include <future>
#include <set>
#include <thread>

#include <httplib.h>

#include "donorchain/access/gateway.hpp"
#include "donorchain/access/server.hpp"
#include "donorchain/crypto/crypto.hpp"
#include "../support/test_network.hpp"

using namespace donorchain;
using namespace donorchain::access;
using donorchain::testing::record_json;
using nlohmann::json;

namespace {

struct Fixture {
  Fixture() : Fixture(Gateway::Options{}) {}
  explicit Fixture(Gateway::Options options)
      : boot(testing::make_demo(1)), gateway(*boot.network, boot.wallet, std::move(options)) {}

  std::string login(const std::string& id) {
    auto challenge = gateway.handle({"POST", "/auth/login", json{{"identity", id}}.dump(), std::nullopt});
    REQUIRE(challenge.status == 200);
    auto nonce = challenge.body["nonce"].get<std::string>();
    auto sig = crypto::sign(*boot.wallet.at(id).key, as_bytes(login_message(id, nonce)));
    auto done = gateway.handle(
        {"POST", "/auth/login", json{{"identity", id}, {"nonce", nonce}, {"signature", to_hex(sig)}}.dump(),
         std::nullopt});
    REQUIRE(done.status == 200);
    return done.body["token"];
  }

  HttpResponse call(const std::string& token, const std::string& method, const std::string& path,
                    const json& body = nullptr) {
    return gateway.handle({method, path, body.is_null() ? "" : body.dump(), token});
  }

  network::Bootstrapped boot;
  Gateway gateway;
};

}  // namespace

TEST_CASE("login needs a signature over a fresh nonce") {
  Fixture f;
  auto token = f.login("staffA");
  CHECK(token.size() == 64);
  CHECK(f.call(token, "GET", "/hospitals/hospA/patients").status == 200);

  auto challenge = f.gateway.handle({"POST", "/auth/login", R"({"identity":"staffA"})", std::nullopt});
  auto nonce = challenge.body["nonce"].get<std::string>();
  auto wrong_key = crypto::sign(*f.boot.wallet.at("staffB").key, as_bytes(login_message("staffA", nonce)));
  auto bad = f.gateway.handle(
      {"POST", "/auth/login", json{{"identity", "staffA"}, {"nonce", nonce}, {"signature", to_hex(wrong_key)}}.dump(),
       std::nullopt});
  CHECK(bad.status == 401);
  auto good_sig = crypto::sign(*f.boot.wallet.at("staffA").key, as_bytes(login_message("staffA", nonce)));
  auto replay = f.gateway.handle(
      {"POST", "/auth/login", json{{"identity", "staffA"}, {"nonce", nonce}, {"signature", to_hex(good_sig)}}.dump(),
       std::nullopt});
  CHECK(replay.status == 401);

  CHECK(f.gateway.handle({"POST", "/auth/login", R"({"identity":"mallory"})", std::nullopt}).status == 401);
  CHECK(f.gateway.handle({"POST", "/auth/login", "{", std::nullopt}).status == 400);
  CHECK(f.call("not-a-token", "GET", "/patients").status == 401);
  CHECK(f.gateway.handle({"GET", "/patients", "", std::nullopt}).status == 401);
}

TEST_CASE("sessions expire") {
  auto clock = std::make_shared<std::atomic<std::int64_t>>(1'000'000);
  Gateway::Options options;
  options.clock = [clock] { return clock->load(); };
  options.session_ttl = std::chrono::hours(12);
  Fixture f(options);
  auto token = f.login("root");
  CHECK(f.call(token, "GET", "/patients").status == 200);
  *clock += std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::hours(12)).count();
  CHECK(f.call(token, "GET", "/patients").status == 401);
}

TEST_CASE("record routes map onto the contract with the documented status codes") {
  Fixture f;
  auto staff_a = f.login("staffA");
  auto staff_b = f.login("staffB");
  auto root = f.login("root");

  auto created = f.call(staff_a, "POST", "/patients", record_json("p1"));
  CHECK(created.status == 201);
  CHECK(created.body["flag"] == "Valid");
  CHECK(created.body["key"] == "PAT_p1");
  CHECK(created.body["tx_id"].get<std::string>().size() == 64);

  CHECK(f.call(staff_a, "POST", "/patients", record_json("p1")).status == 409);
  CHECK(f.call(staff_a, "POST", "/patients", record_json("p2", "kidney", "o+", "f", 0)).status == 422);
  CHECK(f.call(staff_a, "POST", "/patients", json::array()).status == 400);
  CHECK(f.gateway.handle({"POST", "/patients", "{oops", staff_a}).status == 400);
  CHECK(f.call(root, "POST", "/patients", record_json("p3")).status == 403);

  CHECK(f.call(staff_a, "GET", "/patients/p1").body["firstName"] == "Ada");
  CHECK(f.call(staff_a, "GET", "/patients/zz").status == 404);
  CHECK(f.call(staff_b, "GET", "/patients/p1").status == 403);
  CHECK(f.call(staff_a, "GET", "/patients").status == 403);
  CHECK(f.call(root, "GET", "/patients").body.size() == 1);
  CHECK(f.call(staff_a, "GET", "/hospitals/hospA/patients").body.size() == 1);
  CHECK(f.call(staff_a, "GET", "/hospitals/hospB/patients").status == 403);
  CHECK(f.call(root, "GET", "/hospitals/hospB/patients").body == json::array());

  CHECK(f.call(staff_b, "POST", "/donors", record_json("d1")).status == 201);
  CHECK(f.call(staff_b, "POST", "/donors", record_json("d2", "liver")).status == 201);
  CHECK(f.call(root, "GET", "/donors").body.size() == 2);
  CHECK(f.call(staff_b, "GET", "/hospitals/hospB/donors").body.size() == 2);

  auto found = f.call(staff_a, "POST", "/patients/p1/find-match");
  CHECK(found.status == 200);
  CHECK(found.body["candidates"] == json::array({"d1"}));
  CHECK(f.call(staff_a, "POST", "/match/select", {{"patientId", "p1"}, {"donorId", "d2"}}).status == 422);
  CHECK(f.call(staff_a, "POST", "/match/select", {{"patientId", "p1"}}).status == 400);
  auto selected = f.call(staff_a, "POST", "/match/select", {{"patientId", "p1"}, {"donorId", "d1"}});
  CHECK(selected.status == 200);
  CHECK(selected.body["flag"] == "Valid");

  CHECK(f.call(staff_a, "DELETE", "/patients/p1").status == 409);
  CHECK(f.call(staff_b, "DELETE", "/donors/d2").status == 200);
  CHECK(f.call(staff_b, "GET", "/donors/d2").status == 404);

  auto tx = f.call(staff_a, "GET", "/tx/" + selected.body["tx_id"].get<std::string>());
  CHECK(tx.status == 200);
  CHECK(tx.body["flag"] == "Valid");
  CHECK(tx.body["event"]["name"] == "MatchSelected");
  CHECK(f.call(staff_a, "GET", "/tx/feed").status == 404);
  CHECK(f.call(staff_a, "PUT", "/patients").status == 405);
  CHECK(f.call(staff_a, "GET", "/nowhere").status == 404);
}

TEST_CASE("patient status view reports match and time since registration") {
  Fixture f;
  auto staff_a = f.login("staffA");
  auto staff_b = f.login("staffB");
  auto patient = f.login("patient1");
  f.call(staff_a, "POST", "/patients", record_json("p1"));
  f.call(staff_a, "POST", "/patients", record_json("p2"));

  auto waiting = f.call(patient, "GET", "/patients/p1/status");
  REQUIRE(waiting.status == 200);
  CHECK(waiting.body["status"] == "waiting");
  CHECK(waiting.body["matchedDonorId"].is_null());
  CHECK(waiting.body["registeredAtMs"].get<std::int64_t>() > 0);
  CHECK(waiting.body["waitingTimeMs"].get<std::int64_t>() >= 0);
  CHECK(f.call(patient, "GET", "/patients/p2/status").status == 403);
  CHECK(f.call(patient, "GET", "/patients/p2").status == 403);

  f.call(staff_b, "POST", "/donors", record_json("d1"));
  f.call(staff_a, "POST", "/match/select", {{"patientId", "p1"}, {"donorId", "d1"}});
  auto matched = f.call(patient, "GET", "/patients/p1/status");
  CHECK(matched.body["status"] == "matched");
  CHECK(matched.body["matchedDonorId"] == "d1");
  CHECK(matched.body["matchedAtMs"].get<std::int64_t>() >= matched.body["registeredAtMs"].get<std::int64_t>());
}

TEST_CASE("concurrent selections of one donor yield one 200 and one 409") {
  Fixture f;
  auto staff_a = f.login("staffA");
  auto staff_b = f.login("staffB");
  f.call(staff_a, "POST", "/patients", record_json("pa"));
  f.call(staff_b, "POST", "/patients", record_json("pb"));
  f.call(staff_b, "POST", "/donors", record_json("d1"));
  auto a = std::async(std::launch::async, [&] {
    return f.call(staff_a, "POST", "/match/select", {{"patientId", "pa"}, {"donorId", "d1"}});
  });
  auto b = std::async(std::launch::async, [&] {
    return f.call(staff_b, "POST", "/match/select", {{"patientId", "pb"}, {"donorId", "d1"}});
  });
  std::multiset<int> codes{a.get().status, b.get().status};
  CHECK(codes == std::multiset<int>{200, 409});
}

TEST_CASE("a slow commit answers 202 and the transaction can be polled") {
  Gateway::Options options;
  options.commit_timeout = std::chrono::milliseconds(0);
  Fixture f(options);
  auto staff = f.login("staffA");
  auto pending = f.call(staff, "POST", "/patients", record_json("p1"));
  REQUIRE(pending.status == 202);
  auto path = pending.body["poll"].get<std::string>();
  HttpResponse polled;
  for (int i = 0; i < 400; ++i) {
    polled = f.call(staff, "GET", path);
    if (polled.status == 200) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  CHECK(polled.status == 200);
  CHECK(polled.body["flag"] == "Valid");
}

TEST_CASE("chain verification and the notice feed are role-gated") {
  Fixture f;
  auto auditor = f.login("auditor");
  auto staff = f.login("staffA");
  auto courier = f.login("courier");
  auto verify = f.call(auditor, "GET", "/chain/verify");
  CHECK(verify.status == 200);
  CHECK(verify.body["ok"] == true);
  CHECK(f.call(staff, "GET", "/chain/verify").status == 403);
  CHECK(f.call(staff, "GET", "/events/transport").status == 403);
  CHECK(f.call(courier, "GET", "/events/transport").body == json::array());
  CHECK(f.call(courier, "GET", "/patients/p1").status == 403);
}

TEST_CASE("every contract method has exactly one route") {
  std::multiset<std::string> mapped;
  for (const auto& r : Gateway::routes()) {
    if (r.chaincode_method) {
      mapped.insert(*r.chaincode_method);
      REQUIRE(r.action);
      CHECK(identity::to_string(*r.action) == identity::to_string(identity::parse_action(*r.chaincode_method)));
    }
  }
  for (const auto& m : chaincode::DonationContract::methods()) CHECK(mapped.count(m) == 1);
  CHECK(mapped.size() == chaincode::DonationContract::methods().size());
}

namespace {

struct SseReader {
  std::mutex mu;
  std::vector<json> events;
  std::vector<std::uint64_t> ids;
  std::string buffer;

  void feed(const char* data, std::size_t n) {
    std::lock_guard lock(mu);
    buffer.append(data, n);
    std::size_t end;
    while ((end = buffer.find("\n\n")) != std::string::npos) {
      auto frame = buffer.substr(0, end);
      buffer.erase(0, end + 2);
      std::optional<std::uint64_t> id;
      std::string data_line;
      std::size_t pos = 0;
      while (pos < frame.size()) {
        auto nl = frame.find('\n', pos);
        auto line = frame.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        if (line.rfind("id: ", 0) == 0) id = std::stoull(line.substr(4));
        if (line.rfind("data: ", 0) == 0) data_line = line.substr(6);
        if (nl == std::string::npos) break;
        pos = nl + 1;
      }
      if (!data_line.empty()) {
        events.push_back(json::parse(data_line));
        ids.push_back(id.value_or(0));
      }
    }
  }

  std::size_t size() {
    std::lock_guard lock(mu);
    return events.size();
  }
};

// Reads a stream until `want` events arrived or the deadline passes.
std::shared_ptr<SseReader> read_stream(int port, const std::string& path, httplib::Headers headers, std::size_t want,
                                       int* status = nullptr) {
  auto reader = std::make_shared<SseReader>();
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(std::chrono::seconds(10));
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  auto res = cli.Get(path, headers, [&](const char* data, std::size_t n) {
    reader->feed(data, n);
    return reader->size() < want && std::chrono::steady_clock::now() < deadline;
  });
  if (status && res) *status = res->status;
  return reader;
}

}  // namespace

TEST_CASE("the HTTP server streams transport notices and resumes after Last-Event-ID") {
  Fixture f;
  RestServer server(f.gateway);
  int port = server.start();
  REQUIRE(port > 0);

  httplib::Client cli("127.0.0.1", port);
  auto staff_a = f.login("staffA");
  auto staff_b = f.login("staffB");
  auto courier = f.login("courier");
  httplib::Headers auth_a{{"Authorization", "Bearer " + staff_a}};
  httplib::Headers auth_b{{"Authorization", "Bearer " + staff_b}};

  auto res = cli.Post("/patients", auth_a, record_json("p0").dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  CHECK(cli.Post("/donors", auth_b, record_json("d0").dump(), "application/json")->status == 201);

  int denied = 0;
  read_stream(port, "/events/transport", auth_a, 1, &denied);
  CHECK(denied == 403);

  auto first = std::async(std::launch::async, [&] {
    return read_stream(port, "/events/transport", {{"Authorization", "Bearer " + courier}}, 1);
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  auto sel = cli.Post("/match/select", auth_a, json{{"patientId", "p0"}, {"donorId", "d0"}}.dump(),
                      "application/json");
  REQUIRE(sel);
  CHECK(sel->status == 200);
  auto got = first.get();
  REQUIRE(got->size() == 1);
  CHECK(got->events[0]["patientId"] == "p0");
  CHECK(got->events[0]["donorId"] == "d0");
  CHECK(got->events[0]["organ"] == "kidney");
  CHECK(got->events[0]["sourceHospital"] == "hospB");
  CHECK(got->events[0]["destinationHospital"] == "hospA");
  auto last_seen = got->ids[0];

  // Three matches while the courier is disconnected.
  for (int i = 1; i <= 3; ++i) {
    auto id = std::to_string(i);
    cli.Post("/patients", auth_a, record_json("p" + id).dump(), "application/json");
    cli.Post("/donors", auth_b, record_json("d" + id).dump(), "application/json");
    auto r = cli.Post("/match/select", auth_a, json{{"patientId", "p" + id}, {"donorId", "d" + id}}.dump(),
                      "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
  }
  auto resumed = read_stream(port, "/events/transport",
                             {{"Authorization", "Bearer " + courier}, {"Last-Event-ID", std::to_string(last_seen)}}, 3);
  REQUIRE(resumed->size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(resumed->ids[static_cast<std::size_t>(i)] == last_seen + 1 + static_cast<std::uint64_t>(i));
    CHECK(resumed->events[static_cast<std::size_t>(i)]["patientId"] == "p" + std::to_string(i + 1));
  }

  auto by_query = read_stream(port, "/events/transport?token=" + courier + "&lastEventId=3", {}, 1);
  REQUIRE(by_query->size() == 1);
  CHECK(by_query->ids[0] == 4);
  server.stop();
}

TEST_CASE("the commit stream carries only the caller's own transactions") {
  Fixture f;
  RestServer server(f.gateway);
  int port = server.start();
  auto staff_a = f.login("staffA");
  auto staff_b = f.login("staffB");
  auto stream = std::async(std::launch::async, [&] {
    return read_stream(port, "/events/commits", {{"Authorization", "Bearer " + staff_a}}, 2);
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  f.call(staff_b, "POST", "/donors", record_json("d1"));
  auto p1 = f.call(staff_a, "POST", "/patients", record_json("p1"));
  auto p2 = f.call(staff_a, "POST", "/patients", record_json("p2"));
  auto got = stream.get();
  REQUIRE(got->size() == 2);
  CHECK(got->events[0]["tx_id"] == p1.body["tx_id"]);
  CHECK(got->events[1]["tx_id"] == p2.body["tx_id"]);
  CHECK(got->events[0]["flag"] == "Valid");
  server.stop();
}

TEST_CASE("a new gateway rebuilds the notice feed from the chain") {
  Fixture f;
  auto staff_a = f.login("staffA");
  auto staff_b = f.login("staffB");
  f.call(staff_a, "POST", "/patients", record_json("p1"));
  f.call(staff_b, "POST", "/donors", record_json("d1"));
  f.call(staff_a, "POST", "/match/select", {{"patientId", "p1"}, {"donorId", "d1"}});
  f.boot.network->flush_events(std::string(network::kDonationChannel));
  REQUIRE(f.gateway.notices().last_id() == 1);

  Gateway fresh(*f.boot.network, f.boot.wallet);
  auto notices = fresh.notices().after(0);
  REQUIRE(notices.size() == 1);
  CHECK(notices[0] == f.gateway.notices().after(0)[0]);
}
