#include "donorchain/access/gateway.hpp"

#include <spdlog/spdlog.h>

#include "donorchain/common/error.hpp"
#include "donorchain/crypto/crypto.hpp"

namespace donorchain::access {

namespace {

using identity::Action;
using nlohmann::json;
using Params = std::map<std::string, std::string>;

std::int64_t system_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    if (path[pos] == '/') {
      ++pos;
      continue;
    }
    auto end = path.find('/', pos);
    if (end == std::string_view::npos) end = path.size();
    out.emplace_back(path.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

std::optional<Params> match_path(std::string_view pattern, std::string_view path) {
  auto want = split_path(pattern);
  auto got = split_path(path);
  if (want.size() != got.size()) return std::nullopt;
  Params params;
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].size() > 2 && want[i].front() == '{' && want[i].back() == '}') {
      if (got[i].empty()) return std::nullopt;
      params[want[i].substr(1, want[i].size() - 2)] = got[i];
    } else if (want[i] != got[i]) {
      return std::nullopt;
    }
  }
  return params;
}

json parse_result(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

const std::vector<RouteInfo>& route_table() {
  static const std::vector<RouteInfo> table{
      {"POST", "/patients", "addPatient", Action::AddPatient},
      {"POST", "/donors", "addDonor", Action::AddDonor},
      {"GET", "/patients", "getAllPatients", Action::GetAllPatients},
      {"GET", "/donors", "getAllDonors", Action::GetAllDonors},
      {"GET", "/patients/{id}", "getPatient", Action::GetPatient},
      {"GET", "/donors/{id}", "getDonor", Action::GetDonor},
      {"DELETE", "/patients/{id}", "deletePatient", Action::DeletePatient},
      {"DELETE", "/donors/{id}", "deleteDonor", Action::DeleteDonor},
      {"GET", "/hospitals/{org}/patients", "getMyPatients", Action::GetMyPatients},
      {"GET", "/hospitals/{org}/donors", "getMyDonors", Action::GetMyDonors},
      {"POST", "/patients/{id}/find-match", "findMatch", Action::FindMatch},
      {"POST", "/match/select", "selectMatch", Action::SelectMatch},
      {"GET", "/patients/{id}/status", "getPatientStatus", Action::GetPatientStatus},
      {"GET", "/tx/{id}", std::nullopt, std::nullopt},
      {"GET", "/events/transport", std::nullopt, Action::ReadTransportFeed},
      {"GET", "/chain/verify", std::nullopt, Action::VerifyChain},
  };
  return table;
}

}  // namespace

std::string login_message(std::string_view identity_id, std::string_view nonce) {
  return "donorchain-login\n" + std::string(identity_id) + "\n" + std::string(nonce);
}

HttpResponse error_response(int status, std::string_view code, const std::string& message) {
  return {status, json{{"error", code}, {"message", message}}};
}

Gateway::Gateway(network::Network& net, std::map<std::string, network::ClientIdentity> wallet)
    : Gateway(net, std::move(wallet), Options{}) {}

Gateway::Gateway(network::Network& net, std::map<std::string, network::ClientIdentity> wallet, Options options)
    : net_(net), wallet_(std::move(wallet)), options_(std::move(options)), feed_(net, options_.channel) {
  if (!options_.clock) options_.clock = system_now_ms;
}

const std::vector<RouteInfo>& Gateway::routes() { return route_table(); }

int Gateway::status_for(Errc code) {
  switch (code) {
    case Errc::UnknownIdentity: return 401;
    case Errc::Unauthorized: return 403;
    case Errc::NotFound:
    case Errc::UnknownMethod:
    case Errc::UnknownChannel:
    case Errc::UnknownChaincode: return 404;
    case Errc::DuplicateID:
    case Errc::AlreadyMatched:
    case Errc::MatchedRecordLocked: return 409;
    case Errc::ValidationError:
    case Errc::NotAMatch: return 422;
    case Errc::EndorsementMismatch: return 502;
    case Errc::OrdererUnavailable:
    case Errc::PolicyViolation:
    case Errc::NotJoined: return 503;
    default: return 500;
  }
}

int Gateway::status_for(ledger::ValidationFlag flag) {
  switch (flag) {
    case ledger::ValidationFlag::Valid: return 200;
    case ledger::ValidationFlag::MVCCConflict:
    case ledger::ValidationFlag::DuplicateTxId: return 409;
    default: return 500;
  }
}

std::int64_t Gateway::now() const { return options_.clock(); }

HttpResponse Gateway::handle(const HttpRequest& request) {
  try {
    auto path = request.path.substr(0, request.path.find('?'));
    if (request.method == "POST" && path == "/auth/login") {
      json body;
      try {
        body = json::parse(request.body);
      } catch (const json::exception& e) {
        return error_response(400, "BadRequest", e.what());
      }
      return login(body);
    }
    auto s = session(request.bearer);
    if (!s) return error_response(401, "Unauthenticated", "missing, unknown or expired token");
    HttpRequest normalized = request;
    normalized.path = path;
    return dispatch(normalized, *s);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    spdlog::error("gateway {} {}: {}", request.method, request.path, e.what());
    return error_response(500, "Internal", e.what());
  }
}

HttpResponse Gateway::login(const json& body) {
  if (!body.is_object() || !body.contains("identity") || !body["identity"].is_string()) {
    return error_response(400, "BadRequest", "identity is required");
  }
  auto id = body["identity"].get<std::string>();
  auto wallet_entry = wallet_.find(id);
  if (wallet_entry == wallet_.end()) return error_response(401, "UnknownIdentity", "no wallet entry for " + id);

  std::lock_guard lock(mu_);
  auto t = now();
  std::erase_if(nonces_, [t](const auto& kv) { return kv.second.expires_at_ms <= t; });
  std::erase_if(sessions_, [t](const auto& kv) { return kv.second.expires_at_ms <= t; });

  if (!body.contains("signature")) {
    auto nonce = crypto::random_hex(16);
    nonces_[nonce] = PendingLogin{id, t + options_.nonce_ttl.count()};
    return {200, json{{"nonce", nonce}, {"message", login_message(id, nonce)}}};
  }

  auto nonce = body.value("nonce", "");
  auto pending = nonces_.find(nonce);
  if (pending == nonces_.end() || pending->second.identity_id != id) {
    return error_response(401, "Unauthenticated", "unknown or expired nonce");
  }
  nonces_.erase(pending);
  identity::Signature sig{id, {}};
  try {
    sig.bytes = from_hex(body["signature"].get<std::string>());
  } catch (const std::exception&) {
    return error_response(400, "BadRequest", "signature must be hex");
  }
  auto message = login_message(id, nonce);
  if (!net_.registry().verify(sig, as_bytes(message))) {
    return error_response(401, "Unauthenticated", "signature does not verify for " + id);
  }
  Session s{crypto::random_hex(32), wallet_entry->second, t + options_.session_ttl.count()};
  sessions_[s.token] = s;
  const auto& who = *s.client.identity;
  return {200, json{{"token", s.token},
                    {"expiresAtMs", s.expires_at_ms},
                    {"identity", who.identity_id},
                    {"org", who.org_id},
                    {"role", identity::to_string(who.role)},
                    {"subject", who.subject_id ? json(*who.subject_id) : json(nullptr)}}};
}

std::optional<Session> Gateway::session(const std::optional<std::string>& bearer) {
  if (!bearer) return std::nullopt;
  std::lock_guard lock(mu_);
  auto it = sessions_.find(*bearer);
  if (it == sessions_.end()) return std::nullopt;
  if (it->second.expires_at_ms <= now()) {
    sessions_.erase(it);
    return std::nullopt;
  }
  return it->second;
}

std::variant<Session, HttpResponse> Gateway::authorize(const std::optional<std::string>& bearer,
                                                       std::optional<identity::Action> action) {
  auto s = session(bearer);
  if (!s) return error_response(401, "Unauthenticated", "missing, unknown or expired token");
  if (action && identity::authorize(net_.registry(), *s->client.identity, *action, {}, net_.matrix()) !=
                    identity::Decision::Allow) {
    return error_response(403, "Unauthorized",
                          s->client.identity->identity_id + " may not " + std::string(identity::to_string(*action)));
  }
  return *s;
}

HttpResponse Gateway::dispatch(const HttpRequest& request, const Session& s) {
  bool path_known = false;
  for (const auto& route : route_table()) {
    auto params = match_path(route.pattern, request.path);
    if (!params) continue;
    path_known = true;
    if (route.method != request.method) continue;

    const auto& cc = route.chaincode_method;
    if (!cc) {
      if (route.pattern == "/tx/{id}") return tx_status(params->at("id"));
      if (route.pattern == "/chain/verify") return verify_chain(s);
      if (route.pattern == "/events/transport") {
        auto allowed = authorize(request.bearer, route.action);
        if (auto* denied = std::get_if<HttpResponse>(&allowed)) return *denied;
        json out = json::array();
        for (const auto& n : feed_.after(0)) out.push_back(n.to_json());
        return {200, out};
      }
    }
    // Roles with no grant for the action are refused before any proposal.
    if (route.action && !net_.matrix().role_may(s.client.identity->role, *route.action)) {
      return error_response(403, "Unauthorized",
                            s.client.identity->identity_id + " may not " + std::string(identity::to_string(*route.action)));
    }
    if (*cc == "addPatient" || *cc == "addDonor") {
      auto body = json::parse(request.body);
      if (!body.is_object()) return error_response(400, "BadRequest", "record body must be a JSON object");
      return write(s, *cc, {body.dump()}, 201);
    }
    if (*cc == "selectMatch") {
      auto body = json::parse(request.body);
      if (!body.is_object() || !body.contains("patientId") || !body.contains("donorId")) {
        return error_response(400, "BadRequest", "patientId and donorId are required");
      }
      return write(s, *cc, {body["patientId"].get<std::string>(), body["donorId"].get<std::string>()}, 200);
    }
    if (*cc == "deletePatient" || *cc == "deleteDonor") return write(s, *cc, {params->at("id")}, 200);
    if (*cc == "getPatientStatus") return patient_status(s, params->at("id"));
    std::vector<std::string> args;
    if (params->contains("id")) args.push_back(params->at("id"));
    if (params->contains("org")) args.push_back(params->at("org"));
    return query(s, *cc, std::move(args));
  }
  if (path_known) return error_response(405, "MethodNotAllowed", request.method + " " + request.path);
  return error_response(404, "NoRoute", request.method + " " + request.path);
}

HttpResponse Gateway::query(const Session& s, const std::string& method, std::vector<std::string> args) {
  auto result = net_.query(s.client, options_.channel, options_.chaincode, method, std::move(args));
  return {200, parse_result(result)};
}

HttpResponse Gateway::write(const Session& s, const std::string& method, std::vector<std::string> args,
                            int created_status) {
  auto r = net_.invoke(s.client, options_.channel, options_.chaincode, method, std::move(args),
                       options_.commit_timeout);
  json body{{"tx_id", r.tx_id}};
  if (!r.status) {
    body["status"] = "pending";
    body["poll"] = "/tx/" + r.tx_id;
    return {202, body};
  }
  const auto& st = *r.status;
  body["flag"] = ledger::to_string(st.flag);
  body["block"] = st.block_number;
  if (st.flag != ledger::ValidationFlag::Valid) {
    body["error"] = ledger::to_string(st.flag);
    body["message"] = method + " committed as " + std::string(ledger::to_string(st.flag));
    return {status_for(st.flag), body};
  }
  auto result = parse_result(r.result);
  if (result.is_object()) {
    for (auto& [k, v] : result.items()) body[k] = v;
  } else {
    body["result"] = result;
  }
  return {created_status, body};
}

HttpResponse Gateway::patient_status(const Session& s, const std::string& patient_id) {
  auto view = json::parse(
      net_.query(s.client, options_.channel, options_.chaincode, "getPatientStatus", {patient_id}));
  auto peers = net_.channel_peers(options_.channel);
  const auto& ledger = net_.peer(peers.front()).ledger(options_.channel);
  auto history = ledger.get_history("PAT_" + patient_id);
  std::optional<std::size_t> created;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history[i].value && (i == 0 || !history[i - 1].value)) created = i;
  }
  if (created) {
    auto registered = ledger.store().block(history[*created].block).metadata.timestamp_ms;
    auto until = now();
    if (view["status"] == "matched") {
      until = ledger.store().block(history.back().block).metadata.timestamp_ms;
      view["matchedAtMs"] = until;
    }
    view["registeredAtMs"] = registered;
    view["waitingTimeMs"] = std::max<std::int64_t>(0, until - registered);
    view["waitingTimeBasis"] = "time since registration";
  }
  return {200, view};
}

HttpResponse Gateway::tx_status(const std::string& tx_id) {
  auto st = net_.status(options_.channel, tx_id);
  if (!st) return error_response(404, "NotFound", "transaction " + tx_id + " is not committed");
  json body{{"tx_id", st->tx_id},
            {"flag", ledger::to_string(st->flag)},
            {"block", st->block_number},
            {"index", st->tx_index},
            {"blockTimestampMs", st->block_timestamp_ms}};
  if (st->event) body["event"] = {{"name", st->event->name}, {"payload", parse_result(st->event->payload)}};
  return {200, body};
}

HttpResponse Gateway::verify_chain(const Session& s) {
  if (identity::authorize(net_.registry(), *s.client.identity, Action::VerifyChain, {}, net_.matrix()) !=
      identity::Decision::Allow) {
    return error_response(403, "Unauthorized", s.client.identity->identity_id + " may not verify the chain");
  }
  json peers = json::array();
  bool ok = true;
  std::optional<std::pair<std::uint64_t, crypto::Digest>> reference;
  for (const auto& id : net_.channel_peers(options_.channel)) {
    const auto& store = net_.peer(id).ledger(options_.channel).store();
    auto height = store.height();
    auto tip = store.tip_hash();
    auto bad = store.verify_chain();
    bool agrees = true;
    if (!reference) {
      reference.emplace(height, tip);
    } else if (reference->first == height) {
      agrees = reference->second == tip;
    }
    ok = ok && !bad && agrees;
    peers.push_back({{"peer", id},
                     {"height", height},
                     {"tip", to_hex(tip)},
                     {"intact", !bad},
                     {"firstBadBlock", bad ? json(*bad) : json(nullptr)},
                     {"agreesWithReference", agrees}});
  }
  return {200, json{{"ok", ok}, {"channel", options_.channel}, {"halted", net_.halted(options_.channel)},
                    {"peers", peers}}};
}

}  // namespace donorchain::access
