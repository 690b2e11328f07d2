#include "cli.hpp"

#include <sys/stat.h>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "donorchain/access/gateway.hpp"
#include "donorchain/access/server.hpp"
#include "donorchain/bench/driver.hpp"
#include "donorchain/bench/report.hpp"
#include "donorchain/bench/targets.hpp"
#include "donorchain/bench/workload.hpp"
#include "donorchain/chaincode/donation.hpp"
#include "donorchain/common/bytes.hpp"
#include "donorchain/common/error.hpp"
#include "donorchain/crypto/crypto.hpp"
#include "donorchain/ledger/block_store.hpp"
#include "donorchain/ledger/ledger.hpp"
#include "donorchain/network/topology.hpp"

namespace donorchain::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct Globals {
  std::string data_dir = "donorchain-data";
  std::string topology;
  std::string identity;
  std::string gateway_url;
  std::string output = "text";
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text, bool secret = false) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << text;
  }
  if (secret) ::chmod(tmp.c_str(), 0600);
  fs::rename(tmp, path);
}

// The on-disk layout of one network: topology, membership, wallet seeds and
// one ledger directory per peer.
class DataDir {
 public:
  explicit DataDir(fs::path root) : root_(std::move(root)) {}

  bool initialized() const { return fs::exists(topology_path()); }
  fs::path topology_path() const { return root_ / "topology.json"; }
  fs::path membership_path() const { return root_ / "membership.json"; }
  fs::path keys_path() const { return root_ / "keys.json"; }
  fs::path ledgers() const { return root_ / "ledgers"; }
  const fs::path& root() const { return root_; }

  void require() const {
    if (!initialized()) {
      throw Error(Errc::InvalidConfig, root_.string() + " holds no network; run `network up --topology FILE` first");
    }
  }

  network::Topology topology() const {
    require();
    return network::Topology::load(topology_path());
  }

  std::map<std::string, std::string> seeds() const {
    return json::parse(read_file(keys_path())).get<std::map<std::string, std::string>>();
  }

  network::Bootstrapped open(const network::Topology& topology) const {
    network::Network::Options options;
    options.data_dir = ledgers();
    if (!initialized()) return network::bootstrap(topology, options, chaincodes());
    return network::bootstrap(topology, options, chaincodes(), json::parse(read_file(membership_path())), seeds());
  }

  void save(const network::Topology& topology, const network::Bootstrapped& boot) const {
    fs::create_directories(root_);
    write_file(membership_path(), boot.network->registry().export_json().dump(2));
    write_file(keys_path(), json(boot.seeds).dump(2), true);
    write_file(topology_path(), topology.to_json().dump(2));
  }

  static std::map<std::string, network::ChaincodeFactory> chaincodes() {
    return {{std::string(chaincode::kDonationChaincodeId), chaincode::donation_factory()}};
  }

 private:
  fs::path root_;
};

class Printer {
 public:
  Printer(const Globals& g, std::ostream& out) : json_(g.output == "json"), out_(out) {}

  void emit(const json& doc, const std::string& text) const {
    if (json_) {
      out_ << doc.dump() << '\n';
    } else {
      out_ << text;
      if (!text.empty() && text.back() != '\n') out_ << '\n';
    }
  }

  void emit(const json& doc) const { emit(doc, flatten(doc)); }

  static std::string flatten(const json& doc) {
    if (!doc.is_object()) return doc.dump(2);
    std::ostringstream s;
    for (const auto& [k, v] : doc.items()) s << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    return s.str();
  }

  bool json_mode() const { return json_; }

 private:
  bool json_;
  std::ostream& out_;
};

// The identity used when --identity is absent: the first hospital staff member.
std::string default_identity(const network::Topology& topo) {
  for (const auto& o : topo.orgs) {
    for (const auto& id : o.identities) {
      if (id.role == identity::Role::HospitalStaff) return id.id;
    }
  }
  throw Error(Errc::UnknownIdentity, "the topology has no hospital staff; pass --identity");
}

const network::ClientIdentity& wallet_entry(const network::Bootstrapped& boot, const std::string& id) {
  auto it = boot.wallet.find(id);
  if (it == boot.wallet.end()) throw Error(Errc::UnknownIdentity, "no wallet entry for '" + id + "'");
  return it->second;
}

json network_summary(const network::Bootstrapped& boot) {
  auto& net = *boot.network;
  json channels = json::array();
  for (const auto& ch : net.channels()) {
    const auto& cfg = net.channel_config(ch);
    channels.push_back({{"name", ch},
                        {"members", std::vector<std::string>(cfg.member_orgs.begin(), cfg.member_orgs.end())},
                        {"policy", cfg.policy.to_string()},
                        {"ordering", cfg.ordering.to_json()},
                        {"height", net.height(ch)},
                        {"peers", net.channel_peers(ch)}});
  }
  std::vector<std::string> identities;
  for (const auto& [id, _] : boot.wallet) identities.push_back(id);
  return {{"peers", net.peer_ids()}, {"channels", channels}, {"identities", identities}};
}

std::string summary_text(const json& s) {
  std::ostringstream out;
  out << "peers: " << s["peers"].size() << '\n';
  for (const auto& p : s["peers"]) out << "  " << p.get<std::string>() << '\n';
  for (const auto& c : s["channels"]) {
    out << "channel " << c["name"].get<std::string>() << ": height " << c["height"] << ", policy "
        << c["policy"].get<std::string>() << ", " << c["ordering"].value("mode", "?") << " ordering, "
        << c["peers"].size() << " peers\n";
  }
  out << "identities:";
  for (const auto& i : s["identities"]) out << ' ' << i.get<std::string>();
  out << '\n';
  return out.str();
}

// "http://host:port" or "host:port".
std::pair<std::string, int> parse_url(const std::string& url) {
  static const std::regex re(R"(^(?:http://)?([^:/]+):(\d+)/?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw Error(Errc::InvalidConfig, "gateway url must look like http://host:port");
  return {m[1].str(), std::stoi(m[2].str())};
}

std::string login(httplib::Client& cli, const std::string& id, const std::string& seed_hex) {
  auto first = cli.Post("/auth/login", json{{"identity", id}}.dump(), "application/json");
  if (!first) throw Error(Errc::TargetUnreachable, "gateway: " + httplib::to_string(first.error()));
  if (first->status != 200) throw Error(Errc::UnknownIdentity, "login refused: " + first->body);
  auto challenge = json::parse(first->body);
  auto key = crypto::SigningKey::from_seed_hex(seed_hex);
  auto sig = crypto::sign(key, as_bytes(challenge.at("message").get<std::string>()));
  auto second = cli.Post(
      "/auth/login", json{{"identity", id}, {"nonce", challenge.at("nonce")}, {"signature", to_hex(sig)}}.dump(),
      "application/json");
  if (!second || second->status != 200) throw Error(Errc::UnknownIdentity, "login failed for " + id);
  return json::parse(second->body).at("token").get<std::string>();
}

// Maps a contract call onto its REST route and performs it.
json call_gateway(const Globals& g, const DataDir& dir, const std::string& id, const std::string& method,
                  const std::vector<std::string>& args) {
  const access::RouteInfo* route = nullptr;
  for (const auto& r : access::Gateway::routes()) {
    if (r.chaincode_method == method) route = &r;
  }
  if (!route) throw Error(Errc::UnknownMethod, "no REST route for " + method);

  auto path = route->pattern;
  std::string body;
  std::size_t next = 0;
  for (const char* param : {"{id}", "{org}"}) {
    auto at = path.find(param);
    if (at == std::string::npos) continue;
    if (next >= args.size()) throw Error(Errc::ValidationError, method + " needs an argument for " + param);
    path.replace(at, std::string(param).size(), httplib::detail::encode_url(args[next++]));
  }
  if (method == "selectMatch") {
    if (args.size() != 2) throw Error(Errc::ValidationError, "selectMatch needs a patient and a donor id");
    body = json{{"patientId", args[0]}, {"donorId", args[1]}}.dump();
  } else if (route->method == "POST" && next < args.size()) {
    body = args[next];
  }

  auto [host, port] = parse_url(g.gateway_url);
  httplib::Client cli(host, port);
  cli.set_read_timeout(std::chrono::seconds(60));
  auto seeds = dir.seeds();
  auto seed = seeds.find(id);
  if (seed == seeds.end()) throw Error(Errc::UnknownIdentity, "no key for '" + id + "' in " + dir.root().string());
  cli.set_bearer_token_auth(login(cli, id, seed->second));

  httplib::Result res = route->method == "GET"      ? cli.Get(path)
                        : route->method == "DELETE" ? cli.Delete(path)
                                                    : cli.Post(path, body.empty() ? "{}" : body, "application/json");
  if (!res) throw Error(Errc::TargetUnreachable, "gateway: " + httplib::to_string(res.error()));
  auto doc = json::parse(res->body, nullptr, false);
  if (res->status >= 300) {
    auto code = doc.is_object() ? doc.value("error", "HttpError") : "HttpError";
    auto msg = doc.is_object() ? doc.value("message", res->body) : res->body;
    throw std::runtime_error(json{{"error", code}, {"message", msg}, {"status", res->status}}.dump());
  }
  return doc;
}

json parse_result(const std::string& s) {
  auto doc = json::parse(s, nullptr, false);
  return doc.is_discarded() ? json(s) : doc;
}

std::vector<std::string> collect_args(std::vector<std::string> args, const std::string& json_file) {
  if (!json_file.empty()) {
    auto text = json_file == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {}) : read_file(json_file);
    auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw Error(Errc::ValidationError, json_file + " is not valid JSON");
    args.push_back(doc.dump());
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Globals g;
  CLI::App app{"donorchain: permissioned ledger for organ donation records"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--data-dir", g.data_dir, "Directory holding the network's keys and ledgers");
  app.add_option("--topology", g.topology, "Topology file (YAML or JSON)");
  app.add_option("--identity", g.identity, "Wallet identity to act as");
  app.add_option("--gateway-url", g.gateway_url, "Send requests through a running gateway instead");
  app.add_option("--output", g.output, "Output format")->check(CLI::IsMember({"json", "text"}));

  std::function<void()> action;

  auto* net_cmd = app.add_subcommand("network", "Bring the network up or tear it down")->require_subcommand(1);
  auto* up = net_cmd->add_subcommand("up", "Create or reopen the network and print a summary");
  bool serve = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  up->add_flag("--serve", serve, "Keep running and serve the REST gateway");
  up->add_option("--host", host, "Gateway bind address");
  up->add_option("--port", port, "Gateway port (0 picks one)");
  auto* down = net_cmd->add_subcommand("down", "Delete the network's data directory");

  auto* channel_cmd = app.add_subcommand("channel", "Channel administration")->require_subcommand(1);
  auto* ch_create = channel_cmd->add_subcommand("create", "Create a channel");
  std::string ch_name, ch_policy;
  std::vector<std::string> ch_members, ch_chaincodes;
  ch_create->add_option("--name", ch_name)->required();
  ch_create->add_option("--members", ch_members, "Member orgs")->required()->delimiter(',');
  ch_create->add_option("--policy", ch_policy, "Endorsement policy expression")->required();
  ch_create->add_option("--chaincode", ch_chaincodes, "Chaincode in the channel's genesis")->delimiter(',');

  auto* cc_cmd = app.add_subcommand("chaincode", "Chaincode administration")->require_subcommand(1);
  auto* cc_deploy = cc_cmd->add_subcommand("deploy", "Install a chaincode on an existing channel");
  std::string cc_channel(network::kDonationChannel), cc_name;
  cc_deploy->add_option("--channel", cc_channel);
  cc_deploy->add_option("--name", cc_name)->required();

  std::string channel(network::kDonationChannel), chaincode_id, method, json_file, peer;
  std::vector<std::string> call_args;
  auto* invoke = app.add_subcommand("invoke", "Endorse, order and commit a transaction");
  auto* query = app.add_subcommand("query", "Evaluate a read on one peer");
  for (auto* c : {invoke, query}) {
    c->add_option("chaincode", chaincode_id)->required();
    c->add_option("method", method)->required();
    c->add_option("args", call_args);
    c->add_option("--json", json_file, "Append this JSON file ('-' for stdin) as an argument");
    c->add_option("--channel", channel);
  }
  query->add_option("--peer", peer);

  auto* state_cmd = app.add_subcommand("state", "World state tools")->require_subcommand(1);
  auto* state_export = state_cmd->add_subcommand("export", "Dump one peer's world state as canonical JSON");
  std::string out_file;
  state_export->add_option("--channel", channel);
  state_export->add_option("--peer", peer)->required();
  state_export->add_option("--out", out_file, "Write here instead of stdout");

  auto* chain_cmd = app.add_subcommand("chain", "Block store tools")->require_subcommand(1);
  auto* chain_verify = chain_cmd->add_subcommand("verify", "Check every peer's hash chain on disk");
  chain_verify->add_option("--channel", channel);

  auto* bench_cmd = app.add_subcommand("bench", "Benchmark harness")->require_subcommand(1);
  auto* bench_run = bench_cmd->add_subcommand("run", "Run workload rounds and report");
  std::string workload_file, report_file;
  bench_run->add_option("--workload", workload_file, "Workload file (YAML or JSON)")->required();
  bench_run->add_option("--report", report_file, "Also save the report as JSON");
  bench_run->add_option("--channel", channel);
  auto* bench_report = bench_cmd->add_subcommand("report", "Render a saved report");
  bench_report->add_option("--in", report_file)->required();

  try {
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", "Usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  Printer print(g, out);
  DataDir dir(g.data_dir);

  try {
    if (up->parsed()) {
      network::Topology topo;
      if (dir.initialized()) {
        topo = dir.topology();
      } else {
        if (g.topology.empty()) throw Error(Errc::InvalidConfig, "no network in " + g.data_dir + "; pass --topology");
        topo = network::Topology::load(g.topology);
      }
      bool fresh = !dir.initialized();
      auto boot = dir.open(topo);
      if (fresh) dir.save(topo, boot);
      auto summary = network_summary(boot);
      summary["dataDir"] = g.data_dir;
      summary["created"] = fresh;
      if (!serve) {
        print.emit(summary, summary_text(summary));
        return 0;
      }
      access::Gateway gateway(*boot.network, boot.wallet);
      access::RestServer server(gateway, host, port);
      summary["gateway"] = "http://" + host + ":" + std::to_string(server.start());
      print.emit(summary, summary_text(summary) + "gateway: " + summary["gateway"].get<std::string>() + "\n");
      out.flush();
      g_stop = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      server.stop();
      return 0;
    }

    if (down->parsed()) {
      dir.require();
      fs::remove_all(dir.root());
      print.emit({{"removed", g.data_dir}}, "removed " + g.data_dir);
      return 0;
    }

    if (ch_create->parsed()) {
      auto topo = dir.topology();
      for (const auto& c : topo.channels) {
        if (c.name == ch_name) throw Error(Errc::InvalidConfig, "channel " + ch_name + " exists");
      }
      topo.channels.push_back({ch_name, ch_members, ch_policy, ch_chaincodes, {}});
      auto boot = dir.open(topo);
      dir.save(topo, boot);
      print.emit({{"channel", ch_name}, {"height", boot.network->height(ch_name)}},
                 "created channel " + ch_name);
      return 0;
    }

    if (cc_deploy->parsed()) {
      auto topo = dir.topology();
      auto it = std::find_if(topo.channels.begin(), topo.channels.end(),
                             [&](const auto& c) { return c.name == cc_channel; });
      if (it == topo.channels.end()) throw Error(Errc::UnknownChannel, "no channel " + cc_channel);
      if (!DataDir::chaincodes().contains(cc_name)) throw Error(Errc::UnknownChaincode, "unknown chaincode " + cc_name);
      if (std::count(it->chaincodes.begin(), it->chaincodes.end(), cc_name) ||
          std::count(it->deployed.begin(), it->deployed.end(), cc_name)) {
        throw Error(Errc::InvalidConfig, cc_name + " is already deployed on " + cc_channel);
      }
      it->deployed.push_back(cc_name);
      auto boot = dir.open(topo);
      dir.save(topo, boot);
      print.emit({{"channel", cc_channel}, {"chaincode", cc_name}}, "deployed " + cc_name + " on " + cc_channel);
      return 0;
    }

    if (invoke->parsed() || query->parsed()) {
      auto args = collect_args(call_args, json_file);
      auto topo = dir.topology();
      auto id = g.identity.empty() ? default_identity(topo) : g.identity;
      if (!g.gateway_url.empty()) {
        print.emit(call_gateway(g, dir, id, method, args));
        return 0;
      }
      auto boot = dir.open(topo);
      const auto& client = wallet_entry(boot, id);
      if (query->parsed()) {
        auto result = boot.network->query(client, channel, chaincode_id, method, args,
                                          peer.empty() ? std::nullopt : std::optional(peer));
        auto doc = parse_result(result);
        print.emit(doc, doc.is_string() ? doc.get<std::string>() : doc.dump(2));
        return 0;
      }
      auto r = boot.network->invoke(client, channel, chaincode_id, method, args);
      json doc{{"tx_id", r.tx_id}, {"result", parse_result(r.result)}};
      if (!r.status) {
        doc["flag"] = "Pending";
        print.emit(doc, "tx_id: " + r.tx_id + "\nflag: Pending\n");
        throw Error(Errc::OrdererUnavailable, "commit of " + r.tx_id + " not observed in time");
      }
      auto flag = std::string(ledger::to_string(r.status->flag));
      doc["flag"] = flag;
      doc["block"] = r.status->block_number;
      print.emit(doc, "tx_id: " + r.tx_id + "\nflag: " + flag + "\nblock: " + std::to_string(r.status->block_number) +
                          "\nresult: " + doc["result"].dump() + "\n");
      if (r.status->flag != ledger::ValidationFlag::Valid) {
        throw std::runtime_error(json{{"error", flag}, {"message", "transaction " + r.tx_id + " was invalidated"}}.dump());
      }
      return 0;
    }

    if (state_export->parsed()) {
      dir.require();
      auto peer_dir = dir.ledgers() / peer;
      if (!fs::exists(peer_dir / (channel + ".blocks"))) {
        throw Error(Errc::NotJoined, peer + " holds no ledger for " + channel);
      }
      ledger::Ledger ledger(peer_dir, channel);
      auto dump = ledger.state().export_json();
      if (out_file.empty()) {
        out << dump << '\n';
      } else {
        write_file(out_file, dump);
        print.emit({{"peer", peer}, {"channel", channel}, {"height", ledger.height()}, {"file", out_file}},
                   "wrote " + out_file);
      }
      return 0;
    }

    if (chain_verify->parsed()) {
      dir.require();
      json peers = json::array();
      bool ok = true;
      std::optional<std::pair<std::uint64_t, crypto::Digest>> reference;
      std::ostringstream text;
      std::vector<fs::path> peer_dirs;
      for (const auto& entry : fs::directory_iterator(dir.ledgers())) peer_dirs.push_back(entry.path());
      std::sort(peer_dirs.begin(), peer_dirs.end());
      for (const auto& peer_dir : peer_dirs) {
        auto file = peer_dir / (channel + ".blocks");
        if (!fs::exists(file)) continue;
        ledger::BlockStore store(file);
        auto bad = store.verify_chain();
        bool agrees = true;
        if (!bad) {
          if (!reference) {
            reference.emplace(store.height(), store.tip_hash());
          } else if (reference->first == store.height()) {
            agrees = reference->second == store.tip_hash();
          }
        }
        ok = ok && !bad && agrees;
        auto name = peer_dir.filename().string();
        peers.push_back({{"peer", name},
                         {"height", store.height()},
                         {"tip", to_hex(store.tip_hash())},
                         {"intact", !bad},
                         {"firstBadBlock", bad ? json(*bad) : json(nullptr)},
                         {"agreesWithReference", agrees}});
        text << name << ": height " << store.height() << ", "
             << (bad ? "broken at block " + std::to_string(*bad) : std::string("intact"))
             << (agrees ? "" : ", tip differs") << '\n';
      }
      if (peers.empty()) throw Error(Errc::UnknownChannel, "no peer holds " + channel);
      print.emit({{"ok", ok}, {"channel", channel}, {"peers", peers}}, text.str() + (ok ? "ok" : "FAILED"));
      if (!ok) throw Error(Errc::HashMismatch, "chain verification failed for " + channel);
      return 0;
    }

    if (bench_run->parsed()) {
      auto rounds = bench::WorkloadConfig::parse_rounds(read_file(workload_file));
      bench::BenchmarkReport report;
      auto drive = [&](bench::Target& target) {
        report.target = target.describe();
        for (const auto& r : rounds) {
          err << "round " << r.name << " ..." << std::endl;
          report.rounds.push_back(bench::RoundReport::from(bench::run_round(target, r)));
        }
      };
      auto topo = dir.topology();
      auto id = g.identity.empty() ? default_identity(topo) : g.identity;
      if (!g.gateway_url.empty()) {
        auto [h, p] = parse_url(g.gateway_url);
        auto seeds = dir.seeds();
        if (!seeds.contains(id)) throw Error(Errc::UnknownIdentity, "no key for '" + id + "'");
        bench::HttpTarget target(h, p, id, seeds.at(id));
        drive(target);
      } else {
        auto boot = dir.open(topo);
        bench::NetworkTarget target(*boot.network, wallet_entry(boot, id), channel);
        drive(target);
      }
      if (!report_file.empty()) write_file(report_file, report.to_json().dump(2));
      print.emit(report.to_json(), report.render_text());
      return 0;
    }

    if (bench_report->parsed()) {
      auto report = bench::BenchmarkReport::from_json(json::parse(read_file(report_file)));
      print.emit(report.to_json(), report.render_text());
      return 0;
    }
  } catch (const Error& e) {
    std::string code(to_string(e.code()));
    std::string msg = e.what();
    if (msg.starts_with(code + ": ")) msg.erase(0, code.size() + 2);
    err << json{{"error", code}, {"message", msg}}.dump() << '\n';
    return 1;
  } catch (const json::exception& e) {
    err << json{{"error", "InvalidConfig"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    auto doc = json::parse(e.what(), nullptr, false);
    if (!doc.is_object() || !doc.contains("error")) doc = json{{"error", "Failure"}, {"message", e.what()}};
    err << doc.dump() << '\n';
    return 1;
  }
  err << json{{"error", "Usage"}, {"message", "no command given"}}.dump() << '\n';
  return 2;
}

}  // namespace donorchain::cli
