#include "donorchain/chaincode/donation.hpp"

#include <functional>
#include <map>
#include <optional>

#include "donorchain/chaincode/matching.hpp"
#include "donorchain/common/error.hpp"

namespace donorchain::chaincode {

namespace {

using identity::Action;
using identity::Resource;
using network::ChaincodeStub;
using nlohmann::json;

struct KindActions {
  Action add, get, get_all, get_my, del;
};

const KindActions& actions_for(RecordKind kind) {
  static const KindActions patient{Action::AddPatient, Action::GetPatient, Action::GetAllPatients,
                                   Action::GetMyPatients, Action::DeletePatient};
  static const KindActions donor{Action::AddDonor, Action::GetDonor, Action::GetAllDonors, Action::GetMyDonors,
                                 Action::DeleteDonor};
  return kind == RecordKind::Patient ? patient : donor;
}

void expect_args(const std::vector<std::string>& args, std::size_t n, std::string_view method) {
  if (args.size() != n) {
    throw Error(Errc::ValidationError, std::string(method) + " takes " + std::to_string(n) + " argument(s), got " +
                                           std::to_string(args.size()));
  }
}

json parse_body(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ValidationError, std::string("malformed record JSON: ") + e.what());
  }
}

Record decode_stored(RecordKind kind, const std::string& value) {
  try {
    return Record::from_json(kind, json::parse(value));
  } catch (const json::exception& e) {
    throw Error(Errc::ValidationError, std::string("corrupt stored record: ") + e.what());
  }
}

std::optional<Record> read_record(ChaincodeStub& stub, RecordKind kind, const std::string& id) {
  auto value = stub.get_state(record_key(kind, id));
  if (!value) return std::nullopt;
  return decode_stored(kind, *value);
}

// Loads a record the caller must be allowed to act on. A caller who could not
// act on the record even if it belonged to their own organization learns
// nothing about whether it exists.
Record load_authorized(ChaincodeStub& stub, RecordKind kind, const std::string& id, Action action) {
  auto record = read_record(stub, kind, id);
  if (!record) {
    stub.require(action, Resource{stub.caller().org_id, id});
    throw Error(Errc::NotFound, std::string(to_string(kind)) + " " + id + " not found");
  }
  stub.require(action, Resource{record->hospital_id, record->id});
  return *record;
}

void touch_index(ChaincodeStub& stub, RecordKind kind) {
  stub.put_state(std::string(index_key(kind)), stub.context().tx_id);
}

std::vector<StoredEntry> scan(ChaincodeStub& stub, RecordKind kind) {
  stub.get_state(index_key(kind));
  return stub.get_state_by_prefix(key_prefix(kind));
}

std::string add_record(ChaincodeStub& stub, RecordKind kind, const std::vector<std::string>& args) {
  expect_args(args, 1, kind == RecordKind::Patient ? "addPatient" : "addDonor");
  const auto& acts = actions_for(kind);
  auto doc = parse_body(args[0]);
  std::string id = doc.is_object() && doc.contains("ID") && doc["ID"].is_string() ? doc["ID"].get<std::string>() : "";
  stub.require(acts.add, Resource{stub.caller().org_id, id});

  auto record = Record::from_registration(kind, doc, stub.caller().org_id);
  if (stub.get_state(record.key())) {
    throw Error(Errc::DuplicateID, std::string(to_string(kind)) + " " + record.id + " already exists");
  }
  stub.put_state(record.key(), record.canonical());
  touch_index(stub, kind);
  json event{{"kind", to_string(kind)}, {"id", record.id}, {"hospitalId", record.hospital_id}};
  stub.set_event(std::string(kRecordAddedEvent), event.dump());
  return json{{"key", record.key()}, {"record", record.to_json()}}.dump();
}

std::string get_record(ChaincodeStub& stub, RecordKind kind, const std::vector<std::string>& args) {
  expect_args(args, 1, kind == RecordKind::Patient ? "getPatient" : "getDonor");
  return load_authorized(stub, kind, args[0], actions_for(kind).get).canonical();
}

std::string list_records(ChaincodeStub& stub, RecordKind kind, const std::optional<std::string>& hospital) {
  json out = json::array();
  for (const auto& [key, value] : scan(stub, kind)) {
    auto record = decode_stored(kind, value);
    if (!hospital || record.hospital_id == *hospital) out.push_back(record.to_json());
  }
  return out.dump();
}

std::string get_all(ChaincodeStub& stub, RecordKind kind, const std::vector<std::string>& args) {
  expect_args(args, 0, kind == RecordKind::Patient ? "getAllPatients" : "getAllDonors");
  stub.require(actions_for(kind).get_all, Resource{});
  return list_records(stub, kind, std::nullopt);
}

std::string get_my(ChaincodeStub& stub, RecordKind kind, const std::vector<std::string>& args) {
  if (args.size() > 1) expect_args(args, 1, kind == RecordKind::Patient ? "getMyPatients" : "getMyDonors");
  std::string hospital = args.empty() || args[0].empty() ? stub.caller().org_id : args[0];
  stub.require(actions_for(kind).get_my, Resource{hospital, std::nullopt});
  return list_records(stub, kind, hospital);
}

std::string delete_record(ChaincodeStub& stub, RecordKind kind, const std::vector<std::string>& args) {
  expect_args(args, 1, kind == RecordKind::Patient ? "deletePatient" : "deleteDonor");
  auto record = load_authorized(stub, kind, args[0], actions_for(kind).del);
  if (record.matched()) {
    throw Error(Errc::MatchedRecordLocked,
                std::string(to_string(kind)) + " " + record.id + " is matched with " + record.match);
  }
  stub.del_state(record.key());
  touch_index(stub, kind);
  return json{{"key", record.key()}, {"deleted", true}}.dump();
}

std::string find_match(ChaincodeStub& stub, const std::vector<std::string>& args, MatchKernel kernel) {
  expect_args(args, 1, "findMatch");
  auto patient = load_authorized(stub, RecordKind::Patient, args[0], Action::FindMatch);
  if (patient.matched()) {
    throw Error(Errc::AlreadyMatched, "patient " + patient.id + " is already matched with " + patient.match);
  }
  auto donors = scan(stub, RecordKind::Donor);
  auto candidates = kernel == MatchKernel::Parallel ? screen_donors_parallel(patient, donors)
                                                    : screen_donors_serial(patient, donors);
  return json{{"patientId", patient.id},
              {"candidates", candidates},
              {"producedAt", stub.context().snapshot_height}}
      .dump();
}

std::string select_match(ChaincodeStub& stub, const std::vector<std::string>& args) {
  expect_args(args, 2, "selectMatch");
  auto patient = load_authorized(stub, RecordKind::Patient, args[0], Action::SelectMatch);
  auto donor = read_record(stub, RecordKind::Donor, args[1]);
  if (!donor) throw Error(Errc::NotFound, "donor " + args[1] + " not found");
  if (patient.matched()) {
    throw Error(Errc::AlreadyMatched, "patient " + patient.id + " is already matched with " + patient.match);
  }
  if (donor->matched()) {
    throw Error(Errc::AlreadyMatched, "donor " + donor->id + " is already matched with " + donor->match);
  }
  if (!compatible(patient, *donor)) {
    throw Error(Errc::NotAMatch, "donor " + donor->id + " does not match patient " + patient.id);
  }

  patient.match = donor->id;
  patient.status = RecordStatus::Matched;
  donor->match = patient.id;
  donor->status = RecordStatus::Matched;
  stub.put_state(patient.key(), patient.canonical());
  stub.put_state(donor->key(), donor->canonical());

  json event{{"patientId", patient.id},
             {"donorId", donor->id},
             {"organ", to_string(patient.organ)},
             {"patientHospital", patient.hospital_id},
             {"donorHospital", donor->hospital_id}};
  stub.set_event(std::string(kMatchSelectedEvent), event.dump());
  return json{{"patientId", patient.id}, {"donorId", donor->id}}.dump();
}

std::string patient_status(ChaincodeStub& stub, const std::vector<std::string>& args) {
  expect_args(args, 1, "getPatientStatus");
  auto patient = load_authorized(stub, RecordKind::Patient, args[0], Action::GetPatientStatus);
  json out{{"patientId", patient.id}, {"status", to_string(patient.status)}, {"hospitalId", patient.hospital_id}};
  out["matchedDonorId"] = patient.match.empty() ? json(nullptr) : json(patient.match);
  return out.dump();
}

using Handler = std::function<std::string(ChaincodeStub&, const std::vector<std::string>&, MatchKernel)>;

const std::map<std::string, Handler, std::less<>>& handlers() {
  static const std::map<std::string, Handler, std::less<>> table = [] {
    std::map<std::string, Handler, std::less<>> t;
    for (auto kind : {RecordKind::Patient, RecordKind::Donor}) {
      std::string noun = kind == RecordKind::Patient ? "Patient" : "Donor";
      t["add" + noun] = [kind](auto& s, const auto& a, MatchKernel) { return add_record(s, kind, a); };
      t["get" + noun] = [kind](auto& s, const auto& a, MatchKernel) { return get_record(s, kind, a); };
      t["getAll" + noun + "s"] = [kind](auto& s, const auto& a, MatchKernel) { return get_all(s, kind, a); };
      t["getMy" + noun + "s"] = [kind](auto& s, const auto& a, MatchKernel) { return get_my(s, kind, a); };
      t["delete" + noun] = [kind](auto& s, const auto& a, MatchKernel) { return delete_record(s, kind, a); };
    }
    t["findMatch"] = [](auto& s, const auto& a, MatchKernel k) { return find_match(s, a, k); };
    t["selectMatch"] = [](auto& s, const auto& a, MatchKernel) { return select_match(s, a); };
    t["getPatientStatus"] = [](auto& s, const auto& a, MatchKernel) { return patient_status(s, a); };
    return t;
  }();
  return table;
}

}  // namespace

std::string DonationContract::invoke(ChaincodeStub& stub, std::string_view method,
                                     const std::vector<std::string>& args) {
  auto it = handlers().find(method);
  if (it == handlers().end()) throw Error(Errc::UnknownMethod, "donation has no method " + std::string(method));
  return it->second(stub, args, kernel_);
}

const std::vector<std::string>& DonationContract::methods() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, handler] : handlers()) out.push_back(name);
    return out;
  }();
  return names;
}

network::ChaincodeFactory donation_factory(MatchKernel kernel) {
  return [kernel] { return std::make_shared<DonationContract>(kernel); };
}

}  // namespace donorchain::chaincode
