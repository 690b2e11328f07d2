#include "donorchain/chaincode/records.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "donorchain/common/error.hpp"

namespace donorchain::chaincode {

namespace {

constexpr std::array<std::string_view, 5> kOrgans{"kidney", "liver", "heart", "lung", "pancreas"};
constexpr std::array<std::string_view, 8> kBloodGroups{"a+", "a-", "b+", "b-", "ab+", "ab-", "o+", "o-"};
constexpr std::array<std::string_view, 3> kGenders{"m", "f", "o"};
constexpr std::array<std::string_view, 3> kStatuses{"waiting", "available", "matched"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

template <typename E, std::size_t N>
E parse_enum(const std::array<std::string_view, N>& names, std::string_view s, std::string_view what) {
  auto l = lower(s);
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == l) return static_cast<E>(i);
  }
  throw Error(Errc::ValidationError, "invalid " + std::string(what) + " '" + std::string(s) + "'");
}

const nlohmann::json& field(const nlohmann::json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) {
    throw Error(Errc::ValidationError, std::string("missing field ") + name);
  }
  return doc.at(name);
}

std::string text(const nlohmann::json& doc, const char* name, bool required_nonempty) {
  const auto& v = field(doc, name);
  if (!v.is_string()) throw Error(Errc::ValidationError, std::string(name) + " must be a string");
  auto s = v.get<std::string>();
  if (required_nonempty && s.empty()) throw Error(Errc::ValidationError, std::string(name) + " is empty");
  return s;
}

int age_of(const nlohmann::json& doc) {
  const auto& v = field(doc, "age");
  long long age = 0;
  if (v.is_number_integer()) {
    age = v.get<long long>();
  } else if (v.is_string()) {
    try {
      std::size_t used = 0;
      auto s = v.get<std::string>();
      age = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw Error(Errc::ValidationError, "age must be an integer");
    }
  } else {
    throw Error(Errc::ValidationError, "age must be an integer");
  }
  if (age < 1 || age > 150) throw Error(Errc::ValidationError, "age must be between 1 and 150, got " + std::to_string(age));
  return static_cast<int>(age);
}

Record base_fields(RecordKind kind, const nlohmann::json& doc) {
  Record r;
  r.kind = kind;
  r.id = text(doc, "ID", true);
  r.first_name = text(doc, "firstName", true);
  r.last_name = text(doc, "lastName", true);
  r.age = age_of(doc);
  r.phone_number = text(doc, "phoneNumber", false);
  r.address = text(doc, "address", false);
  r.organ = parse_organ(text(doc, "organRequired", true));
  r.blood_group = parse_blood_group(text(doc, "bloodgroup", true));
  r.gender = parse_gender(text(doc, "gender", true));
  r.medhistory = text(doc, "medhistory", false);
  return r;
}

}  // namespace

std::string_view to_string(RecordKind v) noexcept { return v == RecordKind::Patient ? "patient" : "donor"; }
std::string_view to_string(Organ v) noexcept { return kOrgans[static_cast<std::size_t>(v)]; }
std::string_view to_string(BloodGroup v) noexcept { return kBloodGroups[static_cast<std::size_t>(v)]; }
std::string_view to_string(Gender v) noexcept { return kGenders[static_cast<std::size_t>(v)]; }
std::string_view to_string(RecordStatus v) noexcept { return kStatuses[static_cast<std::size_t>(v)]; }

Organ parse_organ(std::string_view s) { return parse_enum<Organ>(kOrgans, s, "organ"); }
BloodGroup parse_blood_group(std::string_view s) { return parse_enum<BloodGroup>(kBloodGroups, s, "blood group"); }
Gender parse_gender(std::string_view s) { return parse_enum<Gender>(kGenders, s, "gender"); }
RecordStatus parse_status(std::string_view s) { return parse_enum<RecordStatus>(kStatuses, s, "status"); }

std::string_view key_prefix(RecordKind kind) noexcept {
  return kind == RecordKind::Patient ? kPatientPrefix : kDonorPrefix;
}

std::string_view index_key(RecordKind kind) noexcept {
  return kind == RecordKind::Patient ? kPatientIndex : kDonorIndex;
}

std::string record_key(RecordKind kind, std::string_view id) {
  return std::string(key_prefix(kind)) + std::string(id);
}

nlohmann::json Record::to_json() const {
  return {
      {"ID", id},
      {"firstName", first_name},
      {"lastName", last_name},
      {"age", age},
      {"phoneNumber", phone_number},
      {"address", address},
      {"organRequired", to_string(organ)},
      {"bloodgroup", to_string(blood_group)},
      {"gender", to_string(gender)},
      {"medhistory", medhistory},
      {"hospitalId", hospital_id},
      {"match", match},
      {"status", to_string(status)},
  };
}

std::string Record::canonical() const { return to_json().dump(); }

Record Record::from_json(RecordKind kind, const nlohmann::json& doc) {
  auto r = base_fields(kind, doc);
  r.hospital_id = text(doc, "hospitalId", true);
  r.match = text(doc, "match", false);
  r.status = parse_status(text(doc, "status", true));
  auto unmatched = kind == RecordKind::Patient ? RecordStatus::Waiting : RecordStatus::Available;
  if (r.status != RecordStatus::Matched && r.status != unmatched) {
    throw Error(Errc::ValidationError, "status '" + std::string(to_string(r.status)) + "' is not valid for a " +
                                           std::string(to_string(kind)));
  }
  if (r.matched() == r.match.empty()) throw Error(Errc::ValidationError, "status and match disagree for " + r.id);
  return r;
}

Record Record::from_registration(RecordKind kind, const nlohmann::json& doc, const std::string& hospital_id) {
  auto r = base_fields(kind, doc);
  r.hospital_id = hospital_id;
  r.status = kind == RecordKind::Patient ? RecordStatus::Waiting : RecordStatus::Available;
  return r;
}

bool compatible(const Record& patient, const Record& donor) {
  return donor.blood_group == patient.blood_group && donor.organ == patient.organ && donor.gender == patient.gender;
}

}  // namespace donorchain::chaincode
