#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace donorchain::chaincode {

enum class RecordKind { Patient, Donor };
enum class Organ { Kidney, Liver, Heart, Lung, Pancreas };
enum class BloodGroup { APos, ANeg, BPos, BNeg, ABPos, ABNeg, OPos, ONeg };
enum class Gender { M, F, O };
enum class RecordStatus { Waiting, Available, Matched };

std::string_view to_string(RecordKind v) noexcept;
std::string_view to_string(Organ v) noexcept;
std::string_view to_string(BloodGroup v) noexcept;
std::string_view to_string(Gender v) noexcept;
std::string_view to_string(RecordStatus v) noexcept;

// Case-insensitive; throw Error(ValidationError).
Organ parse_organ(std::string_view s);
BloodGroup parse_blood_group(std::string_view s);
Gender parse_gender(std::string_view s);
RecordStatus parse_status(std::string_view s);

inline constexpr std::string_view kPatientPrefix = "PAT_";
inline constexpr std::string_view kDonorPrefix = "DON_";
inline constexpr std::string_view kPatientIndex = "IDX_PAT";
inline constexpr std::string_view kDonorIndex = "IDX_DON";

std::string_view key_prefix(RecordKind kind) noexcept;
std::string_view index_key(RecordKind kind) noexcept;
std::string record_key(RecordKind kind, std::string_view id);

// A patient or a donor. For donors `organ` is the organ offered; the wire
// name stays organRequired for both kinds.
struct Record {
  RecordKind kind = RecordKind::Patient;
  std::string id;
  std::string first_name;
  std::string last_name;
  int age = 0;
  std::string phone_number;
  std::string address;
  Organ organ = Organ::Kidney;
  BloodGroup blood_group = BloodGroup::OPos;
  Gender gender = Gender::F;
  std::string medhistory;
  std::string hospital_id;
  std::string match;  // empty until selected
  RecordStatus status = RecordStatus::Waiting;

  std::string key() const { return record_key(kind, id); }
  bool matched() const { return status == RecordStatus::Matched; }

  // Wire form: ID, firstName, lastName, age, phoneNumber, address,
  // organRequired, bloodgroup, gender, medhistory, hospitalId, match, status.
  nlohmann::json to_json() const;
  // Sorted keys, no whitespace. This is the value stored in world state.
  std::string canonical() const;

  // Full stored form, enums and invariants checked.
  static Record from_json(RecordKind kind, const nlohmann::json& doc);
  // Registration input: the caller-supplied fields only. hospitalId, match and
  // status are assigned by the contract.
  static Record from_registration(RecordKind kind, const nlohmann::json& doc, const std::string& hospital_id);

  bool operator==(const Record&) const = default;
};

// The matchmaking predicate: same blood group, same organ, same gender.
bool compatible(const Record& patient, const Record& donor);

}  // namespace donorchain::chaincode
