#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "donorchain/chaincode/records.hpp"
#include "donorchain/network/chaincode.hpp"

namespace donorchain::chaincode {

inline constexpr std::string_view kDonationChaincodeId = "donation";
inline constexpr std::string_view kRecordAddedEvent = "RecordAdded";
inline constexpr std::string_view kMatchSelectedEvent = "MatchSelected";

enum class MatchKernel { Parallel, Serial };

// The organ-donation contract. Methods and arguments (all strings):
//
//   addPatient / addDonor          [record JSON]
//   getPatient / getDonor          [id]
//   getAllPatients / getAllDonors  []
//   getMyPatients / getMyDonors    [hospital org id]  (defaults to the caller's org)
//   deletePatient / deleteDonor    [id]
//   findMatch                      [patientId]
//   selectMatch                    [patientId, donorId]
//   getPatientStatus               [patientId]
//
// Responses are compact JSON. The per-kind index key is written on every add
// and delete and read by every scan, so a scan conflicts at commit with any
// add or delete of that kind committed after its snapshot.
class DonationContract final : public network::Chaincode {
 public:
  explicit DonationContract(MatchKernel kernel = MatchKernel::Parallel) : kernel_(kernel) {}

  std::string id() const override { return std::string(kDonationChaincodeId); }
  std::string invoke(network::ChaincodeStub& stub, std::string_view method,
                     const std::vector<std::string>& args) override;

  static const std::vector<std::string>& methods();

 private:
  MatchKernel kernel_;
};

network::ChaincodeFactory donation_factory(MatchKernel kernel = MatchKernel::Parallel);

}  // namespace donorchain::chaincode
