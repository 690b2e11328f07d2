#include "donorchain/chaincode/matching.hpp"

#include <algorithm>
#include <exception>
#include <mutex>

#include "donorchain/common/error.hpp"

namespace donorchain::chaincode {

namespace {

Record decode_donor(const StoredEntry& entry) {
  try {
    return Record::from_json(RecordKind::Donor, nlohmann::json::parse(entry.second));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ValidationError, "corrupt donor record at " + entry.first + ": " + e.what());
  }
}

bool eligible(const Record& patient, const Record& donor) {
  return donor.status == RecordStatus::Available && compatible(patient, donor);
}

}  // namespace

std::vector<std::string> screen_donors_serial(const Record& patient, std::span<const StoredEntry> donors) {
  std::vector<std::string> out;
  for (const auto& entry : donors) {
    auto donor = decode_donor(entry);
    if (eligible(patient, donor)) out.push_back(donor.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> screen_donors_parallel(const Record& patient, std::span<const StoredEntry> donors) {
  const auto n = static_cast<long>(donors.size());
  std::vector<std::string> ids(donors.size());
  std::vector<char> keep(donors.size(), 0);
  std::exception_ptr failure;
  std::mutex failure_mu;

#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      auto donor = decode_donor(donors[static_cast<std::size_t>(i)]);
      if (eligible(patient, donor)) {
        keep[static_cast<std::size_t>(i)] = 1;
        ids[static_cast<std::size_t>(i)] = std::move(donor.id);
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::string> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (keep[i]) out.push_back(std::move(ids[i]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace donorchain::chaincode
