#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "donorchain/chaincode/records.hpp"

// Donor screening for findMatch. Input is the raw (key, canonical JSON) pairs
// from a prefix scan; each kernel decodes every donor and keeps those that
// are Available and pass the compatibility predicate. Output is donor IDs in
// ascending order. The serial and OpenMP versions must agree exactly.
namespace donorchain::chaincode {

using StoredEntry = std::pair<std::string, std::string>;

std::vector<std::string> screen_donors_serial(const Record& patient, std::span<const StoredEntry> donors);
// Rethrows the first decode error (Errc::ValidationError) after the loop.
std::vector<std::string> screen_donors_parallel(const Record& patient, std::span<const StoredEntry> donors);

}  // namespace donorchain::chaincode
