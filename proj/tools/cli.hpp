#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace donorchain::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage error. Failures print a
// single JSON line {"error": ..., "message": ...} on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace donorchain::cli
