#pragma once

#include <iosfwd>

namespace gwb::cli {

/// Exit codes: 0 success, 1 module or I/O error (JSON error record on err),
/// 2 usage or input-parse error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gwb::cli
