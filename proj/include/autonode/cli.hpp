#pragma once

#include <iosfwd>

namespace autonode::cli {

// Exit codes: 0 success, 1 domain failure (run failed, replay diverged),
// 2 usage or configuration error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace autonode::cli
