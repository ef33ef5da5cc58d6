#pragma once

#include <iosfwd>

namespace chasm {

/// Exit codes: 0 ok, 1 runtime error, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chasm
