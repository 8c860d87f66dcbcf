#pragma once

#include <iosfwd>

namespace spnp {

/// Command-line entry point. Exit codes: 0 success, 1 configuration error,
/// 2 structural failure, 3 solver failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spnp
