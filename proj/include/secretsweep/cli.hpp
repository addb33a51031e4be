#pragma once

#include <ostream>

namespace secretsweep {

/// Entry point of the secretsweep command. Exit codes: 0 success, 1 error,
/// 2 findings present under --fail-on-detect.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace secretsweep
