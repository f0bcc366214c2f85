#pragma once

#include <iosfwd>

namespace matprop {

/// Entry point of the `matprop` tool with injectable streams. Returns 0 on
/// success (verdicts are printed, never encoded in the exit code), 2 on usage
/// or input errors and 1 on other failures.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace matprop
