#pragma once

#include <iosfwd>

namespace mpmab {

/// Entry point of the `mpmab` tool: generate | run | sweep | plot.
/// Returns 0 on success, 2 on argument errors and 1 on runtime errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mpmab
