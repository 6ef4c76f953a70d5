#pragma once

#include <iosfwd>

namespace eshelby::cli {

/// Subcommands: forward, reconstruct, stress, steady-state, metrics.
/// Returns the process exit status; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eshelby::cli
