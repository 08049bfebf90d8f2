#pragma once

namespace sticky::cli {

/// Parses argv and runs one subcommand (simulate, flow, verify, converge,
/// weak-residual). Returns 0 on success, 1 if a check failed (the report is
/// still written) and 2 on a usage or input error.
int run(int argc, char** argv);

}  // namespace sticky::cli
