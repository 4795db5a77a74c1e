#pragma once

namespace stlsmooth::cli {

/// Parses arguments and runs one subcommand; returns the process exit code.
int run(int argc, char** argv);

}  // namespace stlsmooth::cli
