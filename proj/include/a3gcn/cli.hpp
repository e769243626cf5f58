#pragma once

namespace a3gcn {

/// Entry point behind the a3gcn binary; returns the process exit code.
/// Subcommands: run, sweep, gen-sbm, inject-noise, export-embeddings,
/// validate. Kept in the library so tests can drive it in-process.
int run_cli(int argc, const char* const* argv);

}  // namespace a3gcn
