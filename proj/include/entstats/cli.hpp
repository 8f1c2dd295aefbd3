#pragma once

#include <string>
#include <vector>

namespace entstats::cli {

// Subcommand entry point: ingest | synth | train | tag | stats | estimate
// | compare. Returns 0 on success, 1 on usage errors, 2 on data or
// configuration errors.
int run(int argc, const char* const* argv);

// Convenience overload for tests; args exclude the program name.
int run(const std::vector<std::string>& args);

} // namespace entstats::cli
