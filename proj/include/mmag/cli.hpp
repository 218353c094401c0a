#pragma once

namespace mmag {

// Entry point of the command-line tool; returns the process exit code
// (0 success, 2 validation error, 3 solver error, 4 budget exceeded).
int run_cli(int argc, const char* const* argv);

}  // namespace mmag
