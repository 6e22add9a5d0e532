#pragma once

namespace hdpmpm {

/// Command-line entry point. Exit codes: 0 success, 1 usage, 2 data error,
/// 3 numerical or saturation error.
int run_cli(int argc, const char* const* argv);

}  // namespace hdpmpm
