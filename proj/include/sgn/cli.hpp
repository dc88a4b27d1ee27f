#pragma once

namespace sgn {

// Full command-line tool as a callable, so tests can drive it in-process.
// Exit codes: 0 success (solve converged / probe negative), 1 probe positive,
// 2 solver stopped without converging, 3 numerical or capacity failure,
// 64 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace sgn
