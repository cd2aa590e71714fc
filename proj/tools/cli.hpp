#pragma once

#include <iosfwd>

namespace semcomp {

// Exit codes: 0 success, 1 diagnostics with errors (or an engine error),
// 2 usage or parse failure.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace semcomp
