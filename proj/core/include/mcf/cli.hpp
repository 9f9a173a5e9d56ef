#pragma once

// Command-line front end, linked into the library so tests can drive it
// in-process.  Exit codes: 0 success, 1 usage, 2 validation/parse failure,
// 3 runtime failure.  Failures print one `error: <category>: <detail>`
// line on stderr.

#include <string>
#include <vector>

namespace mcf {

int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args); // without the program name

} // namespace mcf
