#pragma once

#include <string>
#include <vector>

namespace mixvar::cli {

/// Runs the tool with argv-style arguments (program name excluded).
/// Returns the process exit code: 0 iff every requested computation
/// succeeded (for `fit`, iff at least one requested family succeeded).
int run(const std::vector<std::string>& args);

}  // namespace mixvar::cli
