#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcasim {

/// Runs the command line front end. `args` excludes the program name.
/// Returns 0 on success, 1 on domain or validation errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Help footer listing the coherence-vector defaults.
[[nodiscard]] std::string coherence_defaults_text();

}  // namespace qcasim
