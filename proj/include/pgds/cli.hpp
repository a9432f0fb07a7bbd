#pragma once
// Command-line entry point: curate, embed, train, eval, mock-run, report.

#include <ostream>
#include <string>
#include <vector>

namespace pgds {

// args[0] is the program name. Returns 0 on success, 1 for invalid input or
// usage, 2 for runtime failures and interrupts.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pgds
