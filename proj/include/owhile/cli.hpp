#pragma once

// Command-line front end. Kept as a library so that tests can drive it
// without spawning processes.

#include <iosfwd>
#include <string>
#include <vector>

namespace owhile {

enum ExitCode : int {
    kExitOk = 0,
    kExitProgramError = 1,
    kExitCheckFailed = 2,
    kExitUsage = 3,
    kExitOutOfFuel = 4,
};

// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace owhile
