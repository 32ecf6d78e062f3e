#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace planestack {

/// Process exit codes. The numbering is stable.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitUsage = 2,       // unknown flag, missing or malformed argument
    kExitIo = 3,          // missing or unreadable/unwritable file
    kExitFormat = 4,      // input file violates its format
    kExitInvalid = 5,     // arguments parse but are inconsistent or out of range
    kExitNumerical = 6,   // optimization failure
};

/// Runs the command line `args` (args[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace planestack
