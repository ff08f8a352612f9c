#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace newscap::cli {

// Process exit statuses; every failure class has its own code.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,            // unknown flag, bad flag value, missing flag
  kExitIo = 3,               // missing or unreadable input, unwritable output
  kExitSchema = 4,           // input record violates its format
  kExitProtocol = 5,         // model endpoint broke the wire protocol
  kExitTimeout = 6,          // model endpoint did not answer in time
  kExitInvalidArgument = 7,  // values outside their domain
  kExitDocumentFailures = 8, // generate finished but some documents failed
  kExitInternal = 70,
};

// Runs the newscap command line. `args[0]` is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace newscap::cli
