#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfract::cli {

enum ExitCode : int {
  kOk = 0,
  kFailed = 1,  // a verification or the computation failed, or every input failed
  kUsage = 2,   // bad flags or no subcommand
};

// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace mfract::cli
