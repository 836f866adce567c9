#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcnn::cli {

/// Runs one command line (args excludes the program name). Returns the
/// process exit code; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace mcnn::cli
