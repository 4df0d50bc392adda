#pragma once

#include <stdexcept>
#include <string>

namespace avalign {

// Invalid or corrupt input data (bad file, schema violation, dim mismatch
// discovered while ingesting). Maps to exit code 2 in the CLI.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad invocation (unusable flag combination, out-of-range argument).
// Maps to exit code 1 in the CLI.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace avalign
