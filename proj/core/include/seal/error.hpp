#pragma once

#include <stdexcept>
#include <string>

namespace seal {

// Problems rooted in the data being processed: malformed tables, schema
// mismatches, out-of-range values, unusable datasets. The CLI maps these
// to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Caller misuse: conflicting options, arguments outside their documented
// domain. The CLI maps these to exit code 1.
class UsageError : public std::invalid_argument {
public:
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace seal
