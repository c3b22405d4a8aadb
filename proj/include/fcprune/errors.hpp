#pragma once

#include <stdexcept>
#include <string>

namespace fcprune {

// Thrown when a file cannot be read/written or its on-disk encoding is
// invalid (bad magic, truncated payload, ...). Maps to CLI exit code 4.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iterative computation produces non-finite values
// (divergent training, step size too large, ...). Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid parameters, shape mismatches and malformed configs throw
// std::invalid_argument; the CLI maps those to exit code 2.

} // namespace fcprune
