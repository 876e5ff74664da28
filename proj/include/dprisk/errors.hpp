#pragma once

#include <stdexcept>
#include <string>

namespace dprisk {

/// Missing files, bad configuration, violated preconditions. CLI exit code 2.
class InputError : public std::runtime_error {
  public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-convergence, rank deficiency and other numerical failures. CLI exit code 3.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data: bad headers, dates, enumerations, duplicates. CLI exit code 4.
class SchemaError : public std::runtime_error {
  public:
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dprisk
