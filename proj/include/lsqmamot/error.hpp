#pragma once

#include <stdexcept>
#include <string>

namespace lsqmamot {

/// Caller passed arguments that violate an operation's preconditions.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Experiment configuration could not be interpreted.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data files are malformed, inconsistent or unreadable.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : DataError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ReferentialError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace lsqmamot
