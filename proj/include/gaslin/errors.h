#pragma once

// Exception hierarchy shared by all gaslin modules. The CLI maps each family
// to a process exit code (see exit_code_for).

#include <stdexcept>
#include <string>

namespace gaslin {

// Bad argument to a pure function (nonpositive pressure, negative v_c, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Well-formed input on which the requested quantity is undefined
// (all flows zero, mean zero, no usable sample).
class DegenerateInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Solver produced a state outside model validity (p_out <= 0).
class NonphysicalResult : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Base for ingestion / time-series problems.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public DataError {
public:
    using DataError::DataError;
};

class MonotonicityError : public DataError {
public:
    using DataError::DataError;
};

class RangeError : public DataError {
public:
    using DataError::DataError;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gaslin
