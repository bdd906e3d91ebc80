#pragma once

#include <stdexcept>
#include <string>

namespace gppx {

/// Process exit codes used by the command line front end.
enum class ExitCode : int {
    success = 0,
    usage = 1,      // bad flags or config
    data = 2,       // unreadable, malformed or degenerate input data
    numerical = 3,  // SVD failure, non-finite loss or gradient
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual ExitCode exit_code() const noexcept = 0;
};

class ConfigError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

/// Synthetic-data spec violates its schema; the message carries the field path.
class SpecError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class DataError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::data; }
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class ShapeError : public DataError {
public:
    using DataError::DataError;
};

class EmptyRegionError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateInputError : public DataError {
public:
    using DataError::DataError;
};

class NumericalError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::numerical; }
};

}  // namespace gppx
