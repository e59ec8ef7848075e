#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace phadapt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failures of the numerical kernels (singular pivots, overflow, ...).
/// The CLI maps these to exit code 2.
class NumericError : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public NumericError {
public:
    using NumericError::NumericError;
};

class SingularStep : public NumericError {
public:
    using NumericError::NumericError;
};

class OverflowRisk : public NumericError {
public:
    using NumericError::NumericError;
};

class NoConvergence : public NumericError {
public:
    using NumericError::NumericError;
};

class NotSymmetric : public NumericError {
public:
    using NumericError::NumericError;
};

/// Shape or size disagreement between operands.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InvalidTheta : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class IndexOutOfRange : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Invalid system data; `what()` starts with the offending field path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, std::string message)
        : Error(field + ": " + message), field_(std::move(field)), message_(std::move(message)) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string field_;
    std::string message_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace phadapt
