#pragma once

#include <stdexcept>
#include <string>

namespace botwin {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input could not be read, or its content is not what the stage expects.
/// The CLI maps this family to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

class IngestError : public DataError {
public:
    using DataError::DataError;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

/// More than half of the lines failed to parse; most likely not a binetflow file.
class CorruptInputError : public DataError {
public:
    using DataError::DataError;
};

class EmptyInputError : public DataError {
public:
    using DataError::DataError;
};

class NumericInputError : public DataError {
public:
    using DataError::DataError;
};

class ConfigError : public DataError {
public:
    using DataError::DataError;
};

/// A documented precondition was violated by the caller (exit code 3 in the CLI).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace botwin
