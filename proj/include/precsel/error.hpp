#pragma once

#include <stdexcept>
#include <string>

namespace precsel {

/// Base class for errors caused by bad or unusable input data (exit code 2
/// in the command-line tool). Anything else escaping is an internal error.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class UnsupportedFormat : public ParseError {
public:
    using ParseError::ParseError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class NotFoundError : public DataError {
public:
    using DataError::DataError;
};

class ShapeError : public DataError {
public:
    using DataError::DataError;
};

/// Requested measure is mathematically undefined (e.g. relative residual with b = 0).
class UndefinedMeasure : public DataError {
public:
    using DataError::DataError;
};

/// Violated operation precondition that callers are expected to guarantee.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace precsel
