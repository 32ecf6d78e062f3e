#pragma once

#include <stdexcept>
#include <string>

namespace planestack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad dimensions, out-of-range index, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
    using Error::Error;
};

/// A serialized input (PGM, model JSON, manifest) does not follow its schema.
class FormatError : public Error {
public:
    using Error::Error;
};

enum class PgmErrorKind { MalformedHeader, UnsupportedMaxval, TruncatedPayload, InvalidPixel };

class PgmError : public FormatError {
public:
    PgmError(PgmErrorKind kind, const std::string& what) : FormatError(what), kind_(kind) {}
    PgmErrorKind kind() const noexcept { return kind_; }

private:
    PgmErrorKind kind_;
};

/// Optimization hit a non-finite objective or could not make progress.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace planestack
