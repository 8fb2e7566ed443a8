#pragma once

#include <stdexcept>
#include <string>

namespace mss {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (empty clip, bad config, unknown id, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Alignment vectors, durations or matrix row counts disagree.
class AlignmentMismatch : public Error {
public:
    using Error::Error;
};

/// A duration entry is zero or negative.
class InvalidDuration : public Error {
public:
    using Error::Error;
};

/// An operation was requested that the model's mode does not provide.
class ModeError : public Error {
public:
    using Error::Error;
};

/// Non-finite values appeared in a loss, gradient or update.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A binary container (MELSPEC1, MSSCKPT1, WAV) failed to parse.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Checkpoint exists but belongs to a different model or mode.
class CheckpointMismatch : public Error {
public:
    using Error::Error;
};

/// A dataset, manifest or corpus file failed validation.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace mss
