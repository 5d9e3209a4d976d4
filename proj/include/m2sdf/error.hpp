#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace m2sdf {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class RegistrationError : public Error {
public:
    using Error::Error;
};

class CheckpointFormatError : public Error {
public:
    using Error::Error;
};

class CheckpointVersionError : public Error {
public:
    using Error::Error;
};

/// Raised when an optimisation step produces a non-finite loss.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, std::int64_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t step_;
};

}  // namespace m2sdf
