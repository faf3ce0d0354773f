#pragma once

#include <stdexcept>
#include <string>

namespace clustreg {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

// Input text violates a documented file format. The message carries the
// location (file, row, column) of the first offending cell.
class FormatError : public Error {
public:
    using Error::Error;
};

// A precondition of a numerical or domain operation does not hold.
class DomainError : public Error {
public:
    using Error::Error;
};

// Wraps a failure raised inside a named pipeline stage. `io` records that
// the cause was an IoError or FormatError.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what, bool io = false)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)), io_(io) {}

    const std::string& stage() const noexcept { return stage_; }
    bool io() const noexcept { return io_; }

private:
    std::string stage_;
    bool io_ = false;
};

}  // namespace clustreg
