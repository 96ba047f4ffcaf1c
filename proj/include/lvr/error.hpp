// Error types shared across the toolkit.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lvr {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller supplied an argument outside the operation's domain.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Data violates a series invariant (ordering, bid <= ask, resolution, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// A series does not cover the instants an operation needs.
class InsufficientData : public Error {
public:
    using Error::Error;
};

// Regression could not be performed on the requested range.
class FitError : public Error {
public:
    using Error::Error;
};

// An input file could not be opened or read.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace lvr
