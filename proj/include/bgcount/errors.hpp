#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bgcount {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two grids (or a grid and a list) that must agree in size do not.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An argument is outside its documented domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A binary grid or model file is malformed. `offset()` is the byte
/// position at which decoding failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// A text record (JSON line, manifest) could not be parsed. `record()` is the
/// 1-based line number, or 0 when the whole document is at fault.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t record)
        : Error(record == 0 ? what : "line " + std::to_string(record) + ": " + what),
          record_(record) {}

    std::size_t record() const noexcept { return record_; }

private:
    std::size_t record_;
};

/// Non-finite value encountered in a numeric pipeline.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace bgcount
