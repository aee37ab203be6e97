#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snipscan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written. Carries the offending path.
class IoError : public Error {
public:
    IoError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Input bytes are not valid UTF-8.
class DecodeError : public Error {
public:
    DecodeError(const std::string& origin, std::size_t byte_offset)
        : Error(origin + ": invalid UTF-8 at byte offset " + std::to_string(byte_offset)),
          offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Malformed record in a line-oriented input (catalog, labels, truth, detail).
class ParseError : public Error {
public:
    ParseError(const std::string& origin, std::size_t line, const std::string& what)
        : Error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that breaks a semantic contract (taxonomy coverage,
/// regex compilation, id agreement between verdicts and ground truth).
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace snipscan
