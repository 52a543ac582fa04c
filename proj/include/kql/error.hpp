#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kql {

/// Base of every error raised by the library. `code()` is a short
/// machine-readable tag (e.g. "parse_error", "not_a_witness").
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("parse_error", message + " at line " + std::to_string(line) + ", column " +
                                   std::to_string(column)),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error("validation_error", message) {}
    ValidationError(std::string code, const std::string& message)
        : Error(std::move(code), message) {}
};

class SignatureMismatch : public Error {
public:
    explicit SignatureMismatch(const std::string& message)
        : Error("signature_mismatch", message) {}
};

class SizeGuardError : public Error {
public:
    explicit SizeGuardError(const std::string& message) : Error("size_guard", message) {}
};

} // namespace kql
