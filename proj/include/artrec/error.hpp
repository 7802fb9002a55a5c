#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace artrec {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value. `field()` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A record or value violates a data invariant. Line is 1-based, 0 when the
/// error does not come from a file.
class ValidationError : public Error {
public:
    ValidationError(const std::string& message, std::size_t line = 0, std::string field = {})
        : Error(format(message, line, field)), message_(message), line_(line), field_(std::move(field)) {}

    /// The message without the line/field prefix.
    const std::string& message() const noexcept { return message_; }
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(const std::string& message, std::size_t line, const std::string& field) {
        std::string out;
        if (line != 0) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += "field '" + field + "': ";
        return out + message;
    }

    std::string message_;
    std::size_t line_;
    std::string field_;
};

/// Malformed prompt text. Offset is the byte position of the problem.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error(message + " at byte " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Text generation failed. status is the HTTP status, or 0 for transport errors.
class BackendError : public Error {
public:
    BackendError(const std::string& message, int status = 0, std::string body_excerpt = {})
        : Error(message), status_(status), body_excerpt_(std::move(body_excerpt)) {}

    int status() const noexcept { return status_; }
    const std::string& body_excerpt() const noexcept { return body_excerpt_; }

private:
    int status_;
    std::string body_excerpt_;
};

/// Training could not produce a usable checkpoint.
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace artrec
