#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semcomp {

enum class ErrorCode {
    Parse,
    Conflict,
    Duplicate,
    UnknownId,
    UnknownClass,
    StaleClosure,
    Precondition,
    StaleSuggestion,
    Usage,
    Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Carries the 1-based position of the offending token.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string &message);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace semcomp
