#include "semcomp/error.hpp"

namespace semcomp {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::Duplicate: return "duplicate";
    case ErrorCode::UnknownId: return "unknown-id";
    case ErrorCode::UnknownClass: return "unknown-class";
    case ErrorCode::StaleClosure: return "stale-closure";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::StaleSuggestion: return "stale-suggestion";
    case ErrorCode::Usage: return "usage";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(message), code_(code) {}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string &message)
    : Error(ErrorCode::Parse,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line), column_(column) {}

}  // namespace semcomp
