#pragma once

#include <string>
#include <string_view>

namespace semcomp {

enum class Severity { Error, Warning };

enum class DiagnosticKind {
    TypeMismatch,
    UnboundInput,
    UnsatisfiedPrecondition,
    MutexConflict,
    DanglingStep,
    WeakMatch,
    UnresolvedReference,
};

std::string_view to_string(Severity severity);
std::string_view to_string(DiagnosticKind kind);

// `location` names a process element ("step:s2", "consolidation:s1.quote->s2.quote",
// "service:QuoteService/inputs/rfq", ...); `branch` is set for findings inside
// a Choice branch.
struct Diagnostic {
    Severity severity = Severity::Warning;
    DiagnosticKind kind = DiagnosticKind::WeakMatch;
    std::string location;
    std::string explanation;
    std::string branch;

    friend bool operator==(const Diagnostic &, const Diagnostic &) = default;
};

inline bool is_error(const Diagnostic &d) { return d.severity == Severity::Error; }

}  // namespace semcomp
