#pragma once

// Mixed-initiative assistance over a partial composite process: suggestions,
// completion and verification. Nothing here mutates its inputs; callers
// decide whether to apply a returned delta.

#include "semcomp/diagnostic.hpp"
#include "semcomp/planner.hpp"
#include "semcomp/process.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace semcomp {

struct Snapshot {
    std::shared_ptr<const OntologyStore> ontology;
    std::shared_ptr<const Registry> registry;
};

enum class SuggestionKind { Consolidation, Ordering, Insertion, Removal, Relaxation };

std::string_view to_string(SuggestionKind kind);
SuggestionKind parse_suggestion_kind(std::string_view text);

struct Suggestion {
    std::string id;  // assigned by the session that issues it
    SuggestionKind kind = SuggestionKind::Consolidation;
    Delta payload;
    std::optional<AbstractRequest> revised_request;  // Relaxation only
    std::string justification;
    MatchDegree match;  // best degree behind the suggestion, when one applies
    Score score;
    bool weak = false;  // rests on a Subsume match
    std::uint64_t basis = 0;  // content hash of the process it was computed on

    friend bool operator==(const Suggestion &, const Suggestion &) = default;
};

// Error kinds a suggestion of this kind is meant to address.
std::vector<DiagnosticKind> targeted_kinds(SuggestionKind kind);

std::size_t count_errors(const std::vector<Diagnostic> &diagnostics,
                         std::span<const DiagnosticKind> kinds);

// Dataflow ---------------------------------------------------------------

std::vector<Suggestion> suggest_consolidations(const CompositeProcess &process,
                                               std::string_view producer,
                                               std::string_view consumer,
                                               const Snapshot &snapshot);

struct Completion {
    CompositeProcess process;
    Delta delta;                       // the consolidations applied
    std::vector<Suggestion> applied;
    std::vector<Suggestion> competing;  // tied candidates left to the user
};

Completion complete_dataflow(const CompositeProcess &process, const Snapshot &snapshot);

std::vector<Diagnostic> verify_dataflow(const CompositeProcess &process, const Snapshot &snapshot,
                                        const AbstractRequest *request = nullptr);

// Control flow -----------------------------------------------------------

// An empty scope checks every step; otherwise only findings that touch one
// of the listed steps are reported.
std::vector<Diagnostic> verify_controlflow(const CompositeProcess &process,
                                           const AbstractRequest *request,
                                           const Snapshot &snapshot,
                                           std::span<const std::string> scope = {});

// verify_dataflow + verify_controlflow.
std::vector<Diagnostic> verify_all(const CompositeProcess &process, const AbstractRequest *request,
                                   const Snapshot &snapshot);

std::vector<Suggestion> suggest_orderings(const CompositeProcess &process,
                                          const Snapshot &snapshot,
                                          const AbstractRequest *request = nullptr);

struct ConflictReport {
    std::vector<Diagnostic> diagnostics;
    std::vector<Suggestion> suggestions;
};

ConflictReport detect_conflicts(const CompositeProcess &process, std::string_view candidate,
                                const Placement &position,
                                const std::optional<std::string> &outcome,
                                const Snapshot &snapshot,
                                const AbstractRequest *request = nullptr);

std::vector<Suggestion> suggest_insertions(const CompositeProcess &process,
                                           const AbstractRequest *request,
                                           const Snapshot &snapshot);

std::vector<Suggestion> suggest_removals(const CompositeProcess &process, const Snapshot &snapshot);

// Throws Error(Precondition) when the request's goals are reachable.
std::vector<Suggestion> suggest_relaxations(const AbstractRequest &request, const PlanGraph &graph,
                                            const Snapshot &snapshot);

// Goals with no supporting proposition in the last graph layer, or caught in
// a goal mutex there.
std::vector<std::string> unreachable_goals(const PlanGraph &graph);

}  // namespace semcomp
