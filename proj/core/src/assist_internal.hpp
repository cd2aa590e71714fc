#pragma once

#include "semcomp/assist.hpp"

#include <map>

namespace semcomp::detail {

// A need of a step that nothing guarantees at its position.
struct Gap {
    std::string step;
    bool input = true;
    std::string input_name;         // input gaps
    std::string type;               // input gaps
    StatusPattern precondition;     // precondition gaps, bindings as in the profile
    std::vector<char> facts_before;  // over the analysis domain's propositions
};

struct Finding {
    Diagnostic diagnostic;
    std::vector<std::string> touches;
};

struct FlowAnalysis {
    std::shared_ptr<const Domain> domain;
    std::vector<Finding> findings;
    std::vector<Gap> gaps;
    std::map<std::string, std::vector<char>> facts_before;
};

FlowAnalysis analyse_flow(const CompositeProcess &process, const AbstractRequest *request,
                          const Snapshot &snapshot);

// Possible actions of a step: the recorded outcome, or every outcome.
std::vector<ActionId> step_actions(const Domain &domain, const Step &step);

// One action deletes something the other adds or may need.
bool effects_conflict(const Domain &domain, ActionId a, ActionId b);

// Conflict between two steps were they to run in parallel; empty when none.
std::string step_conflict(const Domain &domain, const Step &a, const Step &b);

// Applies the delta and checks no targeted error kind got worse.
bool no_worse(const CompositeProcess &before, const Delta &delta,
              std::span<const DiagnosticKind> kinds, const AbstractRequest *request,
              const Snapshot &snapshot);

std::string describe_chain(const OntologyStore &ontology, ClassId specific, ClassId general);

}  // namespace semcomp::detail
