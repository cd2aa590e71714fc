#pragma once

// Composite process model: steps, a control tree of Sequence / Parallel /
// Choice constructs, and dataflow consolidations between step parameters.

#include "semcomp/registry.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace semcomp {

enum class Provenance { User, SuggestedAccepted, AutoCompleted };

std::string_view to_string(Provenance provenance);
Provenance parse_provenance(std::string_view text);

struct Step {
    std::string id;
    std::string service;
    std::optional<std::string> outcome;  // unset: not yet assumed
    Provenance provenance = Provenance::User;

    friend bool operator==(const Step &, const Step &) = default;
};

struct ControlNode {
    enum class Kind { Step, Sequence, Parallel, Choice };

    Kind kind = Kind::Sequence;
    std::string step;  // Kind::Step only
    std::vector<ControlNode> children;

    static ControlNode leaf(std::string step_id);
    static ControlNode sequence(std::vector<ControlNode> children = {});
    static ControlNode parallel(std::vector<ControlNode> children);
    static ControlNode choice(std::vector<ControlNode> children);

    bool is_step() const { return kind == Kind::Step; }
    void collect_steps(std::vector<std::string> &out) const;

    friend bool operator==(const ControlNode &, const ControlNode &) = default;
};

std::string_view to_string(ControlNode::Kind kind);

struct Consolidation {
    std::string producer;
    std::string output;
    std::string consumer;
    std::string input;
    Provenance provenance = Provenance::User;

    bool same_link(const Consolidation &other) const {
        return producer == other.producer && output == other.output &&
               consumer == other.consumer && input == other.input;
    }
    std::string describe() const;

    friend bool operator==(const Consolidation &, const Consolidation &) = default;
};

struct CompositeProcess {
    std::map<std::string, Step> steps;
    ControlNode control = ControlNode::sequence();  // root is always a Sequence
    std::vector<Consolidation> consolidations;      // sorted by (consumer, input)

    bool empty() const { return steps.empty(); }
    const Step *find_step(std::string_view id) const;
    const Consolidation *feeding(std::string_view consumer, std::string_view input) const;

    friend bool operator==(const CompositeProcess &, const CompositeProcess &) = default;
};

// Canonical shape: nested constructs of the same kind flattened, single-child
// constructs collapsed (except the root), empty constructs dropped,
// consolidations sorted.
void normalize(CompositeProcess &process);

// Structural invariant check; `registry` (optional) enables parameter checks.
std::vector<std::string> invariant_violations(const CompositeProcess &process,
                                              const Registry *registry = nullptr);

// Relative order of two distinct steps in the control tree.
enum class StepOrder { Before, After, Unordered, Exclusive };
StepOrder order_of(const CompositeProcess &process, std::string_view a, std::string_view b);

// Leaves in document order.
std::vector<std::string> step_sequence(const CompositeProcess &process);

std::string next_step_id(const CompositeProcess &process, std::size_t offset = 0);

// --- edits -------------------------------------------------------------

enum class Relation { Append, Before, After, ParallelWith };

std::string_view to_string(Relation relation);
Relation parse_relation(std::string_view text);

struct Placement {
    std::optional<std::string> anchor;
    Relation relation = Relation::Append;

    friend bool operator==(const Placement &, const Placement &) = default;
};

namespace edit {

struct AddStep {
    Step step;
    Placement placement;
    friend bool operator==(const AddStep &, const AddStep &) = default;
};
struct RemoveStep {
    std::string step;
    friend bool operator==(const RemoveStep &, const RemoveStep &) = default;
};
struct AddConsolidation {
    Consolidation link;
    friend bool operator==(const AddConsolidation &, const AddConsolidation &) = default;
};
struct RemoveConsolidation {
    std::string consumer;
    std::string input;
    friend bool operator==(const RemoveConsolidation &, const RemoveConsolidation &) = default;
};
// Sequence `first` before `second` where they are currently unordered.
struct Order {
    std::string first;
    std::string second;
    friend bool operator==(const Order &, const Order &) = default;
};
// Turn the adjacent sequence children holding `first` and `second` into a
// Parallel construct.
struct Parallelize {
    std::string first;
    std::string second;
    friend bool operator==(const Parallelize &, const Parallelize &) = default;
};
struct SetOutcome {
    std::string step;
    std::optional<std::string> outcome;
    friend bool operator==(const SetOutcome &, const SetOutcome &) = default;
};
struct ReplaceProcess {
    CompositeProcess process;
    friend bool operator==(const ReplaceProcess &, const ReplaceProcess &) = default;
};

}  // namespace edit

using Edit = std::variant<edit::AddStep, edit::RemoveStep, edit::AddConsolidation,
                          edit::RemoveConsolidation, edit::Order, edit::Parallelize,
                          edit::SetOutcome, edit::ReplaceProcess>;

struct Delta {
    std::vector<Edit> edits;
    friend bool operator==(const Delta &, const Delta &) = default;
};

// Applies every edit in order; throws Error(Precondition) when an edit does
// not fit the process. The input is never modified.
CompositeProcess apply(const CompositeProcess &process, const Delta &delta);

}  // namespace semcomp
