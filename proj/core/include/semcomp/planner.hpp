#pragma once

// GraphPlan-style composition over service profiles.
//
// A request and registry snapshot are compiled into a Domain of ground
// propositions (Avail(type) and Status(class, signature)), requirements that
// propositions support by subsumption, and one action per (service, outcome).
// A PlanGraph expands proposition/action layers with mutex analysis, and a
// PlanCursor enumerates plans lazily by backward search.

#include "semcomp/ontology.hpp"
#include "semcomp/process.hpp"
#include "semcomp/registry.hpp"

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace semcomp {

struct AbstractRequest {
    std::vector<std::string> available_inputs;
    std::vector<StatusPattern> initial_statuses;  // bindings name classes
    std::vector<std::string> goal_outputs;
    std::vector<StatusPattern> goal_statuses;
    std::vector<NonFunctionalFilter> nonfunctional_filters;
    std::size_t max_plans = 1;
    std::optional<std::size_t> horizon;  // default: 2 x registered services
    std::size_t extra_levels = 0;        // enumerate this many levels past the first solved one

    bool has_goal() const { return !goal_outputs.empty() || !goal_statuses.empty(); }
    friend bool operator==(const AbstractRequest &, const AbstractRequest &) = default;
};

struct ActionRef {
    std::string service;
    std::string outcome;

    std::string describe() const { return service + "/" + outcome; }
    friend bool operator==(const ActionRef &, const ActionRef &) = default;
    friend auto operator<=>(const ActionRef &, const ActionRef &) = default;
};

struct Plan {
    std::vector<std::vector<ActionRef>> layers;
    std::set<ActionRef> assumptions;
    std::vector<std::string> goal_outputs;
    std::vector<StatusPattern> goal_statuses;

    std::size_t action_count() const;
    friend bool operator==(const Plan &, const Plan &) = default;
};

using PropId = std::uint32_t;
using ReqId = std::uint32_t;
using ActionId = std::uint32_t;

inline constexpr std::uint32_t kNever = UINT32_MAX;

struct SignatureEntry {
    std::string property;
    bool literal = false;
    std::string value;            // literal text or class iri
    std::optional<ClassId> type;  // resolved class for non-literals

    friend bool operator==(const SignatureEntry &a, const SignatureEntry &b) {
        return a.property == b.property && a.literal == b.literal && a.value == b.value;
    }
    friend auto operator<=>(const SignatureEntry &a, const SignatureEntry &b) {
        return std::tie(a.property, a.literal, a.value) <=> std::tie(b.property, b.literal, b.value);
    }
};

enum class PropKind : std::uint8_t { Avail, Status };

struct Proposition {
    PropKind kind = PropKind::Avail;
    ClassId type = 0;
    std::vector<SignatureEntry> signature;  // sorted; Status only
};

// A requirement is met by any proposition whose class is subsumed by `type`
// and whose signature covers every entry here. Unresolved classes are never met.
struct Requirement {
    PropKind kind = PropKind::Avail;
    std::optional<ClassId> type;
    std::string type_iri;
    std::vector<SignatureEntry> signature;
};

struct CompiledAction {
    ActionRef ref;
    std::vector<ReqId> needs;
    std::vector<PropId> adds;
    std::vector<PropId> deletes;
};

class Domain {
public:
    static std::shared_ptr<const Domain> compile(std::shared_ptr<const Registry> registry,
                                                 std::shared_ptr<const OntologyStore> ontology,
                                                 const AbstractRequest &request,
                                                 bool apply_filters = true);

    const OntologyStore &ontology() const { return *ontology_; }
    const Registry &registry() const { return *registry_; }
    std::shared_ptr<const OntologyStore> ontology_ptr() const { return ontology_; }
    std::shared_ptr<const Registry> registry_ptr() const { return registry_; }

    std::span<const Proposition> props() const { return props_; }
    std::span<const Requirement> requirements() const { return reqs_; }
    std::span<const CompiledAction> actions() const { return actions_; }
    std::span<const PropId> initial() const { return initial_; }
    std::span<const ReqId> goals() const { return goals_; }

    // Universe propositions meeting the requirement, ascending.
    std::span<const PropId> supporters(ReqId req) const { return supporters_[req]; }
    std::span<const ActionId> adders(PropId prop) const { return adders_[prop]; }
    std::span<const ActionId> deleters(PropId prop) const { return deleters_[prop]; }
    // Actions adding some supporter of the requirement, ascending.
    std::span<const ActionId> achievers(ReqId req) const { return achievers_[req]; }
    std::span<const ActionId> needers(ReqId req) const { return needers_[req]; }
    // Actions sharing no layer: inconsistent effects, interference, or two
    // outcomes of one service. Sorted.
    std::span<const ActionId> static_mutex(ActionId action) const { return static_mutex_[action]; }
    bool statically_mutex(ActionId a, ActionId b) const;

    bool matches(PropId prop, ReqId req) const;
    bool matches(const Proposition &prop, const Requirement &req) const;

    std::optional<ActionId> find_action(const ActionRef &ref) const;
    std::optional<PropId> find_prop(const Proposition &prop) const;
    std::string describe(PropId prop) const;
    std::string describe_requirement(ReqId req) const;

    // Compiles a profile pattern (bindings name parameters) or request pattern
    // (bindings name classes) into requirement form without interning it.
    Requirement pattern_requirement(const StatusPattern &pattern,
                                    const ServiceProfile *owner) const;
    std::optional<Proposition> pattern_proposition(const StatusPattern &pattern,
                                                   const ServiceProfile *owner) const;

    const AbstractRequest &request() const { return request_; }
    const std::vector<std::string> &warnings() const { return warnings_; }
    std::uint64_t basis() const { return basis_; }

private:
    Domain() = default;
    PropId intern_prop(Proposition prop);
    ReqId intern_req(Requirement req);
    std::vector<SignatureEntry> signature_of(const StatusPattern &pattern,
                                             const ServiceProfile *owner) const;

    std::shared_ptr<const Registry> registry_;
    std::shared_ptr<const OntologyStore> ontology_;
    AbstractRequest request_;
    std::vector<Proposition> props_;
    std::vector<Requirement> reqs_;
    std::vector<CompiledAction> actions_;
    std::vector<PropId> initial_;
    std::vector<ReqId> goals_;
    std::vector<std::vector<PropId>> supporters_;
    std::vector<std::vector<ActionId>> adders_;
    std::vector<std::vector<ActionId>> deleters_;
    std::vector<std::vector<ActionId>> achievers_;
    std::vector<std::vector<ActionId>> needers_;
    std::vector<std::vector<ActionId>> static_mutex_;
    std::unordered_map<std::string, PropId> prop_index_;
    std::unordered_map<std::string, ReqId> req_index_;
    std::vector<std::string> warnings_;
    std::uint64_t basis_ = 0;
};

// Forward simulation of action layers on a compiled domain. Layers must be
// applicable in order, free of static mutexes, and reach every goal.
struct SimulationResult {
    bool valid = false;
    std::string failure;
};
SimulationResult simulate(const Domain &domain, const std::vector<std::vector<ActionId>> &layers);

// Graph node in an action layer: a real action or the no-op of a proposition.
struct GraphNode {
    bool noop = false;
    std::uint32_t id = 0;

    std::uint32_t encoded() const { return noop ? (id | 0x80000000u) : id; }
    friend bool operator==(const GraphNode &, const GraphNode &) = default;
};

class PlanGraph {
public:
    explicit PlanGraph(std::shared_ptr<const Domain> domain, std::size_t horizon);

    const Domain &domain() const { return *domain_; }
    std::shared_ptr<const Domain> domain_ptr() const { return domain_; }

    // Index of the last proposition layer built (P0 is level 0).
    std::size_t last_level() const { return levels_ - 1; }
    bool leveled_off() const { return leveled_off_; }
    bool horizon_hit() const { return horizon_hit_; }
    std::size_t horizon() const { return horizon_; }

    // Level queries past a leveled-off graph answer with the last level.
    std::uint32_t prop_level(PropId prop) const { return prop_level_[prop]; }
    std::uint32_t action_level(ActionId action) const { return action_level_[action]; }
    bool has_prop(PropId prop, std::size_t level) const { return prop_level_[prop] <= level; }
    bool has_action(ActionId action, std::size_t level) const {
        return level >= 1 && action_level_[action] <= level;
    }
    std::vector<PropId> props_at(std::size_t level) const;
    std::vector<ActionId> actions_at(std::size_t level) const;
    std::vector<PropId> supporters_at(ReqId req, std::size_t level) const;

    bool props_mutex(std::size_t level, PropId a, PropId b) const;
    // `level` is the action layer index (>= 1).
    bool nodes_mutex(std::size_t level, GraphNode a, GraphNode b) const;
    bool reqs_mutex(std::size_t level, ReqId a, ReqId b) const;

    std::size_t prop_mutex_count(std::size_t level) const;
    std::size_t action_mutex_count(std::size_t level) const;
    std::size_t node_count() const;

    // True iff every goal is met at `level` and no two goals are mutex there.
    bool goals_reachable_at(std::size_t level) const;

    // Adds A_{n+1} and P_{n+1}. No-op once leveled off.
    void expand();

private:
    std::size_t clamp(std::size_t level) const { return std::min(level, levels_ - 1); }
    std::size_t clamp_actions(std::size_t level) const { return std::min(level, levels_ - 1); }
    bool req_mutex_uncached(std::size_t level, ReqId a, ReqId b) const;

    std::shared_ptr<const Domain> domain_;
    std::size_t levels_ = 1;
    std::size_t horizon_;
    bool leveled_off_ = false;
    bool horizon_hit_ = false;
    std::vector<std::uint32_t> prop_level_;
    std::vector<std::uint32_t> action_level_;
    std::vector<std::size_t> props_per_level_;
    std::vector<std::unordered_set<std::uint64_t>> prop_mutex_;    // by proposition level
    std::vector<std::unordered_set<std::uint64_t>> action_mutex_;  // by action layer
    mutable std::vector<std::unordered_map<std::uint64_t, bool>> req_mutex_cache_;
};

std::size_t default_horizon(const Registry &registry);

// Builds P0 from the request and expands until the goals are reachable
// without mutex, the graph levels off, or the horizon is hit.
std::shared_ptr<PlanGraph> build_graph(const AbstractRequest &request,
                                       std::shared_ptr<const Registry> registry,
                                       std::shared_ptr<const OntologyStore> ontology);

void expand_level(PlanGraph &graph);
bool goals_reachable(const PlanGraph &graph, const AbstractRequest &request);

// Lazy plan enumeration. Plans come out in nondecreasing layer count; within
// one layer count every plan is valid, irredundant (dropping any action breaks
// it), free of empty layers, and distinct.
class PlanCursor {
public:
    explicit PlanCursor(std::shared_ptr<PlanGraph> graph);
    ~PlanCursor();
    PlanCursor(const PlanCursor &) = delete;
    PlanCursor &operator=(const PlanCursor &) = delete;

    std::vector<Plan> next(std::size_t k);
    bool exhausted() const;
    std::size_t emitted() const;
    std::optional<std::size_t> minimal_layers() const;
    // Caps the backtracking steps over the cursor's lifetime; once spent, next() returns early
    // and starved() is true. Meant for counting, not for sessions.
    void set_work_limit(std::size_t steps);
    bool starved() const;
    const PlanGraph &graph() const { return *graph_; }
    std::shared_ptr<PlanGraph> graph_ptr() const { return graph_; }

    // Identifies this enumeration position: "<basis hex>:<emitted>[:end]".
    std::string token() const;

private:
    struct Search;
    std::shared_ptr<PlanGraph> graph_;
    std::unique_ptr<Search> search_;
};

struct PlanBatch {
    std::vector<Plan> plans;
    std::string token;
    bool exhausted = false;
};

PlanBatch extract_plans(PlanCursor &cursor, std::size_t k);

struct ParsedToken {
    std::uint64_t basis = 0;
    std::size_t emitted = 0;
    bool done = false;
};
std::optional<ParsedToken> parse_token(std::string_view token);

Plan to_plan(const Domain &domain, const std::vector<std::vector<ActionId>> &layers);

// Layers become a Sequence of Parallel constructs; each step input is fed by
// the best-matching output of an earlier layer when one exists.
CompositeProcess plan_to_process(const Plan &plan, const Registry &registry,
                                 const OntologyStore &ontology);

}  // namespace semcomp
