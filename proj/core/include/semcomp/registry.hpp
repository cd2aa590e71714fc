#pragma once

// Service profiles (composable elements) and semantic discovery.

#include "semcomp/diagnostic.hpp"
#include "semcomp/ontology.hpp"

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace semcomp {

struct Param {
    std::string name;
    std::string type;

    friend bool operator==(const Param &, const Param &) = default;
};

// In a profile a Reference names a parameter of the owning profile; in an
// abstract request it names a class.
struct Binding {
    enum class Kind { Reference, Literal };
    Kind kind = Kind::Reference;
    std::string value;

    friend bool operator==(const Binding &, const Binding &) = default;
    friend auto operator<=>(const Binding &, const Binding &) = default;
};

struct StatusPattern {
    std::string status_class;
    std::map<std::string, Binding> bindings;

    friend bool operator==(const StatusPattern &, const StatusPattern &) = default;
    friend auto operator<=>(const StatusPattern &, const StatusPattern &) = default;
};

struct ConditionalEffect {
    std::string label;
    std::vector<StatusPattern> adds;
    std::vector<StatusPattern> deletes;

    friend bool operator==(const ConditionalEffect &, const ConditionalEffect &) = default;
};

struct ClassValue {
    std::string iri;
    friend bool operator==(const ClassValue &, const ClassValue &) = default;
};

using Literal = std::variant<double, std::string, ClassValue>;

struct ServiceProfile {
    std::string id;
    std::string name;
    std::vector<Param> inputs;
    std::vector<Param> outputs;
    std::vector<StatusPattern> preconditions;
    std::vector<ConditionalEffect> effects;
    std::map<std::string, Literal> nonfunctional;

    const Param *find_input(std::string_view param) const;
    const Param *find_output(std::string_view param) const;
    const Param *find_param(std::string_view param) const;
    const ConditionalEffect *find_effect(std::string_view label) const;

    friend bool operator==(const ServiceProfile &, const ServiceProfile &) = default;
};

inline constexpr std::string_view kDefaultOutcome = "default";

enum class Comparator { Eq, Ne, Lt, Le, Gt, Ge, SubsumedBy };

std::string_view to_string(Comparator comparator);
Comparator parse_comparator(std::string_view text);

struct NonFunctionalFilter {
    std::string attribute;
    Comparator comparator = Comparator::Eq;
    Literal value;

    friend bool operator==(const NonFunctionalFilter &, const NonFunctionalFilter &) = default;
};

bool passes(const ServiceProfile &profile, const NonFunctionalFilter &filter,
            const OntologyStore &ontology);
bool passes_all(const ServiceProfile &profile, const std::vector<NonFunctionalFilter> &filters,
                const OntologyStore &ontology);

struct DiscoveryQuery {
    std::vector<std::string> required_inputs;
    std::vector<std::string> desired_outputs;
    std::vector<StatusPattern> desired_effects;
    std::vector<NonFunctionalFilter> nonfunctional_filters;
    std::optional<std::size_t> max_results;

    bool empty() const {
        return required_inputs.empty() && desired_outputs.empty() && desired_effects.empty() &&
               nonfunctional_filters.empty();
    }
};

// Lexicographic: more Exact, then more Plugin, then smaller total distance.
struct Score {
    int exact = 0;
    int plugin = 0;
    int distance = 0;

    void add(const MatchDegree &m);
    friend bool operator==(const Score &, const Score &) = default;
    friend std::strong_ordering operator<=>(const Score &a, const Score &b) {
        if (auto c = a.exact <=> b.exact; c != 0) return c;
        if (auto c = a.plugin <=> b.plugin; c != 0) return c;
        return b.distance <=> a.distance;
    }
};

struct CriterionMatch {
    std::string criterion;  // e.g. "output:Quote", "input:rfq", "effect:submitted"
    MatchDegree match;

    friend bool operator==(const CriterionMatch &, const CriterionMatch &) = default;
};

struct ServiceMatch {
    std::string service_id;
    std::vector<CriterionMatch> criteria;
    Score score;

    friend bool operator==(const ServiceMatch &, const ServiceMatch &) = default;
};

using ProducerTarget = std::variant<std::string, StatusPattern>;

class Registry {
public:
    // Registers the profile; unresolved class references produce warnings,
    // never rejections. Throws Error(Duplicate) for a known id.
    std::vector<Diagnostic> register_service(ServiceProfile profile, const OntologyStore &ontology);
    void deregister_service(const std::string &id);

    const ServiceProfile *find(std::string_view id) const;
    const ServiceProfile &get(std::string_view id) const;
    const std::map<std::string, ServiceProfile, std::less<>> &services() const { return services_; }
    std::size_t size() const { return services_.size(); }
    std::uint64_t version() const { return version_; }
    const std::vector<Diagnostic> &diagnostics(std::string_view id) const;

    std::vector<ServiceMatch> discover(const DiscoveryQuery &query,
                                       const OntologyStore &ontology) const;
    std::vector<ServiceMatch> producers_of(const ProducerTarget &target,
                                           const OntologyStore &ontology) const;
    std::vector<ServiceMatch> successors_of(std::string_view id,
                                            const OntologyStore &ontology) const;

private:
    std::map<std::string, ServiceProfile, std::less<>> services_;
    std::map<std::string, std::vector<Diagnostic>, std::less<>> diagnostics_;
    std::uint64_t version_ = 0;
};

// Annotation checks shared by registration and re-validation after ontology
// changes.
std::vector<Diagnostic> check_profile(const ServiceProfile &profile, const OntologyStore &ontology);

// Best Exact/Plugin match of any `provided` class against `required`; Fail
// when none qualifies or `required` is unresolved.
MatchDegree best_usable_match(const std::vector<std::string> &provided,
                              std::string_view required, const OntologyStore &ontology);

// Class-level status match: the status class flows into the requirement.
MatchDegree status_match(const StatusPattern &provided, const StatusPattern &required,
                         const OntologyStore &ontology);

// Sort order used by every ranked list: score descending, then id.
void rank(std::vector<ServiceMatch> &matches);

}  // namespace semcomp
