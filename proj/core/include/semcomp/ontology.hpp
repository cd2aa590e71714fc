#pragma once

// Lightweight ontology store: classes, properties, and their asserted
// hierarchies, plus precomputed reflexive-transitive closures.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace semcomp {

using ClassId = std::uint32_t;
using PropertyId = std::uint32_t;

enum class Degree : std::uint8_t { Exact, Plugin, Subsume, Fail };

std::string_view to_string(Degree degree);

struct MatchDegree {
    Degree degree = Degree::Fail;
    int distance = -1;  // -1 for Fail

    bool usable() const { return degree == Degree::Exact || degree == Degree::Plugin; }
    friend bool operator==(const MatchDegree &, const MatchDegree &) = default;
};

struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;
    bool object_is_literal = false;

    friend bool operator==(const Triple &, const Triple &) = default;
};

struct OntologyDocument {
    std::vector<Triple> triples;
};

// Canonical spellings of the reasoning vocabulary.
namespace vocab {
inline constexpr std::string_view kType = "rdf:type";
inline constexpr std::string_view kClass = "owl:Class";
inline constexpr std::string_view kRdfsClass = "rdfs:Class";
inline constexpr std::string_view kProperty = "rdf:Property";
inline constexpr std::string_view kObjectProperty = "owl:ObjectProperty";
inline constexpr std::string_view kDatatypeProperty = "owl:DatatypeProperty";
inline constexpr std::string_view kSubClassOf = "rdfs:subClassOf";
inline constexpr std::string_view kSubPropertyOf = "rdfs:subPropertyOf";
inline constexpr std::string_view kDomain = "rdfs:domain";
inline constexpr std::string_view kRange = "rdfs:range";
inline constexpr std::string_view kLabel = "rdfs:label";
inline constexpr std::string_view kComment = "rdfs:comment";

// Maps full rdf/rdfs/owl IRIs onto the prefixed spelling; other identifiers
// are returned unchanged.
std::string canonical(std::string_view identifier);
}  // namespace vocab

struct Ancestor {
    ClassId id;
    std::uint32_t distance;
};

struct PropertyInfo {
    std::string iri;
    std::optional<std::string> domain;
    std::optional<std::string> range;
};

class OntologyStore {
public:
    static constexpr std::array<std::string_view, 4> kPrimitiveClasses{
        "String", "Integer", "Boolean", "BusinessObject"};

    OntologyStore();

    // Merges the document. Closures are not recomputed; call classify().
    // Throws Error(Conflict) when an identifier would be both class and
    // property; the store is left untouched in that case.
    void load(const OntologyDocument &document);

    // Recomputes both closures. Idempotent.
    void classify();

    std::uint64_t version() const { return version_; }
    bool is_classified() const { return classified_version_ == version_; }

    std::size_t class_count() const { return class_iris_.size(); }
    std::optional<ClassId> find_class(std::string_view iri) const;
    ClassId require_class(std::string_view iri) const;
    const std::string &class_iri(ClassId id) const { return class_iris_[id]; }
    std::span<const ClassId> parents(ClassId id) const { return parents_[id]; }

    // Checked lookups: unknown identifiers and stale closures throw.
    bool subsumes(std::string_view general, std::string_view specific) const;
    MatchDegree match_degree(std::string_view provided, std::string_view required) const;

    // Unchecked fast paths for callers that already resolved identifiers
    // against a classified snapshot.
    bool subsumes(ClassId general, ClassId specific) const;
    std::optional<std::uint32_t> distance(ClassId general, ClassId specific) const;
    MatchDegree match_degree(ClassId provided, ClassId required) const;

    // Includes the class itself at distance 0; sorted by id.
    std::span<const Ancestor> ancestors(ClassId id) const { return ancestors_[id]; }

    // Shortest asserted chain specific -> ... -> general (inclusive), or
    // empty when general does not subsume specific.
    std::vector<std::string> subclass_chain(ClassId specific, ClassId general) const;

    // Strict superclasses ordered by (distance, iri).
    std::vector<ClassId> superclasses_by_distance(ClassId id) const;

    std::size_t property_count() const { return properties_.size(); }
    std::optional<PropertyId> find_property(std::string_view iri) const;
    const PropertyInfo &property(PropertyId id) const { return properties_[id]; }
    // Unknown properties only subsume themselves.
    bool property_subsumes(std::string_view general, std::string_view specific) const;

    const std::vector<Triple> &triples() const { return triples_; }
    std::size_t subclass_edge_count() const;
    const std::vector<std::string> &warnings() const { return warnings_; }

private:
    ClassId intern_class(const std::string &iri);
    PropertyId intern_property(const std::string &iri);
    void require_classified() const;
    std::vector<std::vector<Ancestor>> closure_of(
        const std::vector<std::vector<std::uint32_t>> &parents) const;

    std::vector<Triple> triples_;
    std::unordered_set<std::string> triple_keys_;

    std::vector<std::string> class_iris_;
    std::unordered_map<std::string, ClassId> class_index_;
    std::vector<std::vector<ClassId>> parents_;
    std::vector<std::vector<Ancestor>> ancestors_;

    std::vector<PropertyInfo> properties_;
    std::unordered_map<std::string, PropertyId> property_index_;
    std::vector<std::vector<PropertyId>> property_parents_;
    std::vector<std::vector<Ancestor>> property_ancestors_;

    std::vector<std::string> load_warnings_;
    std::vector<std::string> warnings_;
    std::uint64_t version_ = 0;
    std::uint64_t classified_version_ = 0;
};

// Parsers for the two ingestion formats (see docs/formats.md).
OntologyDocument parse_triples(std::string_view text);
OntologyDocument parse_structured(std::string_view text);
// Dispatches on the first non-blank character: '{' selects the structured form.
OntologyDocument parse_ontology(std::string_view text);

std::string to_triples_text(const OntologyDocument &document);

}  // namespace semcomp
