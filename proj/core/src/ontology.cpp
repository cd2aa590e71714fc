#include "semcomp/ontology.hpp"

#include "semcomp/error.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace semcomp {

std::string_view to_string(Degree degree) {
    switch (degree) {
    case Degree::Exact: return "exact";
    case Degree::Plugin: return "plugin";
    case Degree::Subsume: return "subsume";
    case Degree::Fail: return "fail";
    }
    return "fail";
}

namespace vocab {

std::string canonical(std::string_view identifier) {
    static const std::array<std::pair<std::string_view, std::string_view>, 3> prefixes{{
        {"http://www.w3.org/1999/02/22-rdf-syntax-ns#", "rdf:"},
        {"http://www.w3.org/2000/01/rdf-schema#", "rdfs:"},
        {"http://www.w3.org/2002/07/owl#", "owl:"},
    }};
    for (const auto &[ns, prefix] : prefixes) {
        if (identifier.starts_with(ns)) {
            return std::string(prefix) + std::string(identifier.substr(ns.size()));
        }
    }
    return std::string(identifier);
}

}  // namespace vocab

namespace {

enum class Kind { Class, Property };

bool is_class_marker(std::string_view object) {
    return object == vocab::kClass || object == vocab::kRdfsClass;
}

bool is_property_marker(std::string_view object) {
    return object == vocab::kProperty || object == vocab::kObjectProperty ||
           object == vocab::kDatatypeProperty;
}

std::string triple_key(const Triple &t) {
    std::string key;
    key.reserve(t.subject.size() + t.predicate.size() + t.object.size() + 4);
    key += t.subject;
    key += '\x1f';
    key += t.predicate;
    key += '\x1f';
    key += t.object_is_literal ? '"' : '<';
    key += t.object;
    return key;
}

const Ancestor *find_ancestor(std::span<const Ancestor> ancestors, std::uint32_t id) {
    auto it = std::lower_bound(ancestors.begin(), ancestors.end(), id,
                               [](const Ancestor &a, std::uint32_t v) { return a.id < v; });
    if (it == ancestors.end() || it->id != id) return nullptr;
    return &*it;
}

}  // namespace

OntologyStore::OntologyStore() {
    for (auto primitive : kPrimitiveClasses) intern_class(std::string(primitive));
    classify();
}

ClassId OntologyStore::intern_class(const std::string &iri) {
    auto [it, inserted] = class_index_.try_emplace(iri, static_cast<ClassId>(class_iris_.size()));
    if (inserted) {
        class_iris_.push_back(iri);
        parents_.emplace_back();
    }
    return it->second;
}

PropertyId OntologyStore::intern_property(const std::string &iri) {
    auto [it, inserted] =
        property_index_.try_emplace(iri, static_cast<PropertyId>(properties_.size()));
    if (inserted) {
        properties_.push_back(PropertyInfo{iri, std::nullopt, std::nullopt});
        property_parents_.emplace_back();
    }
    return it->second;
}

void OntologyStore::load(const OntologyDocument &document) {
    // First pass: decide the kind of every identifier the document touches and
    // reject class/property clashes before anything is committed.
    std::map<std::string, Kind> declared;
    auto declare = [&](const std::string &iri, Kind kind) {
        Kind existing_kind = kind;
        if (class_index_.contains(iri)) existing_kind = Kind::Class;
        else if (property_index_.contains(iri)) existing_kind = Kind::Property;
        auto [it, inserted] = declared.try_emplace(iri, kind);
        if (existing_kind != kind || it->second != kind) {
            throw Error(ErrorCode::Conflict,
                        "identifier '" + iri + "' declared both as class and as property");
        }
    };
    for (const auto &t : document.triples) {
        if (t.object_is_literal) continue;
        if (t.predicate == vocab::kType && is_class_marker(t.object)) {
            declare(t.subject, Kind::Class);
        } else if (t.predicate == vocab::kType && is_property_marker(t.object)) {
            declare(t.subject, Kind::Property);
        } else if (t.predicate == vocab::kSubClassOf) {
            declare(t.subject, Kind::Class);
            declare(t.object, Kind::Class);
        } else if (t.predicate == vocab::kSubPropertyOf) {
            declare(t.subject, Kind::Property);
            declare(t.object, Kind::Property);
        } else if (t.predicate == vocab::kDomain || t.predicate == vocab::kRange) {
            declare(t.subject, Kind::Property);
            declare(t.object, Kind::Class);
        }
    }

    std::map<std::string, std::size_t> inert;
    for (const auto &t : document.triples) {
        if (!triple_keys_.insert(triple_key(t)).second) continue;
        triples_.push_back(t);
        if (t.object_is_literal) {
            if (t.predicate != vocab::kLabel && t.predicate != vocab::kComment) ++inert[t.predicate];
            continue;
        }
        if (t.predicate == vocab::kType && is_class_marker(t.object)) {
            intern_class(t.subject);
        } else if (t.predicate == vocab::kType && is_property_marker(t.object)) {
            intern_property(t.subject);
        } else if (t.predicate == vocab::kSubClassOf) {
            ClassId child = intern_class(t.subject);
            ClassId parent = intern_class(t.object);
            auto &ps = parents_[child];
            if (std::find(ps.begin(), ps.end(), parent) == ps.end()) ps.push_back(parent);
        } else if (t.predicate == vocab::kSubPropertyOf) {
            PropertyId child = intern_property(t.subject);
            PropertyId parent = intern_property(t.object);
            auto &ps = property_parents_[child];
            if (std::find(ps.begin(), ps.end(), parent) == ps.end()) ps.push_back(parent);
        } else if (t.predicate == vocab::kDomain) {
            intern_class(t.object);
            properties_[intern_property(t.subject)].domain = t.object;
        } else if (t.predicate == vocab::kRange) {
            intern_class(t.object);
            properties_[intern_property(t.subject)].range = t.object;
        } else if (t.predicate == vocab::kType) {
            // Individuals are stored but not reasoned over; OWL constructs
            // used as types (restrictions and the like) are reported.
            if (t.object.starts_with("owl:")) ++inert[t.predicate + " " + t.object];
        } else if (t.predicate != vocab::kLabel && t.predicate != vocab::kComment) {
            ++inert[t.predicate];
        }
    }
    for (const auto &[what, count] : inert) {
        load_warnings_.push_back("unsupported vocabulary stored inert: " + what + " (" +
                                 std::to_string(count) + " statement" +
                                 (count == 1 ? "" : "s") + ")");
    }
    warnings_ = load_warnings_;
    ++version_;
}

std::vector<std::vector<Ancestor>> OntologyStore::closure_of(
    const std::vector<std::vector<std::uint32_t>> &parents) const {
    const std::size_t n = parents.size();
    std::vector<std::vector<Ancestor>> result(n);
    std::vector<std::uint32_t> seen(n, UINT32_MAX);
    std::vector<std::uint32_t> frontier;
    std::vector<std::uint32_t> next;
    for (std::uint32_t start = 0; start < n; ++start) {
        auto &out = result[start];
        seen[start] = start;
        out.push_back({start, 0});
        frontier.assign(1, start);
        std::uint32_t depth = 0;
        while (!frontier.empty()) {
            ++depth;
            next.clear();
            for (auto node : frontier) {
                for (auto parent : parents[node]) {
                    if (seen[parent] == start) continue;
                    seen[parent] = start;
                    out.push_back({parent, depth});
                    next.push_back(parent);
                }
            }
            frontier.swap(next);
        }
        std::sort(out.begin(), out.end(),
                  [](const Ancestor &a, const Ancestor &b) { return a.id < b.id; });
    }
    return result;
}

void OntologyStore::classify() {
    ancestors_ = closure_of(parents_);
    property_ancestors_ = closure_of(property_parents_);

    warnings_ = load_warnings_;
    std::set<std::set<std::string>> cycles;
    for (ClassId c = 0; c < ancestors_.size(); ++c) {
        std::set<std::string> members;
        for (const auto &a : ancestors_[c]) {
            if (a.id != c && find_ancestor(ancestors_[a.id], c)) members.insert(class_iris_[a.id]);
        }
        if (!members.empty()) {
            members.insert(class_iris_[c]);
            cycles.insert(std::move(members));
        }
    }
    for (const auto &cycle : cycles) {
        std::string text = "subclass cycle; classes treated as mutually subsuming:";
        for (const auto &iri : cycle) text += " " + iri;
        warnings_.push_back(std::move(text));
    }
    classified_version_ = version_;
}

std::optional<ClassId> OntologyStore::find_class(std::string_view iri) const {
    auto it = class_index_.find(std::string(iri));
    if (it == class_index_.end()) return std::nullopt;
    return it->second;
}

ClassId OntologyStore::require_class(std::string_view iri) const {
    auto id = find_class(iri);
    if (!id) throw Error(ErrorCode::UnknownClass, "unknown class '" + std::string(iri) + "'");
    return *id;
}

void OntologyStore::require_classified() const {
    if (!is_classified()) {
        throw Error(ErrorCode::StaleClosure,
                    "ontology changed since the last classify; closures are stale");
    }
}

bool OntologyStore::subsumes(std::string_view general, std::string_view specific) const {
    ClassId g = require_class(general);
    ClassId s = require_class(specific);
    require_classified();
    return subsumes(g, s);
}

MatchDegree OntologyStore::match_degree(std::string_view provided,
                                        std::string_view required) const {
    ClassId p = require_class(provided);
    ClassId r = require_class(required);
    require_classified();
    return match_degree(p, r);
}

bool OntologyStore::subsumes(ClassId general, ClassId specific) const {
    return find_ancestor(ancestors_[specific], general) != nullptr;
}

std::optional<std::uint32_t> OntologyStore::distance(ClassId general, ClassId specific) const {
    if (const auto *a = find_ancestor(ancestors_[specific], general)) return a->distance;
    return std::nullopt;
}

MatchDegree OntologyStore::match_degree(ClassId provided, ClassId required) const {
    if (provided == required) return {Degree::Exact, 0};
    if (auto d = distance(required, provided)) return {Degree::Plugin, static_cast<int>(*d)};
    if (auto d = distance(provided, required)) return {Degree::Subsume, static_cast<int>(*d)};
    return {};
}

std::vector<std::string> OntologyStore::subclass_chain(ClassId specific, ClassId general) const {
    if (!subsumes(general, specific)) return {};
    // BFS over asserted edges with parent pointers; ties resolved by iri order.
    std::unordered_map<ClassId, ClassId> came_from;
    came_from.emplace(specific, specific);
    std::deque<ClassId> queue{specific};
    while (!queue.empty()) {
        ClassId node = queue.front();
        queue.pop_front();
        if (node == general) break;
        std::vector<ClassId> ps(parents_[node].begin(), parents_[node].end());
        std::sort(ps.begin(), ps.end(),
                  [&](ClassId a, ClassId b) { return class_iris_[a] < class_iris_[b]; });
        for (ClassId p : ps) {
            if (came_from.try_emplace(p, node).second) queue.push_back(p);
        }
    }
    std::vector<std::string> chain;
    for (ClassId at = general;; at = came_from.at(at)) {
        chain.push_back(class_iris_[at]);
        if (at == specific) break;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

std::vector<ClassId> OntologyStore::superclasses_by_distance(ClassId id) const {
    std::vector<Ancestor> strict;
    for (const auto &a : ancestors_[id]) {
        if (a.id != id) strict.push_back(a);
    }
    std::sort(strict.begin(), strict.end(), [&](const Ancestor &a, const Ancestor &b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return class_iris_[a.id] < class_iris_[b.id];
    });
    std::vector<ClassId> out;
    out.reserve(strict.size());
    for (const auto &a : strict) out.push_back(a.id);
    return out;
}

std::optional<PropertyId> OntologyStore::find_property(std::string_view iri) const {
    auto it = property_index_.find(std::string(iri));
    if (it == property_index_.end()) return std::nullopt;
    return it->second;
}

bool OntologyStore::property_subsumes(std::string_view general, std::string_view specific) const {
    if (general == specific) return true;
    auto g = find_property(general);
    auto s = find_property(specific);
    if (!g || !s || *s >= property_ancestors_.size()) return false;
    return find_ancestor(property_ancestors_[*s], *g) != nullptr;
}

std::size_t OntologyStore::subclass_edge_count() const {
    std::size_t n = 0;
    for (const auto &ps : parents_) n += ps.size();
    return n;
}

}  // namespace semcomp
