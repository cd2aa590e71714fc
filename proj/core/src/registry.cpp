#include "semcomp/registry.hpp"

#include "semcomp/error.hpp"

#include <algorithm>
#include <set>

namespace semcomp {

std::string_view to_string(Severity severity) {
    return severity == Severity::Error ? "error" : "warning";
}

std::string_view to_string(DiagnosticKind kind) {
    switch (kind) {
    case DiagnosticKind::TypeMismatch: return "TypeMismatch";
    case DiagnosticKind::UnboundInput: return "UnboundInput";
    case DiagnosticKind::UnsatisfiedPrecondition: return "UnsatisfiedPrecondition";
    case DiagnosticKind::MutexConflict: return "MutexConflict";
    case DiagnosticKind::DanglingStep: return "DanglingStep";
    case DiagnosticKind::WeakMatch: return "WeakMatch";
    case DiagnosticKind::UnresolvedReference: return "UnresolvedReference";
    }
    return "WeakMatch";
}

namespace {

template <typename T>
const T *find_named(const std::vector<T> &items, std::string_view name) {
    for (const auto &item : items) {
        if (item.name == name) return &item;
    }
    return nullptr;
}

// Exact beats Plugin; within a degree the shorter distance wins.
bool better(const MatchDegree &a, const MatchDegree &b) {
    if (a.degree != b.degree) return static_cast<int>(a.degree) < static_cast<int>(b.degree);
    return a.distance < b.distance;
}

std::optional<ClassId> resolve(std::string_view iri, const OntologyStore &ontology) {
    return ontology.find_class(iri);
}

void require_classified(const OntologyStore &ontology) {
    if (!ontology.is_classified()) {
        throw Error(ErrorCode::StaleClosure, "ontology must be classified before discovery");
    }
}

std::optional<std::string> class_text(const Literal &value) {
    if (const auto *s = std::get_if<std::string>(&value)) return *s;
    if (const auto *c = std::get_if<ClassValue>(&value)) return c->iri;
    return std::nullopt;
}

}  // namespace

const Param *ServiceProfile::find_input(std::string_view param) const {
    return find_named(inputs, param);
}

const Param *ServiceProfile::find_output(std::string_view param) const {
    return find_named(outputs, param);
}

const Param *ServiceProfile::find_param(std::string_view param) const {
    if (const auto *p = find_input(param)) return p;
    return find_output(param);
}

const ConditionalEffect *ServiceProfile::find_effect(std::string_view label) const {
    for (const auto &e : effects) {
        if (e.label == label) return &e;
    }
    return nullptr;
}

std::string_view to_string(Comparator comparator) {
    switch (comparator) {
    case Comparator::Eq: return "=";
    case Comparator::Ne: return "!=";
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
    case Comparator::SubsumedBy: return "subsumed-by";
    }
    return "=";
}

Comparator parse_comparator(std::string_view text) {
    if (text == "=" || text == "==") return Comparator::Eq;
    if (text == "!=" || text == "≠") return Comparator::Ne;
    if (text == "<") return Comparator::Lt;
    if (text == "<=" || text == "≤") return Comparator::Le;
    if (text == ">") return Comparator::Gt;
    if (text == ">=" || text == "≥") return Comparator::Ge;
    if (text == "subsumed-by") return Comparator::SubsumedBy;
    throw Error(ErrorCode::Parse, "unknown comparator '" + std::string(text) + "'");
}

bool passes(const ServiceProfile &profile, const NonFunctionalFilter &filter,
            const OntologyStore &ontology) {
    auto it = profile.nonfunctional.find(filter.attribute);
    if (it == profile.nonfunctional.end()) return false;
    const Literal &actual = it->second;

    if (filter.comparator == Comparator::SubsumedBy) {
        auto a = class_text(actual);
        auto f = class_text(filter.value);
        if (!a || !f) return false;
        auto ac = resolve(*a, ontology);
        auto fc = resolve(*f, ontology);
        return ac && fc && ontology.subsumes(*fc, *ac);
    }
    if (actual.index() != filter.value.index()) return false;

    auto compare = [&](auto &&lhs, auto &&rhs) {
        switch (filter.comparator) {
        case Comparator::Eq: return lhs == rhs;
        case Comparator::Ne: return lhs != rhs;
        case Comparator::Lt: return lhs < rhs;
        case Comparator::Le: return lhs <= rhs;
        case Comparator::Gt: return lhs > rhs;
        case Comparator::Ge: return lhs >= rhs;
        case Comparator::SubsumedBy: return false;
        }
        return false;
    };
    if (const auto *d = std::get_if<double>(&actual)) return compare(*d, std::get<double>(filter.value));
    if (const auto *s = std::get_if<std::string>(&actual))
        return compare(*s, std::get<std::string>(filter.value));
    return compare(std::get<ClassValue>(actual).iri, std::get<ClassValue>(filter.value).iri);
}

bool passes_all(const ServiceProfile &profile, const std::vector<NonFunctionalFilter> &filters,
                const OntologyStore &ontology) {
    return std::all_of(filters.begin(), filters.end(),
                       [&](const auto &f) { return passes(profile, f, ontology); });
}

void Score::add(const MatchDegree &m) {
    if (m.degree == Degree::Exact) ++exact;
    if (m.degree == Degree::Plugin) ++plugin;
    if (m.distance > 0) distance += m.distance;
}

std::vector<Diagnostic> check_profile(const ServiceProfile &profile, const OntologyStore &ontology) {
    std::vector<Diagnostic> out;
    const std::string base = "service:" + profile.id;
    auto warn = [&](std::string location, std::string text) {
        out.push_back({Severity::Warning, DiagnosticKind::UnresolvedReference, std::move(location),
                       std::move(text), {}});
    };
    auto check_class = [&](const std::string &iri, const std::string &location) {
        if (!ontology.find_class(iri)) warn(location, "undeclared class '" + iri + "'");
    };
    auto check_params = [&](const std::vector<Param> &params, const char *side) {
        std::set<std::string> names;
        for (const auto &p : params) {
            std::string location = base + "/" + side + "/" + p.name;
            if (!names.insert(p.name).second) warn(location, "duplicate parameter name");
            check_class(p.type, location);
        }
    };
    auto check_pattern = [&](const StatusPattern &s, const std::string &location) {
        check_class(s.status_class, location);
        for (const auto &[property, binding] : s.bindings) {
            if (!ontology.find_property(property)) {
                warn(location + "/" + property, "undeclared property '" + property + "'");
            }
            if (binding.kind == Binding::Kind::Reference && !profile.find_param(binding.value)) {
                warn(location + "/" + property,
                     "binding refers to unknown parameter '" + binding.value + "'");
            }
        }
    };

    check_params(profile.inputs, "inputs");
    check_params(profile.outputs, "outputs");
    for (std::size_t i = 0; i < profile.preconditions.size(); ++i) {
        check_pattern(profile.preconditions[i], base + "/preconditions/" + std::to_string(i));
    }
    std::set<std::string> labels;
    for (const auto &effect : profile.effects) {
        std::string location = base + "/effects/" + effect.label;
        if (!labels.insert(effect.label).second) warn(location, "duplicate effect label");
        for (const auto &a : effect.adds) {
            check_pattern(a, location + "/adds");
            if (std::find(effect.deletes.begin(), effect.deletes.end(), a) != effect.deletes.end()) {
                warn(location, "status '" + a.status_class + "' is both added and deleted");
            }
        }
        for (const auto &d : effect.deletes) check_pattern(d, location + "/deletes");
    }
    for (const auto &[attribute, value] : profile.nonfunctional) {
        if (const auto *c = std::get_if<ClassValue>(&value)) {
            check_class(c->iri, base + "/nonfunctional/" + attribute);
        }
    }
    return out;
}

std::vector<Diagnostic> Registry::register_service(ServiceProfile profile,
                                                   const OntologyStore &ontology) {
    if (profile.id.empty()) throw Error(ErrorCode::Parse, "service profile requires an id");
    if (services_.contains(profile.id)) {
        throw Error(ErrorCode::Duplicate, "service '" + profile.id + "' is already registered");
    }
    if (profile.effects.empty()) profile.effects.push_back({std::string(kDefaultOutcome), {}, {}});
    auto diagnostics = check_profile(profile, ontology);
    diagnostics_[profile.id] = diagnostics;
    std::string id = profile.id;
    services_.emplace(std::move(id), std::move(profile));
    ++version_;
    return diagnostics;
}

void Registry::deregister_service(const std::string &id) {
    auto it = services_.find(id);
    if (it == services_.end()) throw Error(ErrorCode::UnknownId, "unknown service '" + id + "'");
    services_.erase(it);
    diagnostics_.erase(id);
    ++version_;
}

const ServiceProfile *Registry::find(std::string_view id) const {
    auto it = services_.find(id);
    return it == services_.end() ? nullptr : &it->second;
}

const ServiceProfile &Registry::get(std::string_view id) const {
    if (const auto *p = find(id)) return *p;
    throw Error(ErrorCode::UnknownId, "unknown service '" + std::string(id) + "'");
}

const std::vector<Diagnostic> &Registry::diagnostics(std::string_view id) const {
    static const std::vector<Diagnostic> none;
    auto it = diagnostics_.find(id);
    return it == diagnostics_.end() ? none : it->second;
}

MatchDegree best_usable_match(const std::vector<std::string> &provided, std::string_view required,
                              const OntologyStore &ontology) {
    MatchDegree best;
    auto r = ontology.find_class(required);
    if (!r) return best;
    for (const auto &p : provided) {
        auto pc = ontology.find_class(p);
        if (!pc) continue;
        MatchDegree m = ontology.match_degree(*pc, *r);
        if (m.usable() && (!best.usable() || better(m, best))) best = m;
    }
    return best;
}

MatchDegree status_match(const StatusPattern &provided, const StatusPattern &required,
                         const OntologyStore &ontology) {
    auto p = ontology.find_class(provided.status_class);
    auto r = ontology.find_class(required.status_class);
    if (!p || !r) return {};
    return ontology.match_degree(*p, *r);
}

void rank(std::vector<ServiceMatch> &matches) {
    std::stable_sort(matches.begin(), matches.end(), [](const auto &a, const auto &b) {
        if (a.score != b.score) return a.score > b.score;
        return a.service_id < b.service_id;
    });
}

namespace {

std::vector<std::string> param_types(const std::vector<Param> &params) {
    std::vector<std::string> out;
    out.reserve(params.size());
    for (const auto &p : params) out.push_back(p.type);
    return out;
}

// Best usable status match of any add-effect of `profile` against `required`.
std::pair<MatchDegree, std::string> best_effect_match(const ServiceProfile &profile,
                                                      const StatusPattern &required,
                                                      const OntologyStore &ontology) {
    MatchDegree best;
    std::string label;
    for (const auto &effect : profile.effects) {
        for (const auto &add : effect.adds) {
            MatchDegree m = status_match(add, required, ontology);
            if (m.usable() && (!best.usable() || better(m, best))) {
                best = m;
                label = effect.label;
            }
        }
    }
    return {best, label};
}

ServiceMatch finish(std::string id, std::vector<CriterionMatch> criteria) {
    ServiceMatch match{std::move(id), std::move(criteria), {}};
    for (const auto &c : match.criteria) match.score.add(c.match);
    return match;
}

}  // namespace

std::vector<ServiceMatch> Registry::discover(const DiscoveryQuery &query,
                                             const OntologyStore &ontology) const {
    if (query.empty()) throw Error(ErrorCode::Precondition, "discovery query has no criteria");
    require_classified(ontology);
    for (const auto &c : query.desired_outputs) ontology.require_class(c);
    for (const auto &c : query.required_inputs) ontology.require_class(c);
    for (const auto &e : query.desired_effects) ontology.require_class(e.status_class);

    std::vector<ServiceMatch> result;
    for (const auto &[id, profile] : services_) {
        if (!passes_all(profile, query.nonfunctional_filters, ontology)) continue;
        std::vector<CriterionMatch> criteria;
        bool ok = true;
        const auto outputs = param_types(profile.outputs);
        for (const auto &desired : query.desired_outputs) {
            MatchDegree m = best_usable_match(outputs, desired, ontology);
            if (!m.usable()) {
                ok = false;
                break;
            }
            criteria.push_back({"output:" + desired, m});
        }
        for (std::size_t i = 0; ok && i < query.desired_effects.size(); ++i) {
            auto [m, label] = best_effect_match(profile, query.desired_effects[i], ontology);
            if (!m.usable()) {
                ok = false;
                break;
            }
            criteria.push_back({"effect:" + query.desired_effects[i].status_class, m});
        }
        if (ok && !query.required_inputs.empty()) {
            for (const auto &input : profile.inputs) {
                MatchDegree m = best_usable_match(query.required_inputs, input.type, ontology);
                if (!m.usable()) {
                    ok = false;
                    break;
                }
                criteria.push_back({"input:" + input.name, m});
            }
        }
        if (ok) result.push_back(finish(id, std::move(criteria)));
    }
    rank(result);
    if (query.max_results && result.size() > *query.max_results) result.resize(*query.max_results);
    return result;
}

std::vector<ServiceMatch> Registry::producers_of(const ProducerTarget &target,
                                                 const OntologyStore &ontology) const {
    require_classified(ontology);
    std::vector<ServiceMatch> result;
    if (const auto *cls = std::get_if<std::string>(&target)) {
        ClassId wanted = ontology.require_class(*cls);
        for (const auto &[id, profile] : services_) {
            MatchDegree best;
            std::string which;
            for (const auto &o : profile.outputs) {
                auto oc = ontology.find_class(o.type);
                if (!oc) continue;
                MatchDegree m = ontology.match_degree(*oc, wanted);
                if (m.usable() && (!best.usable() || better(m, best))) {
                    best = m;
                    which = o.name;
                }
            }
            if (best.usable()) result.push_back(finish(id, {{"output:" + which, best}}));
        }
    } else {
        const auto &pattern = std::get<StatusPattern>(target);
        ontology.require_class(pattern.status_class);
        for (const auto &[id, profile] : services_) {
            auto [m, label] = best_effect_match(profile, pattern, ontology);
            if (m.usable()) result.push_back(finish(id, {{"effect:" + label, m}}));
        }
    }
    rank(result);
    return result;
}

std::vector<ServiceMatch> Registry::successors_of(std::string_view id,
                                                  const OntologyStore &ontology) const {
    const ServiceProfile &source = get(id);
    require_classified(ontology);
    const auto outputs = param_types(source.outputs);
    std::vector<ServiceMatch> result;
    for (const auto &[candidate_id, candidate] : services_) {
        std::vector<CriterionMatch> criteria;
        for (const auto &input : candidate.inputs) {
            MatchDegree m = best_usable_match(outputs, input.type, ontology);
            if (m.usable()) criteria.push_back({"input:" + input.name, m});
        }
        for (const auto &pre : candidate.preconditions) {
            auto [m, label] = best_effect_match(source, pre, ontology);
            if (m.usable()) criteria.push_back({"precondition:" + pre.status_class, m});
        }
        if (!criteria.empty()) result.push_back(finish(candidate_id, std::move(criteria)));
    }
    rank(result);
    return result;
}

}  // namespace semcomp
