#include "semcomp/serialization.hpp"

#include "fnv.hpp"
#include "semcomp/error.hpp"

#include <cstdio>

namespace semcomp {

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

[[noreturn]] void bad(const std::string &message) { throw Error(ErrorCode::Parse, message); }

const Json &field(const Json &j, const char *key) {
    if (!j.is_object()) bad(std::string("expected an object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) bad(std::string("missing field '") + key + "'");
    return *it;
}

template <typename T>
void optional_field(const Json &j, const char *key, T &out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

template <typename T>
void optional_field(const Json &j, const char *key, std::optional<T> &out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

}  // namespace

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &e) {
        auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(line, column, "malformed JSON document");
    }
}

void to_json(Json &j, const MatchDegree &v) {
    j = Json{{"degree", std::string(to_string(v.degree))}};
    if (v.degree != Degree::Fail) j["distance"] = v.distance;
}

void to_json(Json &j, const Binding &v) {
    if (v.kind == Binding::Kind::Literal) j = Json{{"literal", v.value}};
    else j = v.value;
}

void from_json(const Json &j, Binding &v) {
    if (j.is_string()) {
        v = {Binding::Kind::Reference, j.get<std::string>()};
    } else if (j.is_object() && j.contains("literal")) {
        const Json &l = j.at("literal");
        v = {Binding::Kind::Literal, l.is_string() ? l.get<std::string>() : l.dump()};
    } else {
        bad("a binding is a parameter name or {\"literal\": value}");
    }
}

void to_json(Json &j, const StatusPattern &v) {
    j = Json{{"class", v.status_class}};
    if (!v.bindings.empty()) {
        Json b = Json::object();
        for (const auto &[k, x] : v.bindings) b[k] = x;
        j["bindings"] = b;
    }
}

void from_json(const Json &j, StatusPattern &v) {
    if (j.is_string()) {
        v = {j.get<std::string>(), {}};
        return;
    }
    v.status_class = field(j, "class").get<std::string>();
    v.bindings.clear();
    if (auto it = j.find("bindings"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) bad("'bindings' must be an object");
        for (const auto &[k, x] : it->items()) v.bindings[k] = x.get<Binding>();
    }
}

void to_json(Json &j, const Param &v) { j = Json{{"name", v.name}, {"type", v.type}}; }

void from_json(const Json &j, Param &v) {
    v.name = field(j, "name").get<std::string>();
    v.type = field(j, "type").get<std::string>();
}

void to_json(Json &j, const ConditionalEffect &v) {
    j = Json{{"label", v.label}, {"adds", v.adds}, {"deletes", v.deletes}};
}

void from_json(const Json &j, ConditionalEffect &v) {
    v.label = field(j, "label").get<std::string>();
    v.adds.clear();
    v.deletes.clear();
    optional_field(j, "adds", v.adds);
    optional_field(j, "deletes", v.deletes);
}

Json literal_to_json(const Literal &v) {
    if (const auto *d = std::get_if<double>(&v)) return *d;
    if (const auto *s = std::get_if<std::string>(&v)) return *s;
    return Json{{"class", std::get<ClassValue>(v).iri}};
}

Literal literal_from_json(const Json &j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return std::string(j.get<bool>() ? "true" : "false");
    if (j.is_object() && j.contains("class")) return ClassValue{j.at("class").get<std::string>()};
    bad("a literal is a number, a string or {\"class\": iri}");
}

void to_json(Json &j, const ServiceProfile &v) {
    j = Json{{"id", v.id},           {"name", v.name},       {"inputs", v.inputs},
             {"outputs", v.outputs}, {"effects", v.effects}, {"preconditions", v.preconditions}};
    Json nf = Json::object();
    for (const auto &[k, x] : v.nonfunctional) nf[k] = literal_to_json(x);
    j["nonfunctional"] = nf;
}

void from_json(const Json &j, ServiceProfile &v) {
    v = {};
    v.id = field(j, "id").get<std::string>();
    v.name = j.value("name", v.id);
    optional_field(j, "inputs", v.inputs);
    optional_field(j, "outputs", v.outputs);
    optional_field(j, "preconditions", v.preconditions);
    optional_field(j, "effects", v.effects);
    if (auto it = j.find("nonfunctional"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) bad("'nonfunctional' must be an object");
        for (const auto &[k, x] : it->items()) v.nonfunctional[k] = literal_from_json(x);
    }
}

void to_json(Json &j, const NonFunctionalFilter &v) {
    j = Json{{"attribute", v.attribute},
             {"op", std::string(to_string(v.comparator))},
             {"value", literal_to_json(v.value)}};
}

void from_json(const Json &j, NonFunctionalFilter &v) {
    v.attribute = field(j, "attribute").get<std::string>();
    v.comparator = parse_comparator(j.value("op", std::string("=")));
    v.value = literal_from_json(field(j, "value"));
}

void to_json(Json &j, const DiscoveryQuery &v) {
    j = Json{{"required_inputs", v.required_inputs},
             {"desired_outputs", v.desired_outputs},
             {"desired_effects", v.desired_effects},
             {"nonfunctional", v.nonfunctional_filters}};
    if (v.max_results) j["max_results"] = *v.max_results;
}

void from_json(const Json &j, DiscoveryQuery &v) {
    v = {};
    if (!j.is_object()) bad("a discovery query is an object");
    optional_field(j, "required_inputs", v.required_inputs);
    optional_field(j, "desired_outputs", v.desired_outputs);
    optional_field(j, "desired_effects", v.desired_effects);
    optional_field(j, "nonfunctional", v.nonfunctional_filters);
    optional_field(j, "max_results", v.max_results);
    if (v.max_results && *v.max_results == 0) bad("'max_results' must be positive");
}

void to_json(Json &j, const Score &v) {
    j = Json{{"exact", v.exact}, {"plugin", v.plugin}, {"distance", v.distance}};
}

void to_json(Json &j, const ServiceMatch &v) {
    Json criteria = Json::array();
    for (const auto &c : v.criteria) {
        Json m = c.match;
        m["criterion"] = c.criterion;
        criteria.push_back(m);
    }
    j = Json{{"service", v.service_id}, {"criteria", criteria}, {"score", v.score}};
}

void to_json(Json &j, const Diagnostic &v) {
    j = Json{{"severity", std::string(to_string(v.severity))},
             {"kind", std::string(to_string(v.kind))},
             {"location", v.location},
             {"explanation", v.explanation}};
    if (!v.branch.empty()) j["branch"] = v.branch;
}

void from_json(const Json &j, Diagnostic &v) {
    v = {};
    v.severity = field(j, "severity").get<std::string>() == "error" ? Severity::Error : Severity::Warning;
    const auto kind = field(j, "kind").get<std::string>();
    for (auto k : {DiagnosticKind::TypeMismatch, DiagnosticKind::UnboundInput,
                   DiagnosticKind::UnsatisfiedPrecondition, DiagnosticKind::MutexConflict,
                   DiagnosticKind::DanglingStep, DiagnosticKind::WeakMatch,
                   DiagnosticKind::UnresolvedReference}) {
        if (to_string(k) == kind) v.kind = k;
    }
    v.location = j.value("location", "");
    v.explanation = j.value("explanation", "");
    v.branch = j.value("branch", "");
}

void to_json(Json &j, const AbstractRequest &v) {
    j = Json{{"available_inputs", v.available_inputs},
             {"initial_statuses", v.initial_statuses},
             {"goal_outputs", v.goal_outputs},
             {"goal_statuses", v.goal_statuses},
             {"nonfunctional", v.nonfunctional_filters},
             {"max_plans", v.max_plans},
             {"extra_levels", v.extra_levels}};
    if (v.horizon) j["horizon"] = *v.horizon;
}

void from_json(const Json &j, AbstractRequest &v) {
    v = {};
    if (!j.is_object()) bad("a request is an object");
    optional_field(j, "available_inputs", v.available_inputs);
    optional_field(j, "initial_statuses", v.initial_statuses);
    optional_field(j, "goal_outputs", v.goal_outputs);
    optional_field(j, "goal_statuses", v.goal_statuses);
    optional_field(j, "nonfunctional", v.nonfunctional_filters);
    optional_field(j, "max_plans", v.max_plans);
    optional_field(j, "horizon", v.horizon);
    optional_field(j, "extra_levels", v.extra_levels);
    if (!v.has_goal()) bad("a request needs at least one goal output or goal status");
    if (v.max_plans == 0) bad("'max_plans' must be positive");
}

void to_json(Json &j, const ActionRef &v) { j = Json{{"service", v.service}, {"outcome", v.outcome}}; }

void from_json(const Json &j, ActionRef &v) {
    v.service = field(j, "service").get<std::string>();
    v.outcome = j.value("outcome", std::string(kDefaultOutcome));
}

void to_json(Json &j, const Plan &v) {
    Json assumptions = Json::array();
    for (const auto &a : v.assumptions) assumptions.push_back(a);
    j = Json{{"layers", v.layers},
             {"assumptions", assumptions},
             {"goal_outputs", v.goal_outputs},
             {"goal_statuses", v.goal_statuses}};
}

void from_json(const Json &j, Plan &v) {
    v = {};
    v.layers = field(j, "layers").get<std::vector<std::vector<ActionRef>>>();
    if (auto it = j.find("assumptions"); it != j.end()) {
        for (const auto &a : *it) v.assumptions.insert(a.get<ActionRef>());
    } else {
        for (const auto &l : v.layers) v.assumptions.insert(l.begin(), l.end());
    }
    optional_field(j, "goal_outputs", v.goal_outputs);
    optional_field(j, "goal_statuses", v.goal_statuses);
}

void to_json(Json &j, const Step &v) {
    j = Json{{"id", v.id}, {"service", v.service}, {"provenance", std::string(to_string(v.provenance))}};
    if (v.outcome) j["outcome"] = *v.outcome;
}

void from_json(const Json &j, Step &v) {
    v = {};
    v.id = field(j, "id").get<std::string>();
    v.service = field(j, "service").get<std::string>();
    optional_field(j, "outcome", v.outcome);
    v.provenance = parse_provenance(j.value("provenance", std::string("user")));
}

void to_json(Json &j, const ControlNode &v) {
    if (v.kind == ControlNode::Kind::Step) {
        j = Json{{"step", v.step}};
        return;
    }
    Json children = Json::array();
    for (const auto &c : v.children) children.push_back(c);
    j = Json{{std::string(to_string(v.kind)), children}};
}

void from_json(const Json &j, ControlNode &v) {
    if (j.is_string()) {
        v = ControlNode::leaf(j.get<std::string>());
        return;
    }
    if (!j.is_object() || j.size() != 1) bad("a control node has exactly one key");
    const auto &[key, value] = *j.items().begin();
    if (key == "step") {
        v = ControlNode::leaf(value.get<std::string>());
        return;
    }
    std::vector<ControlNode> children;
    for (const auto &c : value) children.push_back(c.get<ControlNode>());
    if (key == "sequence") v = ControlNode::sequence(std::move(children));
    else if (key == "parallel") v = ControlNode::parallel(std::move(children));
    else if (key == "choice") v = ControlNode::choice(std::move(children));
    else bad("unknown control construct '" + key + "'");
}

void to_json(Json &j, const Consolidation &v) {
    j = Json{{"producer", v.producer}, {"output", v.output},   {"consumer", v.consumer},
             {"input", v.input},       {"provenance", std::string(to_string(v.provenance))}};
}

void from_json(const Json &j, Consolidation &v) {
    v.producer = field(j, "producer").get<std::string>();
    v.output = field(j, "output").get<std::string>();
    v.consumer = field(j, "consumer").get<std::string>();
    v.input = field(j, "input").get<std::string>();
    v.provenance = parse_provenance(j.value("provenance", std::string("user")));
}

void to_json(Json &j, const CompositeProcess &v) {
    Json steps = Json::array();
    for (const auto &[id, s] : v.steps) steps.push_back(s);
    j = Json{{"steps", steps}, {"control", v.control}, {"consolidations", v.consolidations}};
}

void from_json(const Json &j, CompositeProcess &v) {
    v = {};
    if (!j.is_object()) bad("a process is an object");
    if (auto it = j.find("steps"); it != j.end()) {
        for (const auto &s : *it) {
            Step step = s.get<Step>();
            if (v.steps.contains(step.id)) bad("duplicate step id '" + step.id + "'");
            v.steps.emplace(step.id, std::move(step));
        }
    }
    if (auto it = j.find("control"); it != j.end()) v.control = it->get<ControlNode>();
    optional_field(j, "consolidations", v.consolidations);
    normalize(v);
    auto problems = invariant_violations(v);
    if (!problems.empty()) bad("invalid process: " + problems.front());
}

Json edit_to_json(const Edit &v) {
    Json j;
    std::visit([&](const auto &e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, edit::AddStep>) {
            j = Json{{"op", "add_step"}, {"step", e.step}, {"relation", std::string(to_string(e.placement.relation))}};
            if (e.placement.anchor) j["anchor"] = *e.placement.anchor;
        } else if constexpr (std::is_same_v<T, edit::RemoveStep>) {
            j = Json{{"op", "remove_step"}, {"step", e.step}};
        } else if constexpr (std::is_same_v<T, edit::AddConsolidation>) {
            j = Json{{"op", "add_consolidation"}, {"link", e.link}};
        } else if constexpr (std::is_same_v<T, edit::RemoveConsolidation>) {
            j = Json{{"op", "remove_consolidation"}, {"consumer", e.consumer}, {"input", e.input}};
        } else if constexpr (std::is_same_v<T, edit::Order>) {
            j = Json{{"op", "order"}, {"first", e.first}, {"second", e.second}};
        } else if constexpr (std::is_same_v<T, edit::Parallelize>) {
            j = Json{{"op", "parallelize"}, {"first", e.first}, {"second", e.second}};
        } else if constexpr (std::is_same_v<T, edit::SetOutcome>) {
            j = Json{{"op", "set_outcome"}, {"step", e.step}, {"outcome", nullptr}};
            if (e.outcome) j["outcome"] = *e.outcome;
        } else {
            j = Json{{"op", "replace_process"}, {"process", e.process}};
        }
    }, v);
    return j;
}

Edit edit_from_json(const Json &j) {
    Edit v;
    const auto op = field(j, "op").get<std::string>();
    if (op == "add_step") {
        edit::AddStep e;
        e.step = field(j, "step").get<Step>();
        e.placement.relation = parse_relation(j.value("relation", std::string("append")));
        optional_field(j, "anchor", e.placement.anchor);
        v = e;
    } else if (op == "remove_step") {
        v = edit::RemoveStep{field(j, "step").get<std::string>()};
    } else if (op == "add_consolidation") {
        v = edit::AddConsolidation{field(j, "link").get<Consolidation>()};
    } else if (op == "remove_consolidation") {
        v = edit::RemoveConsolidation{field(j, "consumer").get<std::string>(),
                                      field(j, "input").get<std::string>()};
    } else if (op == "order") {
        v = edit::Order{field(j, "first").get<std::string>(), field(j, "second").get<std::string>()};
    } else if (op == "parallelize") {
        v = edit::Parallelize{field(j, "first").get<std::string>(), field(j, "second").get<std::string>()};
    } else if (op == "set_outcome") {
        edit::SetOutcome e;
        e.step = field(j, "step").get<std::string>();
        optional_field(j, "outcome", e.outcome);
        v = e;
    } else if (op == "replace_process") {
        v = edit::ReplaceProcess{field(j, "process").get<CompositeProcess>()};
    } else {
        bad("unknown edit op '" + op + "'");
    }
    return v;
}

void to_json(Json &j, const Delta &v) {
    Json edits = Json::array();
    for (const auto &e : v.edits) edits.push_back(e);
    j = Json{{"edits", edits}};
}

void from_json(const Json &j, Delta &v) {
    v = {};
    const Json &edits = j.is_array() ? j : field(j, "edits");
    for (const auto &e : edits) v.edits.push_back(e.get<Edit>());
}

void to_json(Json &j, const Suggestion &v) {
    j = Json{{"id", v.id},
             {"kind", std::string(to_string(v.kind))},
             {"payload", v.payload},
             {"justification", v.justification},
             {"match", v.match},
             {"score", v.score},
             {"weak", v.weak},
             {"basis", hex64(v.basis)}};
    if (v.revised_request) j["revised_request"] = *v.revised_request;
}

void from_json(const Json &j, Suggestion &v) {
    v = {};
    v.id = j.value("id", "");
    v.kind = parse_suggestion_kind(field(j, "kind").get<std::string>());
    v.payload = field(j, "payload").get<Delta>();
    optional_field(j, "revised_request", v.revised_request);
    v.justification = j.value("justification", "");
    v.weak = j.value("weak", false);
    if (auto it = j.find("match"); it != j.end()) {
        const auto degree = it->value("degree", std::string("Fail"));
        for (auto d : {Degree::Exact, Degree::Plugin, Degree::Subsume, Degree::Fail}) {
            if (to_string(d) == degree) v.match.degree = d;
        }
        v.match.distance = it->value("distance", -1);
    }
    if (auto it = j.find("score"); it != j.end()) {
        v.score = {it->value("exact", 0), it->value("plugin", 0), it->value("distance", 0)};
    }
    v.basis = std::stoull(j.value("basis", std::string("0")), nullptr, 16);
}

std::vector<ServiceProfile> parse_profiles(std::string_view text) {
    Json root = parse_json(text);
    std::vector<ServiceProfile> out;
    if (root.is_object() && root.contains("services")) {
        std::size_t i = 0;
        for (const auto &p : root.at("services")) {
            out.push_back(decode<ServiceProfile>(p, "services[" + std::to_string(i++) + "]"));
        }
    } else if (root.is_array()) {
        std::size_t i = 0;
        for (const auto &p : root) out.push_back(decode<ServiceProfile>(p, "[" + std::to_string(i++) + "]"));
    } else {
        out.push_back(decode<ServiceProfile>(root, "profile"));
    }
    return out;
}

std::string canonical(const Json &j) { return j.dump(); }

std::uint64_t fingerprint(const CompositeProcess &process) {
    return detail::fnv1a(canonical(Json(process)));
}

std::uint64_t request_hash(const AbstractRequest &request) {
    return detail::fnv1a(canonical(Json(request)));
}

std::string hex64(std::uint64_t value) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace semcomp
