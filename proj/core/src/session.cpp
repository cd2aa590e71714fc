#include "semcomp/session.hpp"

#include "fnv.hpp"
#include "semcomp/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace semcomp {

namespace fs = std::filesystem;

namespace {

constexpr std::pair<Verb, std::string_view> kVerbs[] = {
    {Verb::Discover, "Discover"},
    {Verb::Producers, "Producers"},
    {Verb::Successors, "Successors"},
    {Verb::SuggestConsolidations, "SuggestConsolidations"},
    {Verb::CompleteDataflow, "CompleteDataflow"},
    {Verb::VerifyDataflow, "VerifyDataflow"},
    {Verb::SuggestOrderings, "SuggestOrderings"},
    {Verb::VerifyControlflow, "VerifyControlflow"},
    {Verb::DetectConflicts, "DetectConflicts"},
    {Verb::SuggestInsertions, "SuggestInsertions"},
    {Verb::SuggestRemovals, "SuggestRemovals"},
    {Verb::Plan, "Plan"},
    {Verb::Relax, "Relax"},
    {Verb::ApplySuggestion, "ApplySuggestion"},
    {Verb::DismissSuggestion, "DismissSuggestion"},
    {Verb::Undo, "Undo"},
    {Verb::EditProcess, "EditProcess"},
};

std::string fold(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '_' || c == '-') continue;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write to a sibling then rename, so a crash never leaves half a file.
void write_file(const fs::path &path, const std::string &text) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out << text;
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string profile_file(const std::string &id) {
    std::string safe;
    for (char c : id) safe += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
    return safe + "-" + hex64(detail::fnv1a(id)).substr(8) + ".json";
}

template <typename T>
T arg(const Json &args, const char *key) {
    auto it = args.find(key);
    if (it == args.end() || it->is_null()) throw Error(ErrorCode::Usage, std::string("missing argument '") + key + "'");
    return decode<T>(*it, key);
}

template <typename T>
std::optional<T> optional_arg(const Json &args, const char *key) {
    auto it = args.find(key);
    if (it == args.end() || it->is_null()) return std::nullopt;
    return decode<T>(*it, key);
}

}  // namespace

std::string_view to_string(Verb verb) {
    for (const auto &[v, name] : kVerbs) {
        if (v == verb) return name;
    }
    return "?";
}

Verb parse_verb(std::string_view text) {
    const auto key = fold(text);
    for (const auto &[v, name] : kVerbs) {
        if (fold(name) == key) return v;
    }
    if (key == "suggestconsolidation") return Verb::SuggestConsolidations;
    if (key == "suggestinsertion") return Verb::SuggestInsertions;
    if (key == "suggestremoval") return Verb::SuggestRemovals;
    if (key == "suggestordering") return Verb::SuggestOrderings;
    if (key == "apply") return Verb::ApplySuggestion;
    if (key == "dismiss") return Verb::DismissSuggestion;
    if (key == "edit") return Verb::EditProcess;
    throw Error(ErrorCode::Usage, "unknown verb '" + std::string(text) + "'");
}

MixedInitiativeRequest parse_invocation(const Json &j) {
    if (!j.is_object() || !j.contains("verb") || !j.at("verb").is_string()) {
        throw Error(ErrorCode::Parse, "an invocation is {\"verb\": name, \"args\": {...}}");
    }
    MixedInitiativeRequest out;
    out.verb = parse_verb(j.at("verb").get<std::string>());
    if (auto it = j.find("args"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw Error(ErrorCode::Parse, "'args' must be an object");
        out.args = *it;
    }
    return out;
}

bool Response::has_errors() const {
    return std::any_of(diagnostics.begin(), diagnostics.end(), is_error);
}

void to_json(Json &j, const Response &v) {
    j = Json{{"verb", std::string(to_string(v.verb))}};
    if (!v.matches.empty()) j["matches"] = v.matches;
    if (!v.suggestions.empty()) j["suggestions"] = v.suggestions;
    j["diagnostics"] = v.diagnostics;
    if (v.verb == Verb::Plan) {
        j["plans"] = v.plans;
        j["exhausted"] = v.exhausted;
    }
    if (v.token) j["token"] = *v.token;
    if (v.delta) j["delta"] = *v.delta;
    if (v.process) j["process"] = *v.process;
    if (v.request) j["request"] = *v.request;
}

void to_json(Json &j, const ContextView &v) {
    j = Json{{"id", v.id},
             {"request", v.request ? Json(*v.request) : Json()},
             {"process", v.process},
             {"pending", v.pending},
             {"history", v.history},
             {"cached_plans", v.cached_plans},
             {"diagnostics", v.diagnostics}};
    if (v.token) j["token"] = *v.token;
}

ExportFormat parse_export_format(std::string_view text) {
    const auto key = fold(text);
    if (key == "profilebundle" || key == "bundle") return ExportFormat::ProfileBundle;
    if (key == "planreport" || key == "report") return ExportFormat::PlanReport;
    throw Error(ErrorCode::Usage, "unknown export format '" + std::string(text) + "'");
}

ServiceProfile composite_profile(const CompositeProcess &process, const Registry &registry,
                                 const std::string &id) {
    ServiceProfile out;
    out.id = id;
    out.name = id;
    for (const auto &step_id : step_sequence(process)) {
        const Step &step = process.steps.at(step_id);
        const ServiceProfile *p = registry.find(step.service);
        if (!p) throw Error(ErrorCode::UnknownId, "step " + step_id + " uses unknown service " + step.service);
        for (const auto &in : p->inputs) {
            if (!process.feeding(step_id, in.name)) out.inputs.push_back({step_id + "." + in.name, in.type});
        }
        for (const auto &o : p->outputs) {
            bool consumed = std::any_of(process.consolidations.begin(), process.consolidations.end(),
                                        [&](const Consolidation &c) {
                                            return c.producer == step_id && c.output == o.name;
                                        });
            if (!consumed) out.outputs.push_back({step_id + "." + o.name, o.type});
        }
    }
    return out;
}

CompositeProcess import_process_document(const Json &document) {
    if (document.is_object() && document.contains("process")) {
        return decode<CompositeProcess>(document.at("process"), "process");
    }
    return decode<CompositeProcess>(document, "process");
}

CompositeProcess replay(const std::vector<Delta> &history) {
    CompositeProcess process;
    for (const auto &d : history) process = apply(process, d);
    return process;
}

// --- engine -------------------------------------------------------------

struct Engine::Context {
    std::mutex mutex;
    std::string id;
    std::optional<AbstractRequest> request;
    CompositeProcess process;
    std::vector<Suggestion> pending;
    std::vector<Delta> history;
    std::size_t next_suggestion = 1;

    // Plan cache; valid only for the exact snapshot and request it was built on.
    std::shared_ptr<PlanCursor> cursor;
    std::shared_ptr<const Registry> cache_registry;
    std::shared_ptr<const OntologyStore> cache_ontology;
    std::uint64_t cache_request = 0;

    void drop_cache() {
        cursor.reset();
        cache_registry.reset();
        cache_ontology.reset();
    }

    bool cache_valid(const Snapshot &snap) const {
        return cursor && cache_registry == snap.registry && cache_ontology == snap.ontology &&
               request && cache_request == request_hash(*request);
    }

    void issue(std::vector<Suggestion> &suggestions) {
        const auto basis = fingerprint(process);
        for (auto &s : suggestions) {
            s.id = "g" + std::to_string(next_suggestion++);
            s.basis = basis;
            pending.push_back(s);
        }
    }

    void commit(const Delta &delta, CompositeProcess next) {
        history.push_back(delta);
        process = std::move(next);
    }

    Json to_json() const {
        return Json{{"id", id},
                    {"request", request ? Json(*request) : Json()},
                    {"process", process},
                    {"pending", pending},
                    {"history", history},
                    {"next_suggestion", next_suggestion}};
    }
};

Engine::Engine()
    : ontology_(std::make_shared<OntologyStore>()), registry_(std::make_shared<Registry>()) {}

Engine::~Engine() = default;

Engine::Engine(fs::path workspace) : Engine() {
    workspace_ = std::move(workspace);
    open_workspace();
}

void Engine::open_workspace() {
    const fs::path &root = *workspace_;
    fs::create_directories(root);

    auto sorted = [](const fs::path &dir) {
        std::vector<fs::path> out;
        if (fs::is_directory(dir)) {
            for (const auto &e : fs::directory_iterator(dir)) {
                if (e.is_regular_file() && e.path().extension() != ".tmp") out.push_back(e.path());
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    };

    auto onto = std::make_shared<OntologyStore>();
    for (const auto &f : sorted(root / "ontology")) {
        onto->load(parse_ontology(read_file(f)));
        ++ontology_files_;
    }
    bool classified = false;
    if (fs::exists(root / "state.json")) {
        classified = parse_json(read_file(root / "state.json")).value("classified", false);
    }
    if (classified) onto->classify();
    ontology_ = onto;

    auto reg = std::make_shared<Registry>();
    for (const auto &f : sorted(root / "profiles")) {
        for (auto &p : parse_profiles(read_file(f))) reg->register_service(std::move(p), *onto);
    }
    registry_ = reg;

    for (const auto &f : sorted(root / "sessions")) {
        Json j = parse_json(read_file(f));
        auto ctx = std::make_shared<Context>();
        ctx->id = j.at("id").get<std::string>();
        if (!j.at("request").is_null()) ctx->request = decode<AbstractRequest>(j.at("request"), "request");
        ctx->process = decode<CompositeProcess>(j.at("process"), "process");
        ctx->pending = decode<std::vector<Suggestion>>(j.at("pending"), "pending");
        ctx->history = decode<std::vector<Delta>>(j.at("history"), "history");
        ctx->next_suggestion = j.value("next_suggestion", std::size_t{1});
        if (ctx->id.rfind("session-", 0) == 0) {
            next_session_ = std::max(next_session_, std::stoul(ctx->id.substr(8)) + 1);
        }
        sessions_[ctx->id] = ctx;
    }
}

void Engine::persist(const Context &ctx) const {
    if (!workspace_) return;
    write_file(*workspace_ / "sessions" / (ctx.id + ".json"), ctx.to_json().dump(2) + "\n");
}

void Engine::persist_state() const {
    if (!workspace_) return;
    write_file(*workspace_ / "state.json",
               Json{{"classified", ontology_->is_classified()}}.dump(2) + "\n");
}

Snapshot Engine::snapshot() const {
    std::shared_lock lock(mutex_);
    return {ontology_, registry_};
}

std::vector<std::string> Engine::load_ontology(std::string_view text) {
    OntologyDocument doc = parse_ontology(text);
    std::unique_lock lock(mutex_);
    auto next = std::make_shared<OntologyStore>(*ontology_);
    next->load(doc);
    if (workspace_) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu.txt", ++ontology_files_);
        write_file(*workspace_ / "ontology" / name, std::string(text));
    }
    ontology_ = next;
    persist_state();
    return next->warnings();
}

void Engine::load_ontology(const OntologyDocument &document) {
    std::unique_lock lock(mutex_);
    auto next = std::make_shared<OntologyStore>(*ontology_);
    next->load(document);
    if (workspace_) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu.txt", ++ontology_files_);
        write_file(*workspace_ / "ontology" / name, to_triples_text(document));
    }
    ontology_ = next;
    persist_state();
}

void Engine::classify() {
    std::unique_lock lock(mutex_);
    if (ontology_->is_classified()) return;
    auto next = std::make_shared<OntologyStore>(*ontology_);
    next->classify();
    ontology_ = next;
    persist_state();
}

std::vector<Diagnostic> Engine::register_service(ServiceProfile profile) {
    std::vector<ServiceProfile> one;
    one.push_back(std::move(profile));
    return register_services(std::move(one));
}

std::vector<Diagnostic> Engine::register_services(std::vector<ServiceProfile> profiles) {
    std::unique_lock lock(mutex_);
    auto next = std::make_shared<Registry>(*registry_);
    std::vector<Diagnostic> out;
    for (const auto &p : profiles) {
        auto d = next->register_service(p, *ontology_);
        out.insert(out.end(), d.begin(), d.end());
    }
    if (workspace_) {
        for (const auto &p : profiles) {
            write_file(*workspace_ / "profiles" / profile_file(p.id), Json(p).dump(2) + "\n");
        }
    }
    registry_ = next;
    return out;
}

void Engine::deregister_service(const std::string &id) {
    std::unique_lock lock(mutex_);
    auto next = std::make_shared<Registry>(*registry_);
    next->deregister_service(id);
    if (workspace_) fs::remove(*workspace_ / "profiles" / profile_file(id));
    registry_ = next;
}

std::vector<ServiceMatch> Engine::discover(const DiscoveryQuery &query) const {
    auto snap = snapshot();
    return snap.registry->discover(query, *snap.ontology);
}

std::string Engine::create_session() {
    std::unique_lock lock(mutex_);
    auto ctx = std::make_shared<Context>();
    ctx->id = "session-" + std::to_string(next_session_++);
    sessions_[ctx->id] = ctx;
    persist(*ctx);
    return ctx->id;
}

std::vector<std::string> Engine::session_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto &[id, ctx] : sessions_) out.push_back(id);
    return out;
}

void Engine::discard_session(const std::string &session) {
    std::unique_lock lock(mutex_);
    if (!sessions_.erase(session)) throw Error(ErrorCode::UnknownId, "unknown session '" + session + "'");
    if (workspace_) fs::remove(*workspace_ / "sessions" / (session + ".json"));
}

std::shared_ptr<Engine::Context> Engine::context(const std::string &session) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(session);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownId, "unknown session '" + session + "'");
    return it->second;
}

ContextView Engine::view(const std::string &session) const {
    auto ctx = context(session);
    auto snap = snapshot();
    std::lock_guard lock(ctx->mutex);
    ContextView v{ctx->id, ctx->request, ctx->process, ctx->pending, ctx->history, false, std::nullopt, {}};
    if (ctx->cache_valid(snap)) {
        v.cached_plans = true;
        v.token = ctx->cursor->token();
    }
    if (snap.ontology->is_classified()) {
        v.diagnostics = verify_all(ctx->process, ctx->request ? &*ctx->request : nullptr, snap);
    }
    return v;
}

std::vector<Diagnostic> Engine::set_request(const std::string &session, AbstractRequest request) {
    if (!request.has_goal()) throw Error(ErrorCode::Parse, "a request needs at least one goal");
    if (request.max_plans == 0) throw Error(ErrorCode::Parse, "'max_plans' must be positive");
    auto ctx = context(session);
    auto snap = snapshot();
    std::lock_guard lock(ctx->mutex);
    if (!ctx->request || request_hash(*ctx->request) != request_hash(request)) ctx->drop_cache();
    ctx->request = std::move(request);
    persist(*ctx);

    std::vector<Diagnostic> out;
    for (const auto &c : ctx->request->available_inputs) {
        if (!snap.ontology->find_class(c)) {
            out.push_back({Severity::Warning, DiagnosticKind::UnresolvedReference, "request/available_inputs",
                           "class " + c + " is not in the ontology", ""});
        }
    }
    for (const auto &c : ctx->request->goal_outputs) {
        if (!snap.ontology->find_class(c)) {
            out.push_back({Severity::Warning, DiagnosticKind::UnresolvedReference, "request/goal_outputs",
                           "class " + c + " is not in the ontology", ""});
        }
    }
    if (!ctx->process.empty() && snap.ontology->is_classified()) {
        auto d = verify_all(ctx->process, &*ctx->request, snap);
        out.insert(out.end(), d.begin(), d.end());
    }
    return out;
}

Response Engine::invoke(const std::string &session, const MixedInitiativeRequest &req) {
    auto ctx = context(session);
    auto snap = snapshot();
    std::lock_guard lock(ctx->mutex);
    Context &c = *ctx;
    const Json &args = req.args;
    const AbstractRequest *request = c.request ? &*c.request : nullptr;

    Response out;
    out.verb = req.verb;
    bool changed = false;

    auto need_request = [&]() -> const AbstractRequest & {
        if (!c.request) throw Error(ErrorCode::Precondition, "no request set for session " + c.id);
        return *c.request;
    };
    auto changed_to = [&](Delta delta, CompositeProcess next) {
        c.commit(delta, std::move(next));
        out.delta = std::move(delta);
        out.process = c.process;
        changed = true;
    };

    switch (req.verb) {
    case Verb::Discover:
        out.matches = snap.registry->discover(decode<DiscoveryQuery>(args, "query"), *snap.ontology);
        break;
    case Verb::Producers: {
        ProducerTarget target;
        if (auto cls = optional_arg<std::string>(args, "class")) target = *cls;
        else target = arg<StatusPattern>(args, "status");
        out.matches = snap.registry->producers_of(target, *snap.ontology);
        break;
    }
    case Verb::Successors:
        out.matches = snap.registry->successors_of(arg<std::string>(args, "service"), *snap.ontology);
        break;
    case Verb::SuggestConsolidations:
        out.suggestions = suggest_consolidations(c.process, arg<std::string>(args, "producer"),
                                                 arg<std::string>(args, "consumer"), snap);
        c.issue(out.suggestions);
        changed = true;
        break;
    case Verb::CompleteDataflow: {
        auto done = complete_dataflow(c.process, snap);
        out.suggestions = std::move(done.competing);
        c.issue(out.suggestions);
        if (!done.delta.edits.empty()) changed_to(done.delta, std::move(done.process));
        changed = true;
        break;
    }
    case Verb::VerifyDataflow:
        out.diagnostics = verify_dataflow(c.process, snap, request);
        break;
    case Verb::VerifyControlflow: {
        auto scope = optional_arg<std::vector<std::string>>(args, "scope").value_or(std::vector<std::string>{});
        for (const auto &s : scope) {
            if (!c.process.find_step(s)) throw Error(ErrorCode::UnknownId, "unknown step '" + s + "'");
        }
        out.diagnostics = verify_controlflow(c.process, request, snap, scope);
        break;
    }
    case Verb::SuggestOrderings:
        out.suggestions = suggest_orderings(c.process, snap, request);
        c.issue(out.suggestions);
        changed = true;
        break;
    case Verb::DetectConflicts: {
        Placement at;
        at.anchor = optional_arg<std::string>(args, "anchor");
        at.relation = parse_relation(optional_arg<std::string>(args, "relation").value_or("append"));
        auto report = detect_conflicts(c.process, arg<std::string>(args, "service"), at,
                                       optional_arg<std::string>(args, "outcome"), snap, request);
        out.diagnostics = std::move(report.diagnostics);
        out.suggestions = std::move(report.suggestions);
        c.issue(out.suggestions);
        changed = true;
        break;
    }
    case Verb::SuggestInsertions:
        out.suggestions = suggest_insertions(c.process, request, snap);
        c.issue(out.suggestions);
        changed = true;
        break;
    case Verb::SuggestRemovals:
        out.suggestions = suggest_removals(c.process, snap);
        c.issue(out.suggestions);
        changed = true;
        break;
    case Verb::Plan: {
        const AbstractRequest &r = need_request();
        const auto k = optional_arg<std::size_t>(args, "k").value_or(r.max_plans);
        if (k == 0) throw Error(ErrorCode::Usage, "k must be positive");
        if (!c.cache_valid(snap)) {
            c.drop_cache();
            c.cursor = std::make_shared<PlanCursor>(build_graph(r, snap.registry, snap.ontology));
            c.cache_registry = snap.registry;
            c.cache_ontology = snap.ontology;
            c.cache_request = request_hash(r);
        }
        if (auto text = optional_arg<std::string>(args, "token")) {
            auto tok = parse_token(*text);
            if (!tok) throw Error(ErrorCode::Parse, "malformed continuation token '" + *text + "'");
            if (tok->basis != c.cursor->graph().domain().basis()) {
                throw Error(ErrorCode::StaleSuggestion,
                            "continuation token was issued against a different registry, ontology or request");
            }
            if (tok->done) {
                out.token = *text;
                out.exhausted = true;
                break;
            }
            if (c.cursor->emitted() != tok->emitted) {
                c.cursor = std::make_shared<PlanCursor>(c.cursor->graph_ptr());
                c.cursor->next(tok->emitted);
            }
        }
        auto batch = extract_plans(*c.cursor, k);
        out.plans = std::move(batch.plans);
        out.token = batch.token;
        out.exhausted = batch.exhausted || out.plans.size() < k;
        for (std::size_t i = 0; i < out.plans.size(); ++i) {
            const Plan &p = out.plans[i];
            Suggestion s;
            s.kind = SuggestionKind::Insertion;
            s.payload.edits.push_back(edit::ReplaceProcess{plan_to_process(p, *snap.registry, *snap.ontology)});
            s.justification = "plan with " + std::to_string(p.layers.size()) + " layer(s) and " +
                              std::to_string(p.action_count()) + " action(s) reaching every goal";
            s.match = {Degree::Exact, 0};
            out.suggestions.push_back(std::move(s));
        }
        c.issue(out.suggestions);
        changed = true;
        break;
    }
    case Verb::Relax: {
        const AbstractRequest &r = need_request();
        std::shared_ptr<PlanGraph> graph;
        if (c.cache_valid(snap)) graph = c.cursor->graph_ptr();
        else graph = build_graph(r, snap.registry, snap.ontology);
        out.suggestions = suggest_relaxations(r, *graph, snap);
        c.issue(out.suggestions);
        changed = true;
        break;
    }
    case Verb::ApplySuggestion:
    case Verb::DismissSuggestion: {
        const auto id = arg<std::string>(args, "id");
        auto it = std::find_if(c.pending.begin(), c.pending.end(),
                               [&](const Suggestion &s) { return s.id == id; });
        if (it == c.pending.end()) throw Error(ErrorCode::UnknownId, "no pending suggestion '" + id + "'");
        if (req.verb == Verb::DismissSuggestion) {
            c.pending.erase(it);
            changed = true;
            break;
        }
        if (it->basis != fingerprint(c.process)) {
            throw Error(ErrorCode::StaleSuggestion,
                        "suggestion " + id + " was computed on an earlier version of the process");
        }
        Suggestion s = *it;
        CompositeProcess next = apply(c.process, s.payload);
        c.pending.erase(it);
        if (s.revised_request) {
            c.request = *s.revised_request;
            c.drop_cache();
            out.request = c.request;
        }
        if (!s.payload.edits.empty()) changed_to(s.payload, std::move(next));
        changed = true;
        out.diagnostics = verify_all(c.process, c.request ? &*c.request : nullptr, snap);
        break;
    }
    case Verb::Undo: {
        if (c.history.empty()) throw Error(ErrorCode::Precondition, "nothing to undo");
        auto history = c.history;
        Delta undone = history.back();
        history.pop_back();
        CompositeProcess previous = replay(history);
        c.history = std::move(history);
        c.process = std::move(previous);
        out.delta = std::move(undone);
        out.process = c.process;
        changed = true;
        break;
    }
    case Verb::EditProcess: {
        Delta delta = decode<Delta>(args, "edits");
        if (delta.edits.empty()) throw Error(ErrorCode::Usage, "an edit needs at least one operation");
        CompositeProcess next = apply(c.process, delta);
        changed_to(std::move(delta), std::move(next));
        // housekeeping: surface steps the edit left disconnected
        for (auto &d : verify_all(c.process, request, snap)) {
            if (d.kind == DiagnosticKind::DanglingStep || is_error(d)) out.diagnostics.push_back(std::move(d));
        }
        break;
    }
    }
    if (changed) persist(c);
    return out;
}

Json Engine::export_process(const std::string &session, ExportFormat format) const {
    auto ctx = context(session);
    auto snap = snapshot();
    std::lock_guard lock(ctx->mutex);
    if (format == ExportFormat::ProfileBundle) {
        if (ctx->process.empty()) throw Error(ErrorCode::Precondition, "cannot export an empty process");
        return Json{{"services", Json::array({composite_profile(ctx->process, *snap.registry, "composite:" + ctx->id)})},
                    {"process", ctx->process}};
    }
    Json steps = Json::array();
    for (const auto &id : step_sequence(ctx->process)) steps.push_back(ctx->process.steps.at(id));
    const AbstractRequest *request = ctx->request ? &*ctx->request : nullptr;
    return Json{{"session", ctx->id},
                {"request", request ? Json(*request) : Json()},
                {"steps", steps},
                {"process", ctx->process},
                {"diagnostics", snap.ontology->is_classified() ? verify_all(ctx->process, request, snap)
                                                               : std::vector<Diagnostic>{}}};
}

Response Engine::import_process(const std::string &session, const Json &document) {
    CompositeProcess process = import_process_document(document);
    MixedInitiativeRequest req;
    req.verb = Verb::EditProcess;
    req.args = Delta{{edit::ReplaceProcess{std::move(process)}}};
    return invoke(session, req);
}

}  // namespace semcomp
