#include "semcomp/http_api.hpp"

#include "semcomp/error.hpp"

#include <httplib.h>


namespace semcomp {

namespace {

std::vector<std::string> split_path(const std::string &path) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size()) {
        while (i < path.size() && path[i] == '/') ++i;
        std::size_t j = path.find('/', i);
        if (j == std::string::npos) j = path.size();
        if (j > i) out.push_back(httplib::detail::decode_url(path.substr(i, j - i), false));
        i = j;
    }
    return out;
}

std::vector<std::string> all(const WireRequest &r, const std::string &key) {
    std::vector<std::string> out;
    auto [lo, hi] = r.params.equal_range(key);
    for (auto it = lo; it != hi; ++it) {
        // "a,b" and repeated keys are both accepted
        std::size_t start = 0;
        const std::string &v = it->second;
        while (start <= v.size()) {
            auto comma = v.find(',', start);
            if (comma == std::string::npos) comma = v.size();
            if (comma > start) out.push_back(v.substr(start, comma - start));
            start = comma + 1;
        }
    }
    return out;
}

WireResponse ok(const Json &j, int status = 200) { return {status, j.dump(2) + "\n"}; }

Json body_json(const WireRequest &r) {
    if (r.body.empty()) return Json::object();
    return parse_json(r.body);
}

WireResponse invoke(Engine &engine, const std::string &session, Verb verb, Json args) {
    MixedInitiativeRequest req{verb, std::move(args)};
    Response resp = engine.invoke(session, req);
    return ok(resp);
}

std::size_t to_size(const std::string &text, const char *what) {
    try {
        std::size_t used = 0;
        auto v = std::stoul(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception &) {
    }
    throw Error(ErrorCode::Usage, std::string("'") + what + "' must be a non-negative integer");
}

WireResponse session_routes(Engine &engine, const WireRequest &r, const std::vector<std::string> &seg) {
    const std::string &id = seg[1];
    const std::string &m = r.method;
    if (seg.size() == 2 && m == "GET") {
        Json j = engine.view(id);
        return ok(j);
    }
    if (seg.size() < 3) throw Error(ErrorCode::UnknownId, "no such resource " + r.path);
    const std::string &what = seg[2];

    if (what == "request" && m == "PUT") {
        auto diags = engine.set_request(id, decode<AbstractRequest>(body_json(r), "request"));
        return ok(Json{{"diagnostics", diags}});
    }
    if (what == "export" && m == "GET") {
        return ok(engine.export_process(id, parse_export_format(r.param("format").value_or("profile-bundle"))));
    }
    if (m != "POST") throw Error(ErrorCode::Usage, m + " is not supported on " + r.path);

    if (what == "invoke") {
        MixedInitiativeRequest req = parse_invocation(body_json(r));
        return ok(engine.invoke(id, req));
    }
    if (what == "import") return ok(engine.import_process(id, body_json(r)));
    if (what == "plan") {
        Json args = Json::object();
        if (auto k = r.param("k")) args["k"] = to_size(*k, "k");
        if (auto t = r.param("token")) args["token"] = *t;
        if (auto t = r.param("resume")) args["token"] = *t;
        return invoke(engine, id, Verb::Plan, args);
    }
    if (what == "relax") return invoke(engine, id, Verb::Relax, Json::object());
    if (what == "undo") return invoke(engine, id, Verb::Undo, Json::object());
    if (what == "edit") return invoke(engine, id, Verb::EditProcess, body_json(r));
    if (what == "discover") return invoke(engine, id, Verb::Discover, body_json(r));
    if (what == "complete-dataflow") return invoke(engine, id, Verb::CompleteDataflow, Json::object());
    if (what == "producers") {
        Json args = body_json(r);
        if (auto c = r.param("class")) args["class"] = *c;
        return invoke(engine, id, Verb::Producers, args);
    }
    if (what == "successors") {
        Json args = Json::object();
        if (auto s = r.param("service")) args["service"] = *s;
        return invoke(engine, id, Verb::Successors, args);
    }
    if (what == "conflicts") {
        Json args = Json::object();
        for (const char *k : {"service", "anchor", "relation", "outcome"}) {
            if (auto v = r.param(k)) args[k] = *v;
        }
        return invoke(engine, id, Verb::DetectConflicts, args);
    }
    if ((what == "apply" || what == "dismiss") && seg.size() == 4) {
        return invoke(engine, id, what == "apply" ? Verb::ApplySuggestion : Verb::DismissSuggestion,
                      Json{{"id", seg[3]}});
    }
    if (what == "suggestions" && seg.size() == 5 && (seg[4] == "apply" || seg[4] == "dismiss")) {
        return invoke(engine, id, seg[4] == "apply" ? Verb::ApplySuggestion : Verb::DismissSuggestion,
                      Json{{"id", seg[3]}});
    }
    if (what == "verify" && seg.size() == 4) {
        if (seg[3] == "dataflow") return invoke(engine, id, Verb::VerifyDataflow, Json::object());
        if (seg[3] == "controlflow") {
            Json args = Json::object();
            auto scope = all(r, "scope");
            if (!scope.empty()) args["scope"] = scope;
            return invoke(engine, id, Verb::VerifyControlflow, args);
        }
    }
    if (what == "suggestions" && seg.size() == 4) {
        switch (parse_suggestion_kind(seg[3])) {
        case SuggestionKind::Consolidation: {
            Json args = Json::object();
            if (auto p = r.param("producer")) args["producer"] = *p;
            if (auto c = r.param("consumer")) args["consumer"] = *c;
            return invoke(engine, id, Verb::SuggestConsolidations, args);
        }
        case SuggestionKind::Ordering:
            return invoke(engine, id, Verb::SuggestOrderings, Json::object());
        case SuggestionKind::Insertion:
            return invoke(engine, id, Verb::SuggestInsertions, Json::object());
        case SuggestionKind::Removal:
            return invoke(engine, id, Verb::SuggestRemovals, Json::object());
        case SuggestionKind::Relaxation:
            return invoke(engine, id, Verb::Relax, Json::object());
        }
    }
    throw Error(ErrorCode::UnknownId, "no such resource " + r.path);
}

WireResponse dispatch(Engine &engine, const WireRequest &r) {
    const auto seg = split_path(r.path);
    const std::string &m = r.method;
    if (seg.empty()) throw Error(ErrorCode::UnknownId, "no such resource /");

    if (seg[0] == "ontologies") {
        if (seg.size() == 1 && m == "POST") {
            auto warnings = engine.load_ontology(r.body);
            auto snap = engine.snapshot();
            return ok(Json{{"classes", snap.ontology->class_count()},
                           {"properties", snap.ontology->property_count()},
                           {"triples", snap.ontology->triples().size()},
                           {"warnings", warnings}},
                      201);
        }
        if (seg.size() == 2 && seg[1] == "classify" && m == "POST") {
            engine.classify();
            auto snap = engine.snapshot();
            return ok(Json{{"classified", true},
                           {"classes", snap.ontology->class_count()},
                           {"subclass_edges", snap.ontology->subclass_edge_count()}});
        }
        if (seg.size() == 1 && m == "GET") {
            auto snap = engine.snapshot();
            return ok(Json{{"classes", snap.ontology->class_count()},
                           {"properties", snap.ontology->property_count()},
                           {"triples", snap.ontology->triples().size()},
                           {"classified", snap.ontology->is_classified()}});
        }
    }
    if (seg[0] == "services") {
        if (seg.size() == 1 && m == "POST") {
            auto profiles = parse_profiles(r.body);
            std::vector<std::string> ids;
            for (const auto &p : profiles) ids.push_back(p.id);
            auto diags = engine.register_services(std::move(profiles));
            return ok(Json{{"registered", ids}, {"diagnostics", diags}}, 201);
        }
        if (seg.size() == 2 && m == "DELETE") {
            engine.deregister_service(seg[1]);
            return ok(Json{{"deregistered", seg[1]}});
        }
        if (seg.size() == 2 && m == "GET") {
            auto snap = engine.snapshot();
            const ServiceProfile *p = snap.registry->find(seg[1]);
            if (!p) throw Error(ErrorCode::UnknownId, "unknown service '" + seg[1] + "'");
            return ok(Json{{"profile", *p}, {"diagnostics", snap.registry->diagnostics(seg[1])}});
        }
        if (seg.size() == 1 && m == "GET") {
            DiscoveryQuery q;
            q.required_inputs = all(r, "input");
            q.desired_outputs = all(r, "output");
            for (const auto &e : all(r, "effect")) q.desired_effects.push_back({e, {}});
            if (auto max = r.param("max")) q.max_results = to_size(*max, "max");
            if (q.empty()) {
                auto snap = engine.snapshot();
                Json ids = Json::array();
                for (const auto &[id, p] : snap.registry->services()) ids.push_back(id);
                return ok(Json{{"services", ids}});
            }
            return ok(Json{{"matches", engine.discover(q)}});
        }
    }
    if (seg[0] == "sessions") {
        if (seg.size() == 1 && m == "POST") return ok(Json{{"id", engine.create_session()}}, 201);
        if (seg.size() == 1 && m == "GET") return ok(Json{{"sessions", engine.session_ids()}});
        return session_routes(engine, r, seg);
    }
    throw Error(ErrorCode::UnknownId, "no such resource " + r.path);
}

}  // namespace

std::optional<std::string> WireRequest::param(const std::string &key) const {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::Usage:
        return 400;
    case ErrorCode::UnknownId:
    case ErrorCode::UnknownClass:
        return 404;
    case ErrorCode::Conflict:
    case ErrorCode::Duplicate:
    case ErrorCode::StaleSuggestion:
        return 409;
    case ErrorCode::StaleClosure:
    case ErrorCode::Precondition:
        return 422;
    case ErrorCode::Io:
        return 500;
    }
    return 500;
}

WireResponse route(Engine &engine, const WireRequest &request) {
    try {
        return dispatch(engine, request);
    } catch (const ParseError &e) {
        return {400, Json{{"error", "parse"}, {"message", e.what()}, {"line", e.line()}, {"column", e.column()}}.dump(2) + "\n"};
    } catch (const Error &e) {
        return {http_status(e.code()),
                Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump(2) + "\n"};
    } catch (const std::exception &e) {
        return {500, Json{{"error", "internal"}, {"message", e.what()}}.dump(2) + "\n"};
    }
}

struct HttpServer::Impl {
    Engine &engine;
    httplib::Server server;

    explicit Impl(Engine &e) : engine(e) {
        auto handler = [this](const httplib::Request &req, httplib::Response &res) {
            WireRequest w;
            w.method = req.method;
            w.path = req.path;
            for (const auto &[k, v] : req.params) w.params.emplace(k, v);
            w.body = req.body;
            WireResponse out = route(engine, w);
            res.status = out.status;
            res.set_content(out.body, "application/json");
        };
        const std::string any = R"(/.*)";
        server.Get(any, handler);
        server.Post(any, handler);
        server.Put(any, handler);
        server.Delete(any, handler);
    }
};

HttpServer::HttpServer(Engine &engine) : impl_(std::make_unique<Impl>(engine)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string &host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace semcomp
