#include "cli.hpp"

#include "semcomp/bench.hpp"
#include "semcomp/error.hpp"
#include "semcomp/http_api.hpp"
#include "semcomp/session.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace semcomp {

namespace {

namespace fs = std::filesystem;

std::string read_input(const std::string &path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const std::string &path) {
    const std::string text = read_input(path);
    try {
        return parse_json(text);
    } catch (const ParseError &e) {
        throw ParseError(e.line(), e.column(), path + ": " + e.what());
    }
}

struct Scratch {
    Engine &engine;
    std::string id;
    bool owned;
    Scratch(Engine &e, const std::string &session) : engine(e), id(session), owned(session.empty()) {
        if (owned) id = engine.create_session();
    }
    ~Scratch() {
        if (owned) {
            try {
                engine.discard_session(id);
            } catch (...) {
            }
        }
    }
};

void print_diagnostics(std::ostream &err, const std::vector<Diagnostic> &diags) {
    for (const auto &d : diags) {
        err << to_string(d.severity) << ": " << to_string(d.kind) << " at " << d.location;
        if (!d.branch.empty()) err << " [" << d.branch << "]";
        err << ": " << d.explanation << "\n";
    }
}

void print_matches(std::ostream &out, const std::vector<ServiceMatch> &matches) {
    for (const auto &m : matches) {
        out << m.service_id << "  exact=" << m.score.exact << " plugin=" << m.score.plugin
            << " distance=" << m.score.distance;
        for (const auto &c : m.criteria) out << "  " << c.criterion << ":" << to_string(c.match.degree);
        out << "\n";
    }
}

void print_plans(std::ostream &out, const Response &r, std::size_t first) {
    for (std::size_t i = 0; i < r.plans.size(); ++i) {
        const Plan &p = r.plans[i];
        out << "plan " << first + i + 1 << " (" << p.layers.size() << " layers, " << p.action_count()
            << " actions)\n";
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            out << "  " << l + 1 << ":";
            for (std::size_t a = 0; a < p.layers[l].size(); ++a) {
                out << (a ? ", " : " ") << p.layers[l][a].describe();
            }
            out << "\n";
        }
    }
    if (r.token) out << "token: " << *r.token << "\n";
    if (r.exhausted) out << "no further plans\n";
}

void print_suggestions(std::ostream &out, const std::vector<Suggestion> &suggestions) {
    for (const auto &s : suggestions) {
        out << s.id << " " << to_string(s.kind);
        if (s.match.degree != Degree::Fail) out << " [" << to_string(s.match.degree) << "]";
        if (s.weak) out << " (weak)";
        out << ": " << s.justification << "\n";
    }
}

void emit(std::ostream &out, const Json &j) { out << j.dump(2) << "\n"; }

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"semantic service composition engine", "semcomp"};
    app.require_subcommand(1);

    std::string workspace = ".semcomp";
    bool json = false;
    app.add_option("-w,--workspace", workspace, "workspace directory")->envname("SEMCOMP_WORKSPACE");
    app.add_flag("--json", json, "structured output");

    std::string file, file2, kind, session, token, format = "profile-bundle", request_file, host = "127.0.0.1";
    std::string producer, consumer, service, anchor, relation = "append", outcome, output_file;
    std::vector<std::string> inputs, outputs, effects, scope;
    std::size_t k = 1, max_results = 0;
    int port = 8080;
    bool csv = false;

    auto *load = app.add_subcommand("load-ontology", "merge an ontology document into the workspace");
    load->add_option("file", file, "triples or structured document")->required();
    app.add_subcommand("classify", "recompute subclass and subproperty closures");
    auto *reg = app.add_subcommand("register", "register service profiles");
    reg->add_option("path", file, "profile file, bundle, or directory of them")->required();
    auto *dereg = app.add_subcommand("deregister", "remove a registered service");
    dereg->add_option("id", file, "service id")->required();
    auto *disc = app.add_subcommand("discover", "rank services against a query");
    disc->add_option("query", file, "query document");
    disc->add_option("--input", inputs, "available input class");
    disc->add_option("--output", outputs, "desired output class");
    disc->add_option("--effect", effects, "desired effect status class");
    disc->add_option("--max", max_results, "keep at most this many matches");
    auto *plan = app.add_subcommand("plan", "compose plans for an abstract request");
    plan->add_option("request", file, "request document")->required();
    plan->add_option("-k,--k", k, "plans to return")->check(CLI::PositiveNumber);
    plan->add_option("--resume", token, "continuation token from an earlier call");
    plan->add_option("--session", session, "use (and update) this session");
    auto *verify = app.add_subcommand("verify", "check dataflow and control flow of a process");
    verify->add_option("process", file, "process document or profile bundle")->required();
    verify->add_option("--request", request_file, "request document");
    verify->add_option("--scope", scope, "only findings touching these steps")->delimiter(',');
    auto *suggest = app.add_subcommand("suggest", "ask for suggestions of one kind");
    suggest->add_option("kind", kind, "consolidation|ordering|insertion|removal|relaxation|conflicts")->required();
    suggest->add_option("process", file, "process document");
    suggest->add_option("--request", request_file, "request document");
    suggest->add_option("--producer", producer, "producing step (consolidation)");
    suggest->add_option("--consumer", consumer, "consuming step (consolidation)");
    suggest->add_option("--service", service, "candidate service (conflicts)");
    suggest->add_option("--anchor", anchor, "anchor step (conflicts)");
    suggest->add_option("--relation", relation, "append|before|after|parallel (conflicts)");
    suggest->add_option("--outcome", outcome, "assumed outcome (conflicts)");
    auto *serve = app.add_subcommand("serve", "run the wire API");
    serve->add_option("--port", port, "port, 0 for any")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "bind address");
    auto *bench = app.add_subcommand("bench", "run the synthetic benchmark");
    bench->add_option("config", file, "bench config document")->required();
    bench->add_flag("--csv", csv, "CSV rows instead of the table");
    auto *exp = app.add_subcommand("export", "export a saved session");
    exp->add_option("session-file", file, "session document")->required();
    exp->add_option("--format", format, "profile-bundle|plan-report");
    exp->add_option("-o,--output", output_file, "write here instead of standard output");
    app.add_subcommand("new-session", "create a session");
    auto *show = app.add_subcommand("show-session", "print a session");
    show->add_option("id", session, "session id")->required();
    auto *setreq = app.add_subcommand("set-request", "store a request in a session");
    setreq->add_option("id", session, "session id")->required();
    setreq->add_option("request", file, "request document")->required();
    auto *inv = app.add_subcommand("invoke", "send a mixed-initiative request to a session");
    inv->add_option("id", session, "session id")->required();
    inv->add_option("request", file, "invocation document {verb, args}")->required();
    auto *imp = app.add_subcommand("import", "replace a session's process with a document's");
    imp->add_option("id", session, "session id")->required();
    imp->add_option("file", file, "process document or profile bundle")->required();

    if (argc <= 1) {
        err << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        if (!app.get_subcommands().empty()) err << app.get_subcommands().front()->help();
        else err << app.help();
        return 2;
    }

    try {
        CLI::App *cmd = app.get_subcommands().front();
        const std::string name = cmd->get_name();

        if (name == "bench") {
            BenchConfig config = parse_bench_config(read_json(file));
            BenchReport report = run_benchmark(config);
            if (json) emit(out, report);
            else if (csv) out << report.csv_header() << "\n" << report.csv_row() << "\n";
            else out << report.table();
            return 0;
        }

        Engine engine{fs::path(workspace)};
        auto snap = [&] { return engine.snapshot(); };

        if (name == "load-ontology") {
            auto warnings = engine.load_ontology(read_input(file));
            for (const auto &w : warnings) err << "warning: " << w << "\n";
            auto s = snap();
            if (json) {
                emit(out, Json{{"classes", s.ontology->class_count()},
                               {"properties", s.ontology->property_count()},
                               {"triples", s.ontology->triples().size()},
                               {"warnings", warnings}});
            } else {
                out << s.ontology->triples().size() << " triples, " << s.ontology->class_count() << " classes, "
                    << s.ontology->property_count() << " properties\n";
            }
            return 0;
        }
        if (name == "classify") {
            engine.classify();
            auto s = snap();
            if (json) {
                emit(out, Json{{"classified", true},
                               {"classes", s.ontology->class_count()},
                               {"subclass_edges", s.ontology->subclass_edge_count()}});
            } else {
                out << "classified " << s.ontology->class_count() << " classes\n";
            }
            return 0;
        }
        if (name == "register") {
            std::vector<fs::path> files;
            if (fs::is_directory(file)) {
                for (const auto &e : fs::directory_iterator(file)) {
                    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
                }
                std::sort(files.begin(), files.end());
            } else {
                files.emplace_back(file);
            }
            std::vector<ServiceProfile> profiles;
            for (const auto &f : files) {
                const std::string text = read_input(f.string());
                try {
                    auto ps = parse_profiles(text);
                    profiles.insert(profiles.end(), ps.begin(), ps.end());
                } catch (const ParseError &e) {
                    throw ParseError(e.line(), e.column(), f.string() + ": " + e.what());
                }
            }
            std::vector<std::string> ids;
            for (const auto &p : profiles) ids.push_back(p.id);
            auto diags = engine.register_services(std::move(profiles));
            print_diagnostics(err, diags);
            if (json) emit(out, Json{{"registered", ids}, {"diagnostics", diags}});
            else out << "registered " << ids.size() << " service(s)\n";
            return 0;
        }
        if (name == "deregister") {
            engine.deregister_service(file);
            if (json) emit(out, Json{{"deregistered", file}});
            return 0;
        }
        if (name == "discover") {
            DiscoveryQuery q;
            if (!file.empty()) q = decode<DiscoveryQuery>(read_json(file), "query");
            q.required_inputs.insert(q.required_inputs.end(), inputs.begin(), inputs.end());
            q.desired_outputs.insert(q.desired_outputs.end(), outputs.begin(), outputs.end());
            for (const auto &e : effects) q.desired_effects.push_back({e, {}});
            if (max_results) q.max_results = max_results;
            auto matches = engine.discover(q);
            if (json) emit(out, Json{{"matches", matches}});
            else print_matches(out, matches);
            return 0;
        }
        if (name == "new-session") {
            auto id = engine.create_session();
            if (json) emit(out, Json{{"id", id}});
            else out << id << "\n";
            return 0;
        }
        if (name == "show-session") {
            emit(out, Json(engine.view(session)));
            return 0;
        }
        if (name == "set-request") {
            auto diags = engine.set_request(session, decode<AbstractRequest>(read_json(file), "request"));
            print_diagnostics(err, diags);
            if (json) emit(out, Json{{"diagnostics", diags}});
            return std::any_of(diags.begin(), diags.end(), is_error) ? 1 : 0;
        }
        if (name == "invoke" || name == "import") {
            Response r = name == "invoke" ? engine.invoke(session, parse_invocation(read_json(file)))
                                          : engine.import_process(session, read_json(file));
            if (json) {
                emit(out, r);
            } else {
                print_diagnostics(err, r.diagnostics);
                print_matches(out, r.matches);
                print_suggestions(out, r.suggestions);
                if (r.verb == Verb::Plan) print_plans(out, r, 0);
            }
            return r.has_errors() ? 1 : 0;
        }
        if (name == "plan") {
            Scratch s(engine, session);
            engine.set_request(s.id, decode<AbstractRequest>(read_json(file), "request"));
            Json args{{"k", k}};
            if (!token.empty()) args["token"] = token;
            Response r = engine.invoke(s.id, {Verb::Plan, args});
            std::size_t first = 0;
            if (auto t = parse_token(token)) first = t->emitted;
            if (json) emit(out, r);
            else print_plans(out, r, first);
            return 0;
        }
        if (name == "verify") {
            Scratch s(engine, "");
            engine.import_process(s.id, read_json(file));
            if (!request_file.empty()) {
                engine.set_request(s.id, decode<AbstractRequest>(read_json(request_file), "request"));
            }
            Response r = engine.invoke(s.id, {Verb::VerifyDataflow, Json::object()});
            Json args = Json::object();
            if (!scope.empty()) args["scope"] = scope;
            Response c = engine.invoke(s.id, {Verb::VerifyControlflow, args});
            r.diagnostics.insert(r.diagnostics.end(), c.diagnostics.begin(), c.diagnostics.end());
            if (json) emit(out, Json{{"diagnostics", r.diagnostics}});
            else if (r.diagnostics.empty()) out << "no findings\n";
            else print_diagnostics(out, r.diagnostics);
            return r.has_errors() ? 1 : 0;
        }
        if (name == "suggest") {
            Scratch s(engine, "");
            if (!file.empty()) engine.import_process(s.id, read_json(file));
            if (!request_file.empty()) {
                engine.set_request(s.id, decode<AbstractRequest>(read_json(request_file), "request"));
            }
            std::vector<Suggestion> suggestions;
            std::vector<Diagnostic> diags;
            auto run = [&](Verb verb, Json args) {
                Response r = engine.invoke(s.id, {verb, std::move(args)});
                suggestions.insert(suggestions.end(), r.suggestions.begin(), r.suggestions.end());
                diags.insert(diags.end(), r.diagnostics.begin(), r.diagnostics.end());
            };
            if (kind == "conflicts") {
                Json args{{"service", service}, {"relation", relation}};
                if (!anchor.empty()) args["anchor"] = anchor;
                if (!outcome.empty()) args["outcome"] = outcome;
                run(Verb::DetectConflicts, args);
            } else {
                switch (parse_suggestion_kind(kind)) {
                case SuggestionKind::Consolidation:
                    if (!producer.empty() || !consumer.empty()) {
                        run(Verb::SuggestConsolidations, Json{{"producer", producer}, {"consumer", consumer}});
                    } else {
                        auto process = engine.view(s.id).process;
                        auto steps = step_sequence(process);
                        for (const auto &p : steps) {
                            for (const auto &c : steps) {
                                if (p != c && order_of(process, p, c) == StepOrder::Before) {
                                    run(Verb::SuggestConsolidations, Json{{"producer", p}, {"consumer", c}});
                                }
                            }
                        }
                    }
                    break;
                case SuggestionKind::Ordering: run(Verb::SuggestOrderings, Json::object()); break;
                case SuggestionKind::Insertion: run(Verb::SuggestInsertions, Json::object()); break;
                case SuggestionKind::Removal: run(Verb::SuggestRemovals, Json::object()); break;
                case SuggestionKind::Relaxation: run(Verb::Relax, Json::object()); break;
                }
            }
            if (json) {
                emit(out, Json{{"suggestions", suggestions}, {"diagnostics", diags}});
            } else {
                print_diagnostics(err, diags);
                if (suggestions.empty()) out << "no suggestions\n";
                print_suggestions(out, suggestions);
            }
            return std::any_of(diags.begin(), diags.end(), is_error) ? 1 : 0;
        }
        if (name == "export") {
            Json doc = read_json(file);
            Scratch s(engine, "");
            if (doc.contains("request") && !doc.at("request").is_null()) {
                engine.set_request(s.id, decode<AbstractRequest>(doc.at("request"), "request"));
            }
            engine.import_process(s.id, doc);
            Json result = engine.export_process(s.id, parse_export_format(format));
            if (output_file.empty()) {
                emit(out, result);
            } else {
                std::ofstream f(output_file, std::ios::binary | std::ios::trunc);
                if (!f) throw Error(ErrorCode::Io, "cannot write " + output_file);
                f << result.dump(2) << "\n";
            }
            return 0;
        }
        if (name == "serve") {
            HttpServer server(engine);
            int bound = server.bind(host, port);
            if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
            err << "listening on " << host << ":" << bound << std::endl;
            return server.listen_after_bind() ? 0 : 1;
        }
        err << app.help();
        return 2;
    } catch (const ParseError &e) {
        err << "parse error at " << e.line() << ":" << e.column() << ": " << e.what() << "\n";
        return 2;
    } catch (const Error &e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return e.code() == ErrorCode::Parse || e.code() == ErrorCode::Usage ? 2 : 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace semcomp
