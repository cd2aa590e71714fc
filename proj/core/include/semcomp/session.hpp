#pragma once

// Engine state shared by every client (ontology, registry) plus per-user
// working contexts. Ontology and registry are replaced wholesale on each
// mutation, so readers keep consistent snapshots for as long as they hold
// them. Sessions serialize their own operations; different sessions run in
// parallel.

#include "semcomp/assist.hpp"
#include "semcomp/serialization.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace semcomp {

enum class Verb {
    Discover,
    Producers,
    Successors,
    SuggestConsolidations,
    CompleteDataflow,
    VerifyDataflow,
    SuggestOrderings,
    VerifyControlflow,
    DetectConflicts,
    SuggestInsertions,
    SuggestRemovals,
    Plan,
    Relax,
    ApplySuggestion,
    DismissSuggestion,
    Undo,
    EditProcess,
};

std::string_view to_string(Verb verb);
// Case-insensitive; '_' and '-' are ignored ("suggest_insertions" works).
Verb parse_verb(std::string_view text);

struct MixedInitiativeRequest {
    Verb verb = Verb::VerifyDataflow;
    Json args = Json::object();
};

MixedInitiativeRequest parse_invocation(const Json &j);

struct Response {
    Verb verb = Verb::VerifyDataflow;
    std::vector<ServiceMatch> matches;
    std::vector<Suggestion> suggestions;
    std::vector<Diagnostic> diagnostics;
    std::vector<Plan> plans;
    std::optional<std::string> token;
    bool exhausted = false;
    std::optional<Delta> delta;                 // what changed the process, if anything did
    std::optional<CompositeProcess> process;    // process after a change
    std::optional<AbstractRequest> request;     // request after a change

    bool has_errors() const;
};

void to_json(Json &j, const Response &v);

// Read-only copy of a working context.
struct ContextView {
    std::string id;
    std::optional<AbstractRequest> request;
    CompositeProcess process;
    std::vector<Suggestion> pending;
    std::vector<Delta> history;
    bool cached_plans = false;
    std::optional<std::string> token;
    std::vector<Diagnostic> diagnostics;  // current verification findings
};

void to_json(Json &j, const ContextView &v);

enum class ExportFormat { ProfileBundle, PlanReport };
ExportFormat parse_export_format(std::string_view text);

// The composite as a composable element: inputs no consolidation feeds and
// outputs nothing consumes, named "<step>.<param>".
ServiceProfile composite_profile(const CompositeProcess &process, const Registry &registry,
                                 const std::string &id);

// Accepts a profile bundle ({"process": ...}) or a bare process document.
CompositeProcess import_process_document(const Json &document);

// Rebuilds a process by replaying deltas from the empty process.
CompositeProcess replay(const std::vector<Delta> &history);

class Engine {
public:
    Engine();
    ~Engine();

    // Binds the engine to a workspace directory: existing ontologies,
    // profiles and sessions are loaded, and later changes are written back.
    explicit Engine(std::filesystem::path workspace);

    const std::optional<std::filesystem::path> &workspace() const { return workspace_; }

    Snapshot snapshot() const;

    // Parses, merges and (when persisting) stores the document text.
    std::vector<std::string> load_ontology(std::string_view text);
    void load_ontology(const OntologyDocument &document);
    void classify();

    std::vector<Diagnostic> register_service(ServiceProfile profile);
    // All-or-nothing batch; a duplicate id rejects the whole batch.
    std::vector<Diagnostic> register_services(std::vector<ServiceProfile> profiles);
    void deregister_service(const std::string &id);
    std::vector<ServiceMatch> discover(const DiscoveryQuery &query) const;

    std::string create_session();
    std::vector<std::string> session_ids() const;
    // Forgets the session and removes its file.
    void discard_session(const std::string &session);
    ContextView view(const std::string &session) const;
    // Stores the request and re-verifies the current process against it.
    std::vector<Diagnostic> set_request(const std::string &session, AbstractRequest request);
    Response invoke(const std::string &session, const MixedInitiativeRequest &request);

    Json export_process(const std::string &session, ExportFormat format) const;
    // Replaces the session's process with the document's (logged, undoable).
    Response import_process(const std::string &session, const Json &document);

private:
    struct Context;
    std::shared_ptr<Context> context(const std::string &session) const;
    void persist(const Context &ctx) const;
    void persist_state() const;
    void open_workspace();

    mutable std::shared_mutex mutex_;
    std::shared_ptr<const OntologyStore> ontology_;
    std::shared_ptr<const Registry> registry_;
    std::map<std::string, std::shared_ptr<Context>> sessions_;
    std::size_t next_session_ = 1;
    std::size_t ontology_files_ = 0;
    std::optional<std::filesystem::path> workspace_;
};

}  // namespace semcomp
