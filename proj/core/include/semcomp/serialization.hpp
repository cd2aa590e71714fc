#pragma once

// JSON forms of the domain types (schemas in docs/formats.md). Decoding
// failures raise Error(Parse); malformed JSON text raises ParseError with
// the line and column of the offending byte.

#include "semcomp/assist.hpp"
#include "semcomp/error.hpp"
#include "semcomp/planner.hpp"
#include "semcomp/process.hpp"
#include "semcomp/registry.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace semcomp {

using Json = nlohmann::json;

Json parse_json(std::string_view text);

void to_json(Json &j, const MatchDegree &v);
void to_json(Json &j, const Binding &v);
void from_json(const Json &j, Binding &v);
void to_json(Json &j, const StatusPattern &v);
void from_json(const Json &j, StatusPattern &v);
void to_json(Json &j, const Param &v);
void from_json(const Json &j, Param &v);
void to_json(Json &j, const ConditionalEffect &v);
void from_json(const Json &j, ConditionalEffect &v);
Json literal_to_json(const Literal &v);
Literal literal_from_json(const Json &j);
void to_json(Json &j, const ServiceProfile &v);
void from_json(const Json &j, ServiceProfile &v);
void to_json(Json &j, const NonFunctionalFilter &v);
void from_json(const Json &j, NonFunctionalFilter &v);
void to_json(Json &j, const DiscoveryQuery &v);
void from_json(const Json &j, DiscoveryQuery &v);
void to_json(Json &j, const Score &v);
void to_json(Json &j, const ServiceMatch &v);
void to_json(Json &j, const Diagnostic &v);
void from_json(const Json &j, Diagnostic &v);

void to_json(Json &j, const AbstractRequest &v);
void from_json(const Json &j, AbstractRequest &v);
void to_json(Json &j, const ActionRef &v);
void from_json(const Json &j, ActionRef &v);
void to_json(Json &j, const Plan &v);
void from_json(const Json &j, Plan &v);

void to_json(Json &j, const Step &v);
void from_json(const Json &j, Step &v);
void to_json(Json &j, const ControlNode &v);
void from_json(const Json &j, ControlNode &v);
void to_json(Json &j, const Consolidation &v);
void from_json(const Json &j, Consolidation &v);
void to_json(Json &j, const CompositeProcess &v);
void from_json(const Json &j, CompositeProcess &v);
Json edit_to_json(const Edit &v);
Edit edit_from_json(const Json &j);
void to_json(Json &j, const Delta &v);
void from_json(const Json &j, Delta &v);

void to_json(Json &j, const Suggestion &v);
void from_json(const Json &j, Suggestion &v);

// Decodes with `what` prefixed to any schema error.
template <typename T>
T decode(const Json &j, std::string_view what) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::Parse, std::string(what) + ": " + e.what());
    }
}

// Profiles from a single profile document or a bundle {"services": [...]}.
std::vector<ServiceProfile> parse_profiles(std::string_view text);

std::string canonical(const Json &j);
std::uint64_t fingerprint(const CompositeProcess &process);
std::uint64_t request_hash(const AbstractRequest &request);
std::string hex64(std::uint64_t value);

}  // namespace semcomp

// Edit is a std::variant, so ADL does not reach the semcomp overloads.
template <>
struct nlohmann::adl_serializer<semcomp::Edit> {
    static void to_json(nlohmann::json &j, const semcomp::Edit &v) { j = semcomp::edit_to_json(v); }
    static semcomp::Edit from_json(const nlohmann::json &j) { return semcomp::edit_from_json(j); }
};
