#pragma once

// Synthetic domains and the three-phase timing harness (loading, semantic
// reasoning, request processing).

#include "semcomp/planner.hpp"
#include "semcomp/serialization.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semcomp {

struct OntologySpec {
    std::size_t classes = 12000;
    std::size_t max_depth = 12;
    std::size_t branching = 8;             // max children per class
    double extra_parent_probability = 0.3;  // chance of a second superclass
    std::size_t properties = 200;
    bool annotations = true;                // label + comment per class
    std::uint64_t seed = 1;
};

struct BenchConfig {
    OntologySpec ontology;
    std::optional<std::string> ontology_file;  // overrides `ontology`
    std::size_t services = 100;
    std::size_t max_inputs = 5;
    std::size_t max_outputs = 5;
    std::size_t vocabulary = 0;            // parameter classes drawn from this many classes; 0 = all
    std::size_t requests = 10;
    std::size_t adversarial_requests = 0;  // goals nothing can produce
    std::uint64_t request_seed = 7;
    std::size_t chain_length = 3;          // forward steps taken to draw a goal
    std::size_t k = 3;                     // plans per request; 0 = reachability only
    std::size_t extra_levels = 0;          // copied into every generated request
    std::size_t repetitions = 3;
    std::uint64_t service_seed = 3;
    // Untimed solution counts (minimal plans, plans up to level-off) stop here; 0 skips them.
    std::size_t count_cap = 1000;
    std::size_t count_work = 2000000;
    // Above 1, an extra pass runs the requests across this many threads; its times are reported apart.
    std::size_t threads = 1;  // backtracking steps per count; hitting it marks the count truncated

    // Throws Error(Usage) on a bad config.
    void validate() const;
};

BenchConfig parse_bench_config(const Json &j);
void to_json(Json &j, const BenchConfig &v);

struct BenchRequest {
    AbstractRequest request;
    bool unsatisfiable = false;  // drawn adversarially
};

struct GeneratedDomain {
    std::string ontology_text;  // triples syntax
    std::vector<ServiceProfile> services;
    std::vector<BenchRequest> requests;
    std::size_t triples = 0;
};

GeneratedDomain generate_domain(const BenchConfig &config);

struct PhaseStats {
    double median_ms = 0;
    double min_ms = 0;
    double max_ms = 0;
};

PhaseStats summarize(std::vector<double> samples);

struct RequestOutcome {
    std::size_t index = 0;
    bool unsatisfiable = false;
    bool reachable = false;
    std::size_t plans = 0;
    std::size_t levels = 0;
    std::size_t nodes = 0;
    std::size_t mutex_pairs = 0;
    double ms = 0;  // last repetition
    std::size_t minimal_plans = 0;       // all plans at the shortest layer count, up to count_cap
    std::size_t level_off_plans = 0;     // all plans no longer than the level-off level, up to count_cap
    bool counts_truncated = false;       // a count hit count_cap or count_work, so it is a lower bound
};

struct BenchReport {
    std::size_t services = 0;
    std::size_t classes = 0;
    std::size_t triples = 0;
    std::size_t requests = 0;
    std::size_t solutions = 0;  // plans found over all requests
    std::size_t solved = 0;     // requests with at least one plan (or reachable when k = 0)
    std::size_t minimal_solutions = 0;
    std::size_t level_off_solutions = 0;
    std::size_t truncated_counts = 0;
    PhaseStats load;
    PhaseStats reasoning;
    PhaseStats request;  // per repetition, all requests together
    std::size_t threads = 1;
    std::optional<PhaseStats> parallel_request;  // wall time of the threaded pass
    double total_ms = 0;
    std::vector<RequestOutcome> outcomes;

    std::string csv_header() const;
    std::string csv_row() const;
    std::string table() const;
};

void to_json(Json &j, const BenchReport &v);

BenchReport run_benchmark(const BenchConfig &config);
BenchReport run_benchmark(const BenchConfig &config, const GeneratedDomain &domain);

}  // namespace semcomp
