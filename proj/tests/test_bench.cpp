#include "semcomp/bench.hpp"
#include "semcomp/error.hpp"

#include <gtest/gtest.h>

using namespace semcomp;

namespace {

BenchConfig small() {
    BenchConfig c;
    c.ontology.classes = 800;
    c.ontology.properties = 20;
    c.ontology.seed = 11;
    c.services = 100;
    c.requests = 6;
    c.repetitions = 1;
    return c;
}

}  // namespace

TEST(Bench, GenerationIsDeterministic) {
    auto a = generate_domain(small());
    auto b = generate_domain(small());
    EXPECT_EQ(a.ontology_text, b.ontology_text);
    EXPECT_EQ(a.services, b.services);
    ASSERT_EQ(a.requests.size(), b.requests.size());
    for (std::size_t i = 0; i < a.requests.size(); ++i) EXPECT_EQ(a.requests[i].request, b.requests[i].request);

    auto other = small();
    other.service_seed = 99;
    EXPECT_NE(generate_domain(other).services, a.services);
}

TEST(Bench, ServiceShape) {
    auto cfg = small();
    auto d = generate_domain(cfg);
    ASSERT_EQ(d.services.size(), 100u);
    for (const auto &s : d.services) {
        EXPECT_GE(s.inputs.size(), 1u);
        EXPECT_LE(s.inputs.size(), cfg.max_inputs);
        EXPECT_GE(s.outputs.size(), 1u);
        EXPECT_LE(s.outputs.size(), cfg.max_outputs);
    }
    EXPECT_GT(d.triples, 800u);
}

TEST(Bench, SatisfiableRequestsAreSolved) {
    auto cfg = small();
    cfg.adversarial_requests = 2;
    auto report = run_benchmark(cfg);
    EXPECT_EQ(report.requests, 8u);
    for (const auto &o : report.outcomes) {
        if (o.unsatisfiable) {
            EXPECT_FALSE(o.reachable) << "request " << o.index;
            EXPECT_EQ(o.plans, 0u);
        } else {
            EXPECT_TRUE(o.reachable) << "request " << o.index;
            EXPECT_GE(o.plans, 1u) << "request " << o.index;
        }
    }
    EXPECT_EQ(report.solved, 6u);
    EXPECT_FALSE(report.csv_row().empty());
    EXPECT_NE(report.table().find("reasoning"), std::string::npos);
}

TEST(Bench, ReachabilityOnly) {
    auto cfg = small();
    cfg.k = 0;
    auto report = run_benchmark(cfg);
    EXPECT_EQ(report.solutions, 0u);
    EXPECT_EQ(report.solved, report.requests);
}

TEST(Bench, ConfigValidation) {
    auto cfg = small();
    cfg.services = 0;
    EXPECT_THROW(cfg.validate(), Error);
    auto j = Json(small());
    EXPECT_EQ(Json(parse_bench_config(j)), j);
    EXPECT_THROW(parse_bench_config(parse_json(R"({"services": -1})")), Error);
}

TEST(Bench, SolutionCounts) {
    auto cfg = small();
    cfg.vocabulary = 120;
    auto report = run_benchmark(cfg);
    for (const auto &o : report.outcomes) {
        if (!o.reachable) {
            EXPECT_EQ(o.minimal_plans, 0u);
            continue;
        }
        EXPECT_GE(o.minimal_plans, 1u);
        EXPECT_GE(o.level_off_plans, o.minimal_plans);
        EXPECT_LE(o.level_off_plans, cfg.count_cap);
    }
    auto j = Json(report);
    EXPECT_EQ(j.at("minimal_solutions").get<std::size_t>(), report.minimal_solutions);
    auto again = run_benchmark(cfg);
    EXPECT_EQ(again.minimal_solutions, report.minimal_solutions);
    EXPECT_EQ(again.level_off_solutions, report.level_off_solutions);
    EXPECT_EQ(again.truncated_counts, report.truncated_counts);

    cfg.count_cap = 0;
    auto skipped = run_benchmark(cfg);
    EXPECT_EQ(skipped.minimal_solutions, 0u);
    EXPECT_EQ(skipped.level_off_solutions, 0u);
}

TEST(Bench, ParallelPassIsSeparate) {
    auto cfg = small();
    cfg.count_cap = 0;
    auto serial = run_benchmark(cfg);
    EXPECT_FALSE(serial.parallel_request);
    cfg.threads = 4;
    auto par = run_benchmark(cfg);
    ASSERT_TRUE(par.parallel_request);
    EXPECT_GT(par.parallel_request->median_ms, 0);
    EXPECT_EQ(par.solutions, serial.solutions);
    EXPECT_TRUE(Json(par).contains("parallel_request"));
    cfg.threads = 0;
    EXPECT_THROW(cfg.validate(), Error);
}
