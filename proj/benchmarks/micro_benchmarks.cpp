#include "semcomp/assist.hpp"
#include "semcomp/bench.hpp"

#include <benchmark/benchmark.h>

using namespace semcomp;

namespace {

BenchConfig config_for(std::size_t classes, std::size_t services) {
    BenchConfig c;
    c.ontology.classes = classes;
    c.ontology.annotations = false;
    c.ontology.properties = 10;
    c.services = services;
    c.requests = 8;
    c.k = 3;
    c.repetitions = 1;
    return c;
}

const GeneratedDomain &domain_for(std::size_t classes, std::size_t services) {
    static std::map<std::pair<std::size_t, std::size_t>, GeneratedDomain> cache;
    auto key = std::make_pair(classes, services);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, generate_domain(config_for(classes, services))).first;
    return it->second;
}

void BM_Classify(benchmark::State &state) {
    const auto &d = domain_for(static_cast<std::size_t>(state.range(0)), 10);
    auto doc = parse_ontology(d.ontology_text);
    for (auto _ : state) {
        OntologyStore store;
        store.load(doc);
        store.classify();
        benchmark::DoNotOptimize(store.class_count());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Classify)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_Subsumes(benchmark::State &state) {
    const auto &d = domain_for(4000, 10);
    OntologyStore store;
    store.load(parse_ontology(d.ontology_text));
    store.classify();
    const auto n = static_cast<ClassId>(store.class_count());
    ClassId a = 1, b = 7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(store.subsumes(a, b));
        a = (a * 31 + 7) % n;
        b = (b * 17 + 3) % n;
    }
}
BENCHMARK(BM_Subsumes);

struct Loaded {
    std::shared_ptr<OntologyStore> onto = std::make_shared<OntologyStore>();
    std::shared_ptr<Registry> reg = std::make_shared<Registry>();
    const GeneratedDomain *domain = nullptr;
};

Loaded load(std::size_t services) {
    Loaded l;
    l.domain = &domain_for(3000, services);
    l.onto->load(parse_ontology(l.domain->ontology_text));
    l.onto->classify();
    for (const auto &p : l.domain->services) l.reg->register_service(p, *l.onto);
    return l;
}

void BM_Discover(benchmark::State &state) {
    auto l = load(static_cast<std::size_t>(state.range(0)));
    DiscoveryQuery q;
    q.desired_outputs = l.domain->requests.front().request.goal_outputs;
    for (auto _ : state) benchmark::DoNotOptimize(l.reg->discover(q, *l.onto));
}
BENCHMARK(BM_Discover)->Arg(100)->Arg(1000);

void BM_BuildGraph(benchmark::State &state) {
    auto l = load(static_cast<std::size_t>(state.range(0)));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto &r = l.domain->requests[i++ % l.domain->requests.size()].request;
        benchmark::DoNotOptimize(build_graph(r, l.reg, l.onto));
    }
}
BENCHMARK(BM_BuildGraph)->Arg(100)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ExtractPlans(benchmark::State &state) {
    auto l = load(static_cast<std::size_t>(state.range(0)));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto &r = l.domain->requests[i++ % l.domain->requests.size()].request;
        PlanCursor cursor(build_graph(r, l.reg, l.onto));
        benchmark::DoNotOptimize(cursor.next(3));
    }
}
BENCHMARK(BM_ExtractPlans)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
