#include "oracles.hpp"
#include "semcomp/error.hpp"
#include "semcomp/registry.hpp"
#include "semcomp/serialization.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace semcomp;

namespace {

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Rfq {
    OntologyStore ontology;
    Registry registry;

    Rfq() {
        ontology.load(parse_ontology(read_file(SEMCOMP_FIXTURES "/rfq/ontology.ttl")));
        ontology.classify();
    }
    void add(const std::string &file) {
        for (auto &p : parse_profiles(read_file(SEMCOMP_FIXTURES "/rfq/" + file)))
            registry.register_service(p, ontology);
    }
    void add(ServiceProfile p) { registry.register_service(std::move(p), ontology); }
};

ServiceProfile simple(std::string id, std::vector<std::string> ins, std::vector<std::string> outs) {
    ServiceProfile p;
    p.id = std::move(id);
    int i = 0;
    for (auto &t : ins) p.inputs.push_back({"in" + std::to_string(i++), t});
    i = 0;
    for (auto &t : outs) p.outputs.push_back({"out" + std::to_string(i++), t});
    return p;
}

std::vector<std::string> ids(const std::vector<ServiceMatch> &ms) {
    std::vector<std::string> out;
    for (auto &m : ms) out.push_back(m.service_id);
    return out;
}

}  // namespace

TEST(Registry, RegisterAndRetrieve) {
    Rfq f;
    f.add("quote_service.json");
    const auto &p = f.registry.get("QuoteService");
    ASSERT_EQ(p.inputs.size(), 1u);
    EXPECT_EQ(p.inputs[0].type, "po:RFQ");
    EXPECT_EQ(p.outputs[0].type, "po:Quote");
    ASSERT_EQ(p.effects.size(), 1u);  // implicit deterministic outcome
    EXPECT_EQ(p.effects[0].label, kDefaultOutcome);
    EXPECT_TRUE(f.registry.diagnostics("QuoteService").empty());
}

TEST(Registry, DuplicateLeavesRegistryUnchanged) {
    Rfq f;
    f.add("quote_service.json");
    auto v = f.registry.version();
    auto other = simple("QuoteService", {"po:Order"}, {});
    try {
        f.add(other);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Duplicate);
    }
    EXPECT_EQ(f.registry.version(), v);
    EXPECT_EQ(f.registry.get("QuoteService").inputs[0].type, "po:RFQ");
}

TEST(Registry, UndeclaredClassIsAWarning) {
    Rfq f;
    auto d = f.registry.register_service(simple("X", {"Foo"}, {"po:Quote"}), f.ontology);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].severity, Severity::Warning);
    EXPECT_EQ(d[0].kind, DiagnosticKind::UnresolvedReference);
    EXPECT_NE(f.registry.find("X"), nullptr);
}

TEST(Registry, DeregisterRemovesFromDiscovery) {
    Rfq f;
    f.add("quote_service.json");
    DiscoveryQuery q;
    q.desired_outputs = {"po:Quote"};
    EXPECT_EQ(f.registry.discover(q, f.ontology).size(), 1u);
    f.registry.deregister_service("QuoteService");
    EXPECT_TRUE(f.registry.discover(q, f.ontology).empty());
    try {
        f.registry.deregister_service("QuoteService");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownId);
    }
}

TEST(Registry, DiscoverExactBeforePlugin) {
    Rfq f;
    f.add(simple("PreciseQuoteService", {"po:RFQ"}, {"po:DetailedQuote"}));
    f.add("quote_service.json");
    DiscoveryQuery q;
    q.desired_outputs = {"po:Quote"};
    auto r = f.registry.discover(q, f.ontology);
    ASSERT_EQ(ids(r), (std::vector<std::string>{"QuoteService", "PreciseQuoteService"}));
    EXPECT_EQ(r[0].criteria[0].match.degree, Degree::Exact);
    EXPECT_EQ(r[1].criteria[0].match.degree, Degree::Plugin);
    EXPECT_EQ(r[1].criteria[0].match.distance, 1);
}

TEST(Registry, DiscoverEdgeCases) {
    Rfq f;
    DiscoveryQuery q;
    q.desired_outputs = {"po:Quote"};
    EXPECT_TRUE(f.registry.discover(q, f.ontology).empty());
    EXPECT_THROW(f.registry.discover(DiscoveryQuery{}, f.ontology), Error);

    // Supertype outputs are only a Subsume match: not a discovery result.
    f.add(simple("Vague", {}, {"po:BusinessDocument"}));
    EXPECT_TRUE(f.registry.discover(q, f.ontology).empty());
}

TEST(Registry, DiscoverInputCoverageAndFilters) {
    Rfq f;
    f.add("quote_service.json");
    f.add("order_service.json");
    DiscoveryQuery q;
    q.required_inputs = {"po:DetailedQuote"};
    EXPECT_EQ(ids(f.registry.discover(q, f.ontology)), (std::vector<std::string>{"OrderService"}));

    DiscoveryQuery cheap;
    cheap.nonfunctional_filters = {{"price", Comparator::Lt, 20.0}};
    EXPECT_EQ(ids(f.registry.discover(cheap, f.ontology)), (std::vector<std::string>{"QuoteService"}));
    DiscoveryQuery owner;
    owner.nonfunctional_filters = {{"owner", Comparator::Eq, std::string("purchasing")}};
    EXPECT_EQ(ids(f.registry.discover(owner, f.ontology)), (std::vector<std::string>{"OrderService"}));

    DiscoveryQuery effect;
    effect.desired_effects = {{"po:OrderStatus", {}}};
    EXPECT_EQ(ids(f.registry.discover(effect, f.ontology)), (std::vector<std::string>{"OrderService"}));

    DiscoveryQuery capped;
    capped.nonfunctional_filters = {{"price", Comparator::Gt, 0.0}};
    capped.max_results = 1;
    EXPECT_EQ(f.registry.discover(capped, f.ontology).size(), 1u);
}

TEST(Registry, ProducersOf) {
    Rfq f;
    f.add("quote_service.json");
    f.add("order_service.json");
    EXPECT_EQ(ids(f.registry.producers_of(std::string("po:Quote"), f.ontology)),
              (std::vector<std::string>{"QuoteService"}));
    EXPECT_EQ(ids(f.registry.producers_of(StatusPattern{"po:Submitted", {}}, f.ontology)),
              (std::vector<std::string>{"OrderService"}));
    EXPECT_TRUE(f.registry.producers_of(std::string("po:PriceList"), f.ontology).empty());
    EXPECT_THROW(f.registry.producers_of(std::string("po:Nothing"), f.ontology), Error);
}

TEST(Registry, SuccessorsOf) {
    Rfq f;
    f.add("quote_service.json");
    f.add("order_service.json");
    EXPECT_EQ(ids(f.registry.successors_of("QuoteService", f.ontology)),
              (std::vector<std::string>{"OrderService"}));
    EXPECT_TRUE(f.registry.successors_of("OrderService", f.ontology).empty());
    EXPECT_THROW(f.registry.successors_of("Ghost", f.ontology), Error);

    f.add(simple("Premium", {"po:RFQ"}, {"po:DetailedQuote"}));
    auto r = f.registry.successors_of("Premium", f.ontology);
    ASSERT_EQ(ids(r), (std::vector<std::string>{"OrderService"}));
    EXPECT_EQ(r[0].criteria[0].match.degree, Degree::Plugin);
}

TEST(Registry, SuccessorViaPrecondition) {
    Rfq f;
    f.add("order_service.json");
    ServiceProfile approve;
    approve.id = "Approve";
    approve.preconditions = {{"po:Submitted", {}}};
    approve.effects = {{"approved", {{"po:Approved", {}}}, {{"po:Submitted", {}}}},
                       {"rejected", {{"po:Rejected", {}}}, {{"po:Submitted", {}}}}};
    f.add(approve);
    EXPECT_EQ(ids(f.registry.successors_of("OrderService", f.ontology)),
              (std::vector<std::string>{"Approve"}));
}

TEST(Registry, StaleOntologyRejected) {
    Rfq f;
    f.add("quote_service.json");
    f.ontology.load(parse_ontology("<po:Memo> <rdfs:subClassOf> <po:BusinessDocument> .\n"));
    DiscoveryQuery q;
    q.desired_outputs = {"po:Quote"};
    try {
        f.registry.discover(q, f.ontology);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::StaleClosure);
    }
}

// Brute-force scan with the toy domain's own closure as the oracle.
TEST(RegistryProperty, DiscoverMatchesBruteForce) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        const int n = 30;
        auto edges = oracle::random_dag(rng, n, 0.08);
        auto dist = oracle::floyd_warshall(n, edges);
        auto name = [](int i) { return "T" + std::to_string(i); };

        OntologyStore ontology;
        OntologyDocument doc;
        for (int i = 0; i < n; ++i) doc.triples.push_back({name(i), "rdf:type", "owl:Class", false});
        for (auto [c, p] : edges) doc.triples.push_back({name(c), "rdfs:subClassOf", name(p), false});
        ontology.load(doc);
        ontology.classify();

        std::uniform_int_distribution<int> cls(0, n - 1), count(0, 3), price(0, 100);
        struct Raw {
            std::vector<int> ins, outs;
            double price;
        };
        std::map<std::string, Raw> raw;
        Registry registry;
        for (int s = 0; s < 200; ++s) {
            Raw r;
            for (int i = count(rng); i > 0; --i) r.ins.push_back(cls(rng));
            for (int i = 1 + count(rng); i > 0; --i) r.outs.push_back(cls(rng));
            r.price = price(rng);
            std::vector<std::string> ins, outs;
            for (int c : r.ins) ins.push_back(name(c));
            for (int c : r.outs) outs.push_back(name(c));
            auto p = simple("s" + std::to_string(1000 + s), ins, outs);
            p.nonfunctional["price"] = r.price;
            registry.register_service(p, ontology);
            raw[p.id] = r;
        }

        for (int round = 0; round < 20; ++round) {
            DiscoveryQuery q;
            std::vector<int> desired, supplied;
            for (int i = 1 + count(rng) % 2; i > 0; --i) desired.push_back(cls(rng));
            if (round % 2) for (int i = 1 + count(rng); i > 0; --i) supplied.push_back(cls(rng));
            double cap = price(rng);
            for (int c : desired) q.desired_outputs.push_back(name(c));
            for (int c : supplied) q.required_inputs.push_back(name(c));
            if (round % 3 == 0) q.nonfunctional_filters = {{"price", Comparator::Le, cap}};

            std::set<std::string> expect;
            for (auto &[id, r] : raw) {
                bool ok = true;
                for (int d : desired) {
                    bool any = false;
                    for (int o : r.outs) any = any || dist[o][d] < oracle::kInf;
                    ok = ok && any;
                }
                if (!supplied.empty()) {
                    for (int in : r.ins) {
                        bool any = false;
                        for (int s : supplied) any = any || dist[s][in] < oracle::kInf;
                        ok = ok && any;
                    }
                }
                if (round % 3 == 0) ok = ok && r.price <= cap;
                if (ok) expect.insert(id);
            }
            auto got = registry.discover(q, ontology);
            auto got_ids = ids(got);
            EXPECT_EQ(std::set<std::string>(got_ids.begin(), got_ids.end()), expect)
                << "seed " << seed << " round " << round;
            EXPECT_EQ(got, registry.discover(q, ontology));
            for (std::size_t i = 1; i < got.size(); ++i) EXPECT_GE(got[i - 1].score, got[i].score);

            // producers_of agrees with a scan for the first desired class.
            std::set<std::string> producers;
            for (auto &[id, r] : raw)
                for (int o : r.outs)
                    if (dist[o][desired[0]] < oracle::kInf) producers.insert(id);
            auto p = ids(registry.producers_of(name(desired[0]), ontology));
            EXPECT_EQ(std::set<std::string>(p.begin(), p.end()), producers);
        }
    }
}
