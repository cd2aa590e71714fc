#include "oracles.hpp"
#include "semcomp/error.hpp"
#include "semcomp/ontology.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace semcomp;

namespace {

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

OntologyStore store_from(std::string_view text, bool classify = true) {
    OntologyStore s;
    s.load(parse_ontology(text));
    if (classify) s.classify();
    return s;
}

const char *kChain = "<A> <rdfs:subClassOf> <B> .\n<B> <rdfs:subClassOf> <C> .\n";
const char *kDiamond =
    "<A> <rdfs:subClassOf> <B> .\n<A> <rdfs:subClassOf> <C> .\n"
    "<B> <rdfs:subClassOf> <D> .\n<C> <rdfs:subClassOf> <D> .\n";

}  // namespace

TEST(Ontology, EmptyDocumentOnlyBumpsVersion) {
    OntologyStore s;
    auto classes = s.class_count();
    auto v = s.version();
    s.load(OntologyDocument{});
    EXPECT_EQ(s.version(), v + 1);
    EXPECT_EQ(s.class_count(), classes);
    EXPECT_TRUE(s.triples().empty());
}

TEST(Ontology, ChainDocumentTriples) {
    auto s = store_from(kChain, false);
    EXPECT_EQ(s.subclass_edge_count(), 2u);
    for (auto c : {"A", "B", "C"}) EXPECT_TRUE(s.find_class(c).has_value()) << c;
    Triple t{"A", "rdfs:subClassOf", "B", false};
    EXPECT_NE(std::find(s.triples().begin(), s.triples().end(), t), s.triples().end());
}

TEST(Ontology, ChainClosureAndDistance) {
    auto s = store_from(kChain);
    EXPECT_TRUE(s.subsumes("C", "A"));
    EXPECT_FALSE(s.subsumes("A", "C"));
    EXPECT_TRUE(s.subsumes("A", "A"));
    auto m = s.match_degree("A", "C");
    EXPECT_EQ(m.degree, Degree::Plugin);
    EXPECT_EQ(m.distance, 2);
}

TEST(Ontology, DiamondShortestPath) {
    auto s = store_from(kDiamond);
    EXPECT_TRUE(s.subsumes("D", "A"));
    EXPECT_EQ(*s.distance(*s.find_class("D"), *s.find_class("A")), 2u);
    EXPECT_FALSE(s.subsumes("B", "C"));
    EXPECT_EQ(s.match_degree("B", "C").degree, Degree::Fail);
    EXPECT_EQ(s.match_degree("B", "C").distance, -1);
}

TEST(Ontology, SingleClassReflexive) {
    auto s = store_from("<A> <rdf:type> <owl:Class> .\n");
    auto a = *s.find_class("A");
    ASSERT_EQ(s.ancestors(a).size(), 1u);
    EXPECT_EQ(s.ancestors(a)[0].id, a);
    EXPECT_EQ(s.match_degree("A", "A"), (MatchDegree{Degree::Exact, 0}));
}

TEST(Ontology, UnrelatedPrimitives) {
    OntologyStore s;
    s.classify();
    EXPECT_FALSE(s.subsumes("String", "Integer"));
    EXPECT_TRUE(s.subsumes("BusinessObject", "BusinessObject"));
}

TEST(Ontology, PluginSubsumeInversion) {
    OntologyStore s;
    s.load(parse_ontology(read_file(SEMCOMP_FIXTURES "/purchase/ontology.json")));
    s.classify();
    auto fwd = s.match_degree("po:warehouse_address", "po:ship_to_location");
    auto back = s.match_degree("po:ship_to_location", "po:warehouse_address");
    EXPECT_EQ(fwd.degree, Degree::Plugin);
    EXPECT_EQ(fwd.distance, 1);
    EXPECT_EQ(back.degree, Degree::Subsume);
    EXPECT_EQ(back.distance, 1);
}

TEST(Ontology, ClassifyIsIdempotent) {
    auto s = store_from(kDiamond);
    std::vector<std::vector<std::pair<ClassId, std::uint32_t>>> before;
    for (ClassId c = 0; c < s.class_count(); ++c) {
        auto &row = before.emplace_back();
        for (auto a : s.ancestors(c)) row.emplace_back(a.id, a.distance);
    }
    auto v = s.version();
    s.classify();
    EXPECT_EQ(s.version(), v);
    for (ClassId c = 0; c < s.class_count(); ++c) {
        std::vector<std::pair<ClassId, std::uint32_t>> row;
        for (auto a : s.ancestors(c)) row.emplace_back(a.id, a.distance);
        EXPECT_EQ(row, before[c]);
    }
}

TEST(Ontology, StaleClosureAndUnknownClass) {
    auto s = store_from(kChain);
    try {
        s.subsumes("A", "Nope");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownClass);
    }
    s.load(parse_ontology("<D> <rdfs:subClassOf> <C> .\n"));
    EXPECT_FALSE(s.is_classified());
    try {
        s.subsumes("C", "A");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::StaleClosure);
    }
    s.classify();
    EXPECT_TRUE(s.subsumes("C", "D"));
}

TEST(Ontology, ClassPropertyClashRejectedWithoutChange) {
    auto s = store_from(kChain);
    auto v = s.version();
    auto n = s.triples().size();
    try {
        s.load(parse_ontology("<A> <rdf:type> <rdf:Property> .\n"));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Conflict);
    }
    EXPECT_EQ(s.version(), v);
    EXPECT_EQ(s.triples().size(), n);
    EXPECT_TRUE(s.is_classified());
}

TEST(Ontology, InertVocabularyWarns) {
    auto s = store_from("<A> <owl:equivalentClass> <B> .\n<A> <rdfs:subClassOf> <C> .\n");
    ASSERT_EQ(s.warnings().size(), 1u);
    EXPECT_NE(s.warnings()[0].find("owl:equivalentClass"), std::string::npos);
    EXPECT_FALSE(s.find_class("B").has_value());
}

TEST(Ontology, CycleToleratedWithWarning) {
    auto s = store_from("<A> <rdfs:subClassOf> <B> .\n<B> <rdfs:subClassOf> <A> .\n");
    EXPECT_TRUE(s.subsumes("A", "B"));
    EXPECT_TRUE(s.subsumes("B", "A"));
    ASSERT_EQ(s.warnings().size(), 1u);
    EXPECT_NE(s.warnings()[0].find("cycle"), std::string::npos);
}

TEST(Ontology, TripleParseErrorPosition) {
    try {
        parse_triples("<A> <rdfs:subClassOf> <B> .\n<A> <rdfs:subClassOf> .\n");
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_GE(e.column(), 1u);
    }
    EXPECT_THROW(parse_triples("<A> <b> \"unterminated .\n"), ParseError);
    EXPECT_THROW(parse_structured("{\"classes\": [ {\"iri\": 3} ]}"), Error);
}

TEST(Ontology, FullIrisCanonicalized) {
    auto s = store_from(
        "<http://ex/A> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://ex/B> .\n");
    EXPECT_TRUE(s.subsumes("http://ex/B", "http://ex/A"));
}

TEST(Ontology, RfqFixtureAndProperties) {
    auto s = store_from(read_file(SEMCOMP_FIXTURES "/rfq/ontology.ttl"));
    EXPECT_TRUE(s.subsumes("po:BusinessDocument", "po:DetailedQuote"));
    EXPECT_TRUE(s.subsumes("po:OrderStatus", "po:Submitted"));
    auto p = s.find_property("po:order");
    ASSERT_TRUE(p);
    EXPECT_EQ(s.property(*p).range, std::optional<std::string>("po:Order"));
    EXPECT_TRUE(s.property_subsumes("po:order", "po:order"));
    EXPECT_TRUE(s.warnings().empty());
}

TEST(Ontology, StructuredAndTripleFormsAgree) {
    auto structured = store_from(read_file(SEMCOMP_FIXTURES "/purchase/ontology.json"));
    auto text = to_triples_text(parse_ontology(read_file(SEMCOMP_FIXTURES "/purchase/ontology.json")));
    auto triples = store_from(text);
    EXPECT_EQ(structured.triples(), triples.triples());
    EXPECT_TRUE(triples.subsumes("po:Location", "po:warehouse_address"));
}

TEST(Ontology, SubclassChainIsShortest) {
    auto s = store_from(kDiamond);
    auto chain = s.subclass_chain(*s.find_class("A"), *s.find_class("D"));
    ASSERT_EQ(chain.size(), 3u);
    EXPECT_EQ(chain.front(), "A");
    EXPECT_EQ(chain[1], "B");  // ties by iri
    EXPECT_EQ(chain.back(), "D");
}

TEST(OntologyProperty, RandomDagsMatchBruteForce) {
    std::mt19937_64 rng(0x5eed);
    for (int round = 0; round < 20; ++round) {
        const std::size_t n = 200;
        auto edges = oracle::random_dag(rng, n, 0.02);
        OntologyDocument doc;
        for (std::size_t i = 0; i < n; ++i)
            doc.triples.push_back({"K" + std::to_string(i), "rdf:type", "owl:Class", false});
        for (auto [c, p] : edges)
            doc.triples.push_back({"K" + std::to_string(c), "rdfs:subClassOf", "K" + std::to_string(p), false});
        OntologyStore s;
        s.load(doc);
        s.classify();
        auto dist = oracle::floyd_warshall(n, edges);
        std::vector<ClassId> ids(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = *s.find_class("K" + std::to_string(i));
        std::size_t mismatches = 0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                bool expect = dist[a][b] < oracle::kInf;
                if (s.subsumes(ids[b], ids[a]) != expect) ++mismatches;
                auto d = s.distance(ids[b], ids[a]);
                if (expect && (!d || int(*d) != dist[a][b])) ++mismatches;
                if (a != b) {
                    auto ab = s.match_degree(ids[a], ids[b]).degree;
                    auto ba = s.match_degree(ids[b], ids[a]).degree;
                    if ((ab == Degree::Plugin) != (ba == Degree::Subsume)) ++mismatches;
                }
            }
        }
        EXPECT_EQ(mismatches, 0u) << "round " << round;
    }
}
