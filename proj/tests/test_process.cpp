#include "semcomp/error.hpp"
#include "semcomp/process.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace semcomp;

namespace {

Step step(std::string id, std::string service = "Svc") {
    return Step{std::move(id), std::move(service), std::nullopt, Provenance::User};
}

CompositeProcess build(const std::vector<Edit> &edits) { return apply(CompositeProcess{}, Delta{edits}); }

edit::AddStep append(std::string id) { return {step(std::move(id)), {}}; }

edit::AddStep placed(std::string id, std::string anchor, Relation r) {
    return {step(std::move(id)), Placement{std::move(anchor), r}};
}

}  // namespace

TEST(Process, AppendBuildsSequence) {
    auto p = build({append("s1"), append("s2"), append("s3")});
    EXPECT_EQ(step_sequence(p), (std::vector<std::string>{"s1", "s2", "s3"}));
    EXPECT_EQ(order_of(p, "s1", "s3"), StepOrder::Before);
    EXPECT_EQ(order_of(p, "s3", "s1"), StepOrder::After);
    EXPECT_TRUE(invariant_violations(p).empty());
}

TEST(Process, PlacementRelations) {
    auto p = build({append("s1"), placed("s2", "s1", Relation::Before), placed("s3", "s1", Relation::ParallelWith),
                    placed("s4", "s3", Relation::After)});
    // s2, Parallel(s1, Sequence(s3, s4))
    EXPECT_EQ(step_sequence(p), (std::vector<std::string>{"s2", "s1", "s3", "s4"}));
    EXPECT_EQ(order_of(p, "s2", "s1"), StepOrder::Before);
    EXPECT_EQ(order_of(p, "s1", "s3"), StepOrder::Unordered);
    EXPECT_EQ(order_of(p, "s1", "s4"), StepOrder::Unordered);
    EXPECT_EQ(order_of(p, "s3", "s4"), StepOrder::Before);
    ASSERT_EQ(p.control.children.size(), 2u);
    EXPECT_EQ(p.control.children[1].kind, ControlNode::Kind::Parallel);
}

TEST(Process, OrderAndParallelizeAreInverse) {
    auto p = build({append("s1"), append("s2")});
    auto par = apply(p, Delta{{edit::Parallelize{"s1", "s2"}}});
    EXPECT_EQ(order_of(par, "s1", "s2"), StepOrder::Unordered);
    auto seq = apply(par, Delta{{edit::Order{"s1", "s2"}}});
    EXPECT_EQ(seq, p);
    EXPECT_THROW(apply(p, Delta{{edit::Order{"s2", "s1"}}}), Error);
    EXPECT_EQ(apply(p, Delta{{edit::Order{"s1", "s2"}}}), p);
}

TEST(Process, ParallelizeNeedsAdjacency) {
    auto p = build({append("s1"), append("s2"), append("s3")});
    try {
        apply(p, Delta{{edit::Parallelize{"s1", "s3"}}});
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Precondition);
    }
}

TEST(Process, ChoiceIsExclusive) {
    CompositeProcess p;
    p.steps = {{"s1", step("s1")}, {"s2", step("s2")}, {"s3", step("s3")}};
    p.control = ControlNode::sequence(
        {ControlNode::leaf("s1"), ControlNode::choice({ControlNode::leaf("s2"), ControlNode::leaf("s3")})});
    normalize(p);
    EXPECT_EQ(order_of(p, "s2", "s3"), StepOrder::Exclusive);
    EXPECT_EQ(order_of(p, "s1", "s3"), StepOrder::Before);
    EXPECT_THROW(apply(p, Delta{{edit::Order{"s2", "s3"}}}), Error);
}

TEST(Process, NormalizeFlattensAndCollapses) {
    CompositeProcess p;
    p.steps = {{"s1", step("s1")}, {"s2", step("s2")}, {"s3", step("s3")}};
    p.control = ControlNode::sequence(
        {ControlNode::sequence({ControlNode::leaf("s1"), ControlNode::parallel({ControlNode::leaf("s2")})}),
         ControlNode::parallel({}), ControlNode::leaf("s3")});
    normalize(p);
    ASSERT_EQ(p.control.children.size(), 3u);
    for (const auto &c : p.control.children) EXPECT_TRUE(c.is_step());

    CompositeProcess q;
    q.steps = {{"s1", step("s1")}};
    q.control = ControlNode::leaf("s1");  // non-sequence root gets wrapped
    normalize(q);
    EXPECT_EQ(q.control.kind, ControlNode::Kind::Sequence);
}

TEST(Process, ConsolidationRules) {
    auto p = build({append("s1"), append("s2")});
    Consolidation link{"s1", "out", "s2", "in", Provenance::User};
    auto linked = apply(p, Delta{{edit::AddConsolidation{link}}});
    ASSERT_NE(linked.feeding("s2", "in"), nullptr);
    EXPECT_THROW(apply(linked, Delta{{edit::AddConsolidation{{"s1", "other", "s2", "in"}}}}), Error);
    EXPECT_THROW(apply(p, Delta{{edit::AddConsolidation{{"s1", "out", "s1", "in"}}}}), Error);
    EXPECT_THROW(apply(p, Delta{{edit::AddConsolidation{{"s9", "out", "s2", "in"}}}}), Error);
    EXPECT_EQ(apply(linked, Delta{{edit::RemoveConsolidation{"s2", "in"}}}), p);
    EXPECT_THROW(apply(p, Delta{{edit::RemoveConsolidation{"s2", "in"}}}), Error);

    auto removed = apply(linked, Delta{{edit::RemoveStep{"s1"}}});
    EXPECT_TRUE(removed.consolidations.empty());
    EXPECT_EQ(step_sequence(removed), (std::vector<std::string>{"s2"}));
}

TEST(Process, ApplyIsAtomicAndPure) {
    auto p = build({append("s1")});
    auto copy = p;
    EXPECT_THROW(apply(p, Delta{{append("s2"), append("s1")}}), Error);
    EXPECT_EQ(p, copy);
}

TEST(Process, SetOutcomeAndReplace) {
    auto p = build({append("s1")});
    auto q = apply(p, Delta{{edit::SetOutcome{"s1", std::string("approved")}}});
    EXPECT_EQ(q.steps.at("s1").outcome, std::optional<std::string>("approved"));
    EXPECT_THROW(apply(p, Delta{{edit::SetOutcome{"s7", std::nullopt}}}), Error);
    EXPECT_EQ(apply(q, Delta{{edit::ReplaceProcess{p}}}), p);
}

TEST(Process, InvariantViolationsDetected) {
    CompositeProcess p;
    p.steps = {{"s1", step("s1")}, {"s2", step("s2")}};
    p.control = ControlNode::sequence({ControlNode::leaf("s1"), ControlNode::leaf("s1"), ControlNode::leaf("s3")});
    p.consolidations = {{"s1", "o", "s2", "i"}, {"s1", "p", "s2", "i"}};
    auto v = invariant_violations(p);
    auto has = [&](std::string_view needle) {
        return std::any_of(v.begin(), v.end(), [&](const std::string &s) { return s.find(needle) != std::string::npos; });
    };
    EXPECT_TRUE(has("unknown step s3"));
    EXPECT_TRUE(has("more than once"));
    EXPECT_TRUE(has("missing from control tree"));
    EXPECT_TRUE(has("fed more than once"));
}

TEST(Process, NextStepId) {
    EXPECT_EQ(next_step_id(CompositeProcess{}), "s1");
    auto p = build({append("s1"), append("s7"), append("custom")});
    EXPECT_EQ(next_step_id(p), "s8");
    EXPECT_EQ(next_step_id(p, 2), "s10");
}

// Random edit scripts keep the structural invariants.
TEST(ProcessProperty, RandomEditsPreserveInvariants) {
    std::mt19937_64 rng(42);
    for (int round = 0; round < 200; ++round) {
        CompositeProcess p;
        for (int i = 0; i < 25; ++i) {
            auto ids = step_sequence(p);
            std::uniform_int_distribution<int> op(0, 5);
            auto pick = [&]() { return ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)]; };
            Edit e = append(next_step_id(p));
            int which = ids.empty() ? 0 : op(rng);
            switch (which) {
            case 0: break;
            case 1: e = placed(next_step_id(p), pick(), Relation(std::uniform_int_distribution<int>(1, 3)(rng))); break;
            case 2: e = edit::RemoveStep{pick()}; break;
            case 3: e = edit::AddConsolidation{{pick(), "o", pick(), "i" + std::to_string(i % 3)}}; break;
            case 4: e = edit::Order{pick(), pick()}; break;
            case 5: e = edit::Parallelize{pick(), pick()}; break;
            }
            try {
                p = apply(p, Delta{{e}});
            } catch (const Error &err) {
                EXPECT_EQ(err.code(), ErrorCode::Precondition);
            }
            auto v = invariant_violations(p);
            ASSERT_TRUE(v.empty()) << v.front();
            auto again = p;
            normalize(again);
            ASSERT_EQ(again, p);
        }
    }
}
