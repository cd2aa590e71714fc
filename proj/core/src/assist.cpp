#include "assist_internal.hpp"

#include "semcomp/error.hpp"

#include <algorithm>
#include <set>

namespace semcomp {

std::string_view to_string(SuggestionKind kind) {
    switch (kind) {
    case SuggestionKind::Consolidation: return "consolidation";
    case SuggestionKind::Ordering: return "ordering";
    case SuggestionKind::Insertion: return "insertion";
    case SuggestionKind::Removal: return "removal";
    case SuggestionKind::Relaxation: return "relaxation";
    }
    return "consolidation";
}

SuggestionKind parse_suggestion_kind(std::string_view text) {
    for (auto k : {SuggestionKind::Consolidation, SuggestionKind::Ordering, SuggestionKind::Insertion,
                   SuggestionKind::Removal, SuggestionKind::Relaxation}) {
        if (to_string(k) == text) return k;
    }
    throw Error(ErrorCode::Parse, "unknown suggestion kind '" + std::string(text) + "'");
}

std::vector<DiagnosticKind> targeted_kinds(SuggestionKind kind) {
    switch (kind) {
    case SuggestionKind::Consolidation:
        return {DiagnosticKind::TypeMismatch, DiagnosticKind::UnsatisfiedPrecondition};
    case SuggestionKind::Ordering:
        return {DiagnosticKind::UnsatisfiedPrecondition, DiagnosticKind::MutexConflict};
    case SuggestionKind::Insertion: return {DiagnosticKind::UnsatisfiedPrecondition};
    case SuggestionKind::Removal: return {DiagnosticKind::DanglingStep};
    case SuggestionKind::Relaxation: return {};
    }
    return {};
}

std::size_t count_errors(const std::vector<Diagnostic> &diagnostics,
                         std::span<const DiagnosticKind> kinds) {
    return std::count_if(diagnostics.begin(), diagnostics.end(), [&](const Diagnostic &d) {
        return is_error(d) && std::find(kinds.begin(), kinds.end(), d.kind) != kinds.end();
    });
}

namespace detail {

std::string describe_chain(const OntologyStore &ontology, ClassId specific, ClassId general) {
    auto chain = ontology.subclass_chain(specific, general);
    std::string out;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (i) out += " subClassOf ";
        out += chain[i];
    }
    return out;
}

}  // namespace detail

namespace {

using detail::describe_chain;

bool better_match(const MatchDegree &a, const MatchDegree &b) {
    if (a.degree != b.degree) return a.degree < b.degree;
    return a.distance < b.distance;
}

std::string explain_link(const OntologyStore &onto, const Param &out, const Param &in,
                         const MatchDegree &m) {
    std::string head = "output '" + out.name + "' (" + out.type + ") -> input '" + in.name + "' (" +
                       in.type + "): ";
    auto o = onto.find_class(out.type);
    auto i = onto.find_class(in.type);
    switch (m.degree) {
    case Degree::Exact: return head + "same class";
    case Degree::Plugin: return head + "plugin match via " + describe_chain(onto, *o, *i);
    case Degree::Subsume:
        return head + "weak: the output is more general (" + describe_chain(onto, *i, *o) + ")";
    case Degree::Fail: break;
    }
    return head + "no match";
}

Suggestion consolidation_suggestion(const OntologyStore &onto, const std::string &producer,
                                    const Param &out, const std::string &consumer, const Param &in,
                                    const MatchDegree &m, Provenance provenance) {
    Suggestion s;
    s.kind = SuggestionKind::Consolidation;
    s.payload.edits.push_back(edit::AddConsolidation{{producer, out.name, consumer, in.name, provenance}});
    s.justification = producer + "." + out.name + " -> " + consumer + "." + in.name + ": " +
                      explain_link(onto, out, in, m);
    s.match = m;
    s.score.add(m);
    s.weak = m.degree == Degree::Subsume;
    return s;
}

const ServiceProfile *profile_of(const CompositeProcess &process, std::string_view step,
                                 const Registry &registry) {
    const Step *s = process.find_step(step);
    return s ? registry.find(s->service) : nullptr;
}

}  // namespace

std::vector<Suggestion> suggest_consolidations(const CompositeProcess &process,
                                               std::string_view producer,
                                               std::string_view consumer,
                                               const Snapshot &snapshot) {
    for (auto id : {producer, consumer}) {
        if (!process.find_step(id)) throw Error(ErrorCode::UnknownId, "unknown step '" + std::string(id) + "'");
    }
    const OntologyStore &onto = *snapshot.ontology;
    const ServiceProfile *prod = profile_of(process, producer, *snapshot.registry);
    const ServiceProfile *cons = profile_of(process, consumer, *snapshot.registry);
    if (!prod || !cons || producer == consumer) return {};

    std::vector<Suggestion> out;
    for (const auto &in : cons->inputs) {
        if (process.feeding(consumer, in.name)) continue;
        auto ic = onto.find_class(in.type);
        if (!ic) continue;
        for (const auto &o : prod->outputs) {
            auto oc = onto.find_class(o.type);
            if (!oc) continue;
            MatchDegree m = onto.match_degree(*oc, *ic);
            if (m.degree == Degree::Fail) continue;
            out.push_back(consolidation_suggestion(onto, std::string(producer), o,
                                                   std::string(consumer), in, m,
                                                   Provenance::SuggestedAccepted));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Suggestion &a, const Suggestion &b) {
        if (a.score != b.score) return a.score > b.score;
        const auto &la = std::get<edit::AddConsolidation>(a.payload.edits[0]).link;
        const auto &lb = std::get<edit::AddConsolidation>(b.payload.edits[0]).link;
        return std::tie(la.output, la.input) < std::tie(lb.output, lb.input);
    });
    return out;
}

Completion complete_dataflow(const CompositeProcess &process, const Snapshot &snapshot) {
    const OntologyStore &onto = *snapshot.ontology;
    const Registry &registry = *snapshot.registry;
    Completion result;
    const auto order = step_sequence(process);
    for (const auto &consumer : order) {
        const ServiceProfile *cons = profile_of(process, consumer, registry);
        if (!cons) continue;
        for (const auto &in : cons->inputs) {
            if (process.feeding(consumer, in.name)) continue;
            auto ic = onto.find_class(in.type);
            if (!ic) continue;
            struct Cand {
                std::string step;
                const Param *out;
                MatchDegree m;
            };
            std::vector<Cand> best;
            for (const auto &producer : order) {
                if (producer == consumer ||
                    order_of(process, producer, consumer) != StepOrder::Before) {
                    continue;
                }
                const ServiceProfile *prod = profile_of(process, producer, registry);
                if (!prod) continue;
                for (const auto &o : prod->outputs) {
                    auto oc = onto.find_class(o.type);
                    if (!oc) continue;
                    MatchDegree m = onto.match_degree(*oc, *ic);
                    if (!m.usable()) continue;
                    if (best.empty() || better_match(m, best.front().m)) {
                        best.assign(1, {producer, &o, m});
                    } else if (!better_match(best.front().m, m)) {
                        best.push_back({producer, &o, m});
                    }
                }
            }
            if (best.size() == 1) {
                auto s = consolidation_suggestion(onto, best[0].step, *best[0].out, consumer, in,
                                                  best[0].m, Provenance::AutoCompleted);
                result.delta.edits.push_back(s.payload.edits.front());
                result.applied.push_back(std::move(s));
            } else {
                for (const auto &c : best) {
                    auto s = consolidation_suggestion(onto, c.step, *c.out, consumer, in, c.m,
                                                      Provenance::SuggestedAccepted);
                    s.justification += " (tied with " + std::to_string(best.size() - 1) +
                                       " other candidate" + (best.size() > 2 ? "s" : "") + ")";
                    result.competing.push_back(std::move(s));
                }
            }
        }
    }
    result.process = result.delta.edits.empty() ? process : apply(process, result.delta);
    return result;
}

std::vector<Diagnostic> verify_dataflow(const CompositeProcess &process, const Snapshot &snapshot,
                                        const AbstractRequest *request) {
    const OntologyStore &onto = *snapshot.ontology;
    const Registry &registry = *snapshot.registry;
    std::vector<Diagnostic> out;
    for (const auto &c : process.consolidations) {
        const std::string loc = "consolidation:" + c.describe();
        const Step *ps = process.find_step(c.producer);
        const Step *cs = process.find_step(c.consumer);
        if (!ps || !cs) {
            out.push_back({Severity::Error, DiagnosticKind::UnresolvedReference, loc,
                           "consolidation names a step that is not in the process", {}});
            continue;
        }
        const ServiceProfile *prod = registry.find(ps->service);
        const ServiceProfile *cons = registry.find(cs->service);
        if (!prod || !cons) continue;  // reported as a dangling step
        const Param *o = prod->find_output(c.output);
        const Param *i = cons->find_input(c.input);
        if (!o || !i) {
            out.push_back({Severity::Error, DiagnosticKind::UnresolvedReference, loc,
                           std::string("no ") + (!o ? "output '" + c.output + "' on " + prod->id
                                                    : "input '" + c.input + "' on " + cons->id),
                           {}});
            continue;
        }
        auto oc = onto.find_class(o->type);
        auto ic = onto.find_class(i->type);
        if (!oc || !ic) {
            out.push_back({Severity::Warning, DiagnosticKind::WeakMatch, loc,
                           "cannot check types: '" + (!oc ? o->type : i->type) +
                               "' is not a known class",
                           {}});
            continue;
        }
        MatchDegree m = onto.match_degree(*oc, *ic);
        if (m.degree == Degree::Fail) {
            out.push_back({Severity::Error, DiagnosticKind::TypeMismatch, loc,
                           o->type + " is unrelated to " + i->type, {}});
        } else if (m.degree == Degree::Subsume) {
            out.push_back({Severity::Warning, DiagnosticKind::WeakMatch, loc,
                           explain_link(onto, *o, *i, m), {}});
        }
    }
    static const std::vector<std::string> no_inputs;
    const auto &available = request ? request->available_inputs : no_inputs;
    for (const auto &id : step_sequence(process)) {
        const ServiceProfile *cons = profile_of(process, id, registry);
        if (!cons) continue;
        for (const auto &in : cons->inputs) {
            if (process.feeding(id, in.name)) continue;
            if (best_usable_match(available, in.type, onto).usable()) continue;
            out.push_back({Severity::Warning, DiagnosticKind::UnboundInput, "input:" + id + "." + in.name,
                           "input '" + in.name + "' (" + in.type +
                               ") has no consolidation and no matching request input",
                           {}});
        }
    }
    return out;
}

namespace {

// `b` relies on something `a` produces: a consolidation, or an add of `a`
// that supports one of `b`'s needs.
bool depends(const Domain &domain, const CompositeProcess &process, const Step &a, const Step &b) {
    for (const auto &c : process.consolidations) {
        if (c.producer == a.id && c.consumer == b.id) return true;
    }
    for (ActionId x : detail::step_actions(domain, a)) {
        for (ActionId y : detail::step_actions(domain, b)) {
            for (PropId p : domain.actions()[x].adds) {
                for (ReqId r : domain.actions()[y].needs) {
                    if (domain.matches(p, r)) return true;
                }
            }
        }
    }
    return false;
}

void collect_parallelizable(const ControlNode &node, const CompositeProcess &process,
                            const Domain &domain, const Registry &registry,
                            std::vector<Suggestion> &out) {
    for (const auto &c : node.children) collect_parallelizable(c, process, domain, registry, out);
    if (node.kind != ControlNode::Kind::Sequence) return;
    for (std::size_t i = 0; i + 1 < node.children.size(); ++i) {
        std::vector<std::string> left, right;
        node.children[i].collect_steps(left);
        node.children[i + 1].collect_steps(right);
        if (left.empty() || right.empty()) continue;
        bool independent = true;
        for (const auto &l : left) {
            for (const auto &r : right) {
                const Step *a = process.find_step(l);
                const Step *b = process.find_step(r);
                if (!a || !b || !registry.find(a->service) || !registry.find(b->service) ||
                    depends(domain, process, *a, *b) || depends(domain, process, *b, *a) ||
                    !detail::step_conflict(domain, *a, *b).empty()) {
                    independent = false;
                    break;
                }
            }
            if (!independent) break;
        }
        if (!independent) continue;
        Suggestion s;
        s.kind = SuggestionKind::Ordering;
        s.payload.edits.push_back(edit::Parallelize{left.front(), right.front()});
        s.justification = left.front() + " and " + right.front() +
                          " share no data or status dependency and do not conflict; they can run "
                          "in parallel";
        out.push_back(std::move(s));
    }
}

}  // namespace

std::vector<Suggestion> suggest_orderings(const CompositeProcess &process,
                                          const Snapshot &snapshot,
                                          const AbstractRequest *request) {
    auto analysis = detail::analyse_flow(process, request, snapshot);
    const Domain &domain = *analysis.domain;
    const Registry &registry = *snapshot.registry;
    std::vector<Suggestion> candidates;

    const auto order = step_sequence(process);
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (order_of(process, order[i], order[j]) != StepOrder::Unordered) continue;
            const Step *a = process.find_step(order[i]);
            const Step *b = process.find_step(order[j]);
            if (!registry.find(a->service) || !registry.find(b->service)) continue;
            bool ab = depends(domain, process, *a, *b);
            bool ba = depends(domain, process, *b, *a);
            if (ab == ba) continue;
            const Step &first = ab ? *a : *b;
            const Step &second = ab ? *b : *a;
            Suggestion s;
            s.kind = SuggestionKind::Ordering;
            s.payload.edits.push_back(edit::Order{first.id, second.id});
            s.justification = second.id + " (" + second.service + ") depends on " + first.id + " (" +
                              first.service + "); run " + first.id + " first";
            candidates.push_back(std::move(s));
        }
    }
    // sequenced the wrong way round: move the producer in front of its consumer
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (order_of(process, order[i], order[j]) != StepOrder::Before) continue;
            const Step *early = process.find_step(order[i]);
            const Step *late = process.find_step(order[j]);
            if (!registry.find(early->service) || !registry.find(late->service)) continue;
            if (!depends(domain, process, *late, *early) || depends(domain, process, *early, *late)) continue;
            Delta delta{{edit::RemoveStep{late->id}, edit::AddStep{*late, Placement{early->id, Relation::Before}}}};
            for (const auto &c : process.consolidations) {
                if (c.producer == late->id || c.consumer == late->id) delta.edits.push_back(edit::AddConsolidation{c});
            }
            try {
                (void)apply(process, delta);
            } catch (const Error &) {
                continue;
            }
            Suggestion s;
            s.kind = SuggestionKind::Ordering;
            s.payload = std::move(delta);
            s.justification = early->id + " (" + early->service + ") needs what " + late->id + " (" +
                              late->service + ") provides but runs before it; move " + late->id +
                              " ahead of " + early->id;
            candidates.push_back(std::move(s));
        }
    }
    collect_parallelizable(process.control, process, domain, registry, candidates);

    const auto kinds = targeted_kinds(SuggestionKind::Ordering);
    std::vector<Suggestion> out;
    for (auto &s : candidates) {
        if (detail::no_worse(process, s.payload, kinds, request, snapshot)) out.push_back(std::move(s));
    }
    return out;
}

ConflictReport detect_conflicts(const CompositeProcess &process, std::string_view candidate,
                                const Placement &position,
                                const std::optional<std::string> &outcome,
                                const Snapshot &snapshot, const AbstractRequest *request) {
    const ServiceProfile &profile = snapshot.registry->get(candidate);
    if (outcome && !profile.find_effect(*outcome)) {
        throw Error(ErrorCode::Precondition,
                    "service '" + profile.id + "' has no outcome '" + *outcome + "'");
    }
    const Step step{next_step_id(process), profile.id, outcome, Provenance::User};
    const CompositeProcess placed = apply(process, Delta{{edit::AddStep{step, position}}});
    static const AbstractRequest none;
    auto domain = Domain::compile(snapshot.registry, snapshot.ontology, request ? *request : none, false);

    ConflictReport report;
    const std::vector<std::string> scope{step.id};
    const std::array<DiagnosticKind, 1> unsatisfied{DiagnosticKind::UnsatisfiedPrecondition};
    const std::size_t placed_unsatisfied = count_errors(verify_all(placed, request, snapshot), unsatisfied);

    for (const auto &other_id : step_sequence(placed)) {
        if (other_id == step.id || order_of(placed, step.id, other_id) != StepOrder::Unordered) continue;
        const Step &other = *placed.find_step(other_id);
        if (!snapshot.registry->find(other.service)) continue;
        std::string why = detail::step_conflict(*domain, step, other);
        if (why.empty()) continue;
        report.diagnostics.push_back({Severity::Error, DiagnosticKind::MutexConflict, "step:" + other_id,
                                      profile.id + " at the proposed position would run in parallel "
                                                   "with " + other_id + ", but " + why,
                                      {}});
        const bool exclusive = step.service == other.service && step.outcome && other.outcome &&
                               *step.outcome != *other.outcome;
        if (exclusive) continue;

        for (Relation rel : {Relation::After, Relation::Before}) {
            Delta delta{{edit::AddStep{step, Placement{other_id, rel}}}};
            CompositeProcess moved;
            try {
                moved = apply(process, delta);
            } catch (const Error &) {
                continue;
            }
            auto diags = verify_controlflow(moved, request, snapshot, scope);
            bool clash = std::any_of(diags.begin(), diags.end(), [](const Diagnostic &d) {
                return d.kind == DiagnosticKind::MutexConflict;
            });
            if (clash) continue;
            if (count_errors(verify_all(moved, request, snapshot), unsatisfied) > placed_unsatisfied) {
                continue;
            }
            Suggestion s;
            s.kind = SuggestionKind::Ordering;
            s.payload = std::move(delta);
            s.justification = "place " + profile.id + (rel == Relation::After ? " after " : " before ") +
                              other_id + " so the two no longer share a layer (" + why + ")";
            report.suggestions.push_back(std::move(s));
            break;
        }
    }
    return report;
}

namespace {

// Request-form pattern: parameter references become the parameter types.
StatusPattern request_form(const StatusPattern &pattern, const ServiceProfile &owner) {
    StatusPattern out{pattern.status_class, {}};
    for (const auto &[property, b] : pattern.bindings) {
        if (b.kind == Binding::Kind::Literal) {
            out.bindings[property] = b;
        } else if (const Param *p = owner.find_param(b.value)) {
            out.bindings[property] = {Binding::Kind::Reference, p->type};
        }
    }
    return out;
}

StatusPattern pattern_of(const Domain &domain, const Proposition &prop) {
    StatusPattern out{domain.ontology().class_iri(prop.type), {}};
    for (const auto &e : prop.signature) {
        out.bindings[e.property] = {e.literal ? Binding::Kind::Literal : Binding::Kind::Reference, e.value};
    }
    return out;
}

// Steps for the plan's actions, all placed before `anchor`, with dataflow
// filled from the best earlier inserted output.
Delta chain_delta(const CompositeProcess &process, const Plan &plan, const std::string &anchor,
                  const Snapshot &snapshot, std::vector<std::pair<std::string, const ServiceProfile *>> &added) {
    Delta delta;
    std::size_t offset = 0;
    std::vector<std::size_t> layer_of;
    for (std::size_t l = 0; l < plan.layers.size(); ++l) {
        for (const auto &ref : plan.layers[l]) {
            Step s{next_step_id(process, offset++), ref.service, ref.outcome, Provenance::SuggestedAccepted};
            added.push_back({s.id, &snapshot.registry->get(ref.service)});
            layer_of.push_back(l);
            delta.edits.push_back(edit::AddStep{s, Placement{anchor, Relation::Before}});
        }
    }
    const OntologyStore &onto = *snapshot.ontology;
    for (std::size_t c = 0; c < added.size(); ++c) {
        for (const auto &in : added[c].second->inputs) {
            auto ic = onto.find_class(in.type);
            if (!ic) continue;
            std::optional<std::tuple<MatchDegree, std::size_t, std::string>> best;
            for (std::size_t p = 0; p < added.size(); ++p) {
                if (layer_of[p] >= layer_of[c]) continue;
                for (const auto &o : added[p].second->outputs) {
                    auto oc = onto.find_class(o.type);
                    if (!oc) continue;
                    MatchDegree m = onto.match_degree(*oc, *ic);
                    if (!m.usable()) continue;
                    if (!best || better_match(m, std::get<0>(*best))) best = {m, p, o.name};
                }
            }
            if (best) {
                delta.edits.push_back(edit::AddConsolidation{{added[std::get<1>(*best)].first,
                                                              std::get<2>(*best), added[c].first, in.name,
                                                              Provenance::SuggestedAccepted}});
            }
        }
    }
    return delta;
}

}  // namespace

std::vector<Suggestion> suggest_insertions(const CompositeProcess &process,
                                           const AbstractRequest *request,
                                           const Snapshot &snapshot) {
    auto analysis = detail::analyse_flow(process, request, snapshot);
    const Domain &domain = *analysis.domain;
    const OntologyStore &onto = *snapshot.ontology;
    const Registry &registry = *snapshot.registry;
    const auto kinds = targeted_kinds(SuggestionKind::Insertion);
    const std::size_t before = count_errors(verify_all(process, request, snapshot), kinds);
    auto improves = [&](const Delta &delta) {
        CompositeProcess after;
        try {
            after = apply(process, delta);
        } catch (const Error &) {
            return false;
        }
        return invariant_violations(after, &registry).empty() &&
               count_errors(verify_all(after, request, snapshot), kinds) < before;
    };

    std::vector<Suggestion> out;
    std::set<std::string> seen_gaps;
    for (const auto &gap : analysis.gaps) {
        const ServiceProfile &consumer = registry.get(process.find_step(gap.step)->service);
        const std::string key = gap.step + "/" + (gap.input ? "i:" + gap.input_name : "p:" + gap.precondition.status_class);
        if (!seen_gaps.insert(key).second) continue;
        const std::string what = gap.input ? "input '" + gap.input_name + "' (" + gap.type + ") of " + gap.step
                                           : "status " + gap.precondition.status_class + " required by " + gap.step;
        std::vector<Suggestion> found;

        if (gap.input) {
            ClassId want = onto.require_class(gap.type);
            for (const auto &match : registry.producers_of(gap.type, onto)) {
                const ServiceProfile &p = registry.get(match.service_id);
                const Param *best = nullptr;
                MatchDegree bm;
                for (const auto &o : p.outputs) {
                    auto oc = onto.find_class(o.type);
                    if (!oc) continue;
                    MatchDegree m = onto.match_degree(*oc, want);
                    if (m.usable() && (!best || better_match(m, bm))) {
                        best = &o;
                        bm = m;
                    }
                }
                if (!best) continue;
                Step s{next_step_id(process), p.id, std::nullopt, Provenance::SuggestedAccepted};
                if (p.effects.size() == 1) s.outcome = p.effects.front().label;
                Suggestion sug;
                sug.kind = SuggestionKind::Insertion;
                sug.payload.edits.push_back(edit::AddStep{s, Placement{gap.step, Relation::Before}});
                sug.payload.edits.push_back(edit::AddConsolidation{
                    {s.id, best->name, gap.step, gap.input_name, Provenance::SuggestedAccepted}});
                sug.match = bm;
                sug.score.add(bm);
                sug.justification = "insert " + p.id + " before " + gap.step + " to supply " + what + ": " +
                                    explain_link(onto, *best, *consumer.find_input(gap.input_name), bm);
                if (improves(sug.payload)) found.push_back(std::move(sug));
            }
        } else {
            StatusPattern target = request_form(gap.precondition, consumer);
            for (const auto &match : registry.producers_of(StatusPattern{target.status_class, {}}, onto)) {
                const ServiceProfile &p = registry.get(match.service_id);
                // The outcome whose adds meet the requirement, so the status is guaranteed.
                Requirement req = domain.pattern_requirement(gap.precondition, &consumer);
                for (const auto &effect : p.effects) {
                    bool adds = std::any_of(effect.adds.begin(), effect.adds.end(), [&](const auto &a) {
                        auto prop = domain.pattern_proposition(a, &p);
                        return prop && domain.matches(*prop, req);
                    });
                    if (!adds) continue;
                    Step s{next_step_id(process), p.id, effect.label, Provenance::SuggestedAccepted};
                    Suggestion sug;
                    sug.kind = SuggestionKind::Insertion;
                    sug.payload.edits.push_back(edit::AddStep{s, Placement{gap.step, Relation::Before}});
                    sug.match = match.criteria.empty() ? MatchDegree{} : match.criteria.front().match;
                    sug.score = match.score;
                    sug.justification = "insert " + p.id + " (outcome '" + effect.label + "') before " +
                                        gap.step + " to establish " + what;
                    if (improves(sug.payload)) found.push_back(std::move(sug));
                }
            }
        }

        if (found.empty()) {
            // Multi-step closure: plan from what holds at the gap.
            AbstractRequest sub;
            for (PropId p = 0; p < gap.facts_before.size(); ++p) {
                if (!gap.facts_before[p]) continue;
                const auto &prop = domain.props()[p];
                if (prop.kind == PropKind::Avail) sub.available_inputs.push_back(onto.class_iri(prop.type));
                else sub.initial_statuses.push_back(pattern_of(domain, prop));
            }
            if (gap.input) sub.goal_outputs.push_back(gap.type);
            else sub.goal_statuses.push_back(request_form(gap.precondition, consumer));
            sub.horizon = std::min<std::size_t>(default_horizon(registry), 6);
            if (request) sub.nonfunctional_filters = request->nonfunctional_filters;
            auto graph = build_graph(sub, snapshot.registry, snapshot.ontology);
            PlanCursor cursor(graph);
            for (const auto &plan : cursor.next(1)) {
                if (plan.layers.empty()) continue;
                std::vector<std::pair<std::string, const ServiceProfile *>> added;
                Suggestion sug;
                sug.kind = SuggestionKind::Insertion;
                sug.payload = chain_delta(process, plan, gap.step, snapshot, added);
                if (gap.input) {
                    const Param *in = consumer.find_input(gap.input_name);
                    auto ic = onto.find_class(in->type);
                    std::optional<std::tuple<MatchDegree, std::string, std::string>> best;
                    for (auto it = added.rbegin(); it != added.rend(); ++it) {
                        for (const auto &o : it->second->outputs) {
                            auto oc = onto.find_class(o.type);
                            if (!oc || !ic) continue;
                            MatchDegree m = onto.match_degree(*oc, *ic);
                            if (m.usable() && (!best || better_match(m, std::get<0>(*best)))) {
                                best = {m, it->first, o.name};
                            }
                        }
                    }
                    if (best) {
                        sug.payload.edits.push_back(edit::AddConsolidation{
                            {std::get<1>(*best), std::get<2>(*best), gap.step, gap.input_name,
                             Provenance::SuggestedAccepted}});
                        sug.match = std::get<0>(*best);
                        sug.score.add(sug.match);
                    }
                }
                std::string names;
                for (const auto &[id, prof] : added) names += (names.empty() ? "" : ", ") + prof->id;
                sug.justification = "insert a " + std::to_string(added.size()) + "-step chain (" + names +
                                    ") before " + gap.step + " to supply " + what;
                if (improves(sug.payload)) found.push_back(std::move(sug));
            }
        }
        std::stable_sort(found.begin(), found.end(),
                         [](const Suggestion &a, const Suggestion &b) { return a.score > b.score; });
        for (auto &s : found) out.push_back(std::move(s));
    }
    return out;
}

std::vector<Suggestion> suggest_removals(const CompositeProcess &process, const Snapshot &snapshot) {
    std::vector<Suggestion> out;
    const auto kinds = targeted_kinds(SuggestionKind::Removal);
    for (const auto &id : step_sequence(process)) {
        const Step *s = process.find_step(id);
        if (!s || snapshot.registry->find(s->service)) continue;
        Suggestion sug;
        sug.kind = SuggestionKind::Removal;
        sug.payload.edits.push_back(edit::RemoveStep{id});
        sug.justification = "remove " + id + ": service '" + s->service + "' is no longer registered";
        if (detail::no_worse(process, sug.payload, kinds, nullptr, snapshot)) out.push_back(std::move(sug));
    }
    return out;
}

namespace {

struct GoalRef {
    bool output = true;
    std::size_t index = 0;
};

bool goal_supported(const PlanGraph &graph, const Requirement &req) {
    const Domain &d = graph.domain();
    for (PropId p : graph.props_at(graph.last_level())) {
        if (d.matches(d.props()[p], req)) return true;
    }
    return false;
}

Requirement goal_requirement(const Domain &d, const AbstractRequest &r, GoalRef g) {
    if (g.output) {
        const auto &iri = r.goal_outputs[g.index];
        return {PropKind::Avail, d.ontology().find_class(iri), iri, {}};
    }
    return d.pattern_requirement(r.goal_statuses[g.index], nullptr);
}

std::string goal_name(const AbstractRequest &r, GoalRef g) {
    return g.output ? r.goal_outputs[g.index] : "status " + r.goal_statuses[g.index].status_class;
}

std::vector<GoalRef> unreachable_refs(const PlanGraph &graph) {
    const Domain &d = graph.domain();
    const auto &r = d.request();
    std::vector<GoalRef> all, missing;
    for (std::size_t i = 0; i < r.goal_outputs.size(); ++i) all.push_back({true, i});
    for (std::size_t i = 0; i < r.goal_statuses.size(); ++i) all.push_back({false, i});
    for (auto g : all) {
        if (!goal_supported(graph, goal_requirement(d, r, g))) missing.push_back(g);
    }
    if (!missing.empty() || graph.goals_reachable_at(graph.last_level())) return missing;
    return all;  // every goal appears, but not together
}

bool still_missing(const AbstractRequest &revised, GoalRef g, const Snapshot &snapshot) {
    auto graph = build_graph(revised, snapshot.registry, snapshot.ontology);
    const Domain &d = graph->domain();
    if (!goal_supported(*graph, goal_requirement(d, revised, g))) return true;
    return false;
}

}  // namespace

std::vector<std::string> unreachable_goals(const PlanGraph &graph) {
    std::vector<std::string> out;
    for (auto g : unreachable_refs(graph)) out.push_back(goal_name(graph.domain().request(), g));
    return out;
}

std::vector<Suggestion> suggest_relaxations(const AbstractRequest &request, const PlanGraph &graph,
                                            const Snapshot &snapshot) {
    if (graph.goals_reachable_at(graph.last_level())) {
        throw Error(ErrorCode::Precondition, "the request's goals are reachable; nothing to relax");
    }
    const Domain &d = graph.domain();
    const OntologyStore &onto = *snapshot.ontology;
    const std::size_t goal_count = request.goal_outputs.size() + request.goal_statuses.size();
    std::vector<Suggestion> out;
    auto relaxation = [&](AbstractRequest revised, std::string why) {
        Suggestion s;
        s.kind = SuggestionKind::Relaxation;
        s.revised_request = std::move(revised);
        s.justification = std::move(why);
        out.push_back(std::move(s));
    };

    // Classes some unbuilt action still waits for: the frontier of inputs.
    std::set<std::string> frontier;
    const std::size_t last = graph.last_level();
    for (ActionId a = 0; a < d.actions().size(); ++a) {
        if (graph.has_action(a, last)) continue;
        for (ReqId r : d.actions()[a].needs) {
            const auto &req = d.requirements()[r];
            if (req.kind == PropKind::Avail && req.type && graph.supporters_at(r, last).empty()) {
                frontier.insert(req.type_iri);
            }
        }
    }

    for (auto g : unreachable_refs(graph)) {
        const std::string name = goal_name(request, g);
        const std::string &cls_iri = g.output ? request.goal_outputs[g.index]
                                              : request.goal_statuses[g.index].status_class;
        if (auto cls = onto.find_class(cls_iri)) {
            for (ClassId sup : onto.superclasses_by_distance(*cls)) {
                AbstractRequest revised = request;
                if (g.output) revised.goal_outputs[g.index] = onto.class_iri(sup);
                else revised.goal_statuses[g.index].status_class = onto.class_iri(sup);
                if (!goal_supported(graph, goal_requirement(d, revised, g))) continue;
                if (still_missing(revised, g, snapshot)) continue;
                relaxation(std::move(revised), "generalize goal " + name + " to its superclass " +
                                                   onto.class_iri(sup) + " (" +
                                                   describe_chain(onto, *cls, sup) + "), which is reachable");
                break;
            }
        }
        if (goal_count > 1) {
            AbstractRequest revised = request;
            if (g.output) revised.goal_outputs.erase(revised.goal_outputs.begin() + g.index);
            else revised.goal_statuses.erase(revised.goal_statuses.begin() + g.index);
            relaxation(std::move(revised), "drop goal " + name + ", which no composition reaches");
        }
        std::size_t offered = 0;
        for (const auto &candidate : frontier) {
            if (offered >= 5) break;
            if (std::find(request.available_inputs.begin(), request.available_inputs.end(), candidate) !=
                request.available_inputs.end()) {
                continue;
            }
            AbstractRequest revised = request;
            revised.available_inputs.push_back(candidate);
            // Relaxed check first (no mutexes, no deletes), then the real graph.
            std::vector<char> have(d.props().size(), 0);
            for (PropId p : graph.props_at(last)) have[p] = 1;
            auto extra = onto.find_class(candidate);
            auto need_met = [&](ReqId r) {
                const auto &req = d.requirements()[r];
                if (req.kind == PropKind::Avail && req.type && onto.subsumes(*req.type, *extra)) return true;
                for (PropId p : d.supporters(r)) {
                    if (have[p]) return true;
                }
                return false;
            };
            for (bool changed = true; changed;) {
                changed = false;
                for (const auto &action : d.actions()) {
                    if (!std::all_of(action.needs.begin(), action.needs.end(), need_met)) continue;
                    for (PropId p : action.adds) {
                        if (!have[p]) {
                            have[p] = 1;
                            changed = true;
                        }
                    }
                }
            }
            Requirement req = goal_requirement(d, request, g);
            bool relaxed = (req.kind == PropKind::Avail && req.type && onto.subsumes(*req.type, *extra));
            for (PropId p = 0; !relaxed && p < have.size(); ++p) {
                relaxed = have[p] && d.matches(d.props()[p], req);
            }
            if (!relaxed || still_missing(revised, g, snapshot)) continue;
            relaxation(std::move(revised), "supply " + candidate + " as an available input; " + name +
                                               " becomes reachable from it");
            ++offered;
        }
    }
    return out;
}

}  // namespace semcomp
