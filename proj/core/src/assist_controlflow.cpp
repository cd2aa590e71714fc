#include "assist_internal.hpp"

#include "semcomp/error.hpp"

#include <algorithm>
#include <set>

namespace semcomp {

namespace detail {

std::vector<ActionId> step_actions(const Domain &domain, const Step &step) {
    std::vector<ActionId> out;
    const auto actions = domain.actions();
    auto it = std::lower_bound(actions.begin(), actions.end(), step.service,
                               [](const CompiledAction &a, const std::string &s) {
                                   return a.ref.service < s;
                               });
    for (; it != actions.end() && it->ref.service == step.service; ++it) {
        if (!step.outcome || it->ref.outcome == *step.outcome) {
            out.push_back(static_cast<ActionId>(it - actions.begin()));
        }
    }
    return out;
}

bool effects_conflict(const Domain &domain, ActionId a, ActionId b) {
    auto one_way = [&](const CompiledAction &x, const CompiledAction &y) {
        for (PropId p : x.deletes) {
            if (std::binary_search(y.adds.begin(), y.adds.end(), p)) return true;
            for (ReqId r : y.needs) {
                if (domain.matches(p, r)) return true;
            }
        }
        return false;
    };
    const auto &x = domain.actions()[a];
    const auto &y = domain.actions()[b];
    return one_way(x, y) || one_way(y, x);
}

std::string step_conflict(const Domain &domain, const Step &a, const Step &b) {
    if (a.service == b.service && a.outcome && b.outcome && *a.outcome != *b.outcome) {
        return "outcomes '" + *a.outcome + "' and '" + *b.outcome + "' of " + a.service +
               " exclude each other";
    }
    for (ActionId x : step_actions(domain, a)) {
        for (ActionId y : step_actions(domain, b)) {
            if (effects_conflict(domain, x, y)) {
                return domain.actions()[x].ref.describe() + " and " +
                       domain.actions()[y].ref.describe() +
                       " interfere (one deletes a status the other adds or needs)";
            }
        }
    }
    return {};
}

namespace {

struct State {
    std::vector<char> facts;
    std::set<std::string> done;
};

class Analyser {
public:
    Analyser(const CompositeProcess &process, const Snapshot &snapshot, FlowAnalysis &out)
        : process_(process), snapshot_(snapshot), out_(out), domain_(*out.domain) {}

    State visit(const ControlNode &node, State in, const std::string &branch) {
        switch (node.kind) {
        case ControlNode::Kind::Step: return visit_step(node.step, std::move(in), branch);
        case ControlNode::Kind::Sequence:
            for (const auto &c : node.children) in = visit(c, std::move(in), branch);
            return in;
        case ControlNode::Kind::Parallel: return visit_parallel(node, in, branch);
        case ControlNode::Kind::Choice: return visit_choice(node, in, branch);
        }
        return in;
    }

private:
    const std::vector<PropId> &step_deletes(const std::string &id) {
        auto it = deletes_.find(id);
        if (it != deletes_.end()) return it->second;
        std::vector<PropId> dels;
        if (const Step *s = process_.find_step(id)) {
            for (ActionId a : step_actions(domain_, *s)) {
                const auto d = domain_.actions()[a].deletes;
                dels.insert(dels.end(), d.begin(), d.end());
            }
        }
        std::sort(dels.begin(), dels.end());
        dels.erase(std::unique(dels.begin(), dels.end()), dels.end());
        return deletes_.emplace(id, std::move(dels)).first->second;
    }

    std::vector<char> subtree_deletes(const ControlNode &node) {
        std::vector<char> mask(domain_.props().size(), 0);
        std::vector<std::string> steps;
        node.collect_steps(steps);
        for (const auto &s : steps) {
            for (PropId p : step_deletes(s)) mask[p] = 1;
        }
        return mask;
    }

    void report(Severity sev, DiagnosticKind kind, std::string location, std::string text,
                const std::string &branch, std::vector<std::string> touches) {
        out_.findings.push_back(
            {{sev, kind, std::move(location), std::move(text), branch}, std::move(touches)});
    }

    bool met(const Requirement &req, const std::vector<char> &facts) const {
        for (PropId p = 0; p < facts.size(); ++p) {
            if (facts[p] && domain_.matches(domain_.props()[p], req)) return true;
        }
        return false;
    }

    State visit_step(const std::string &id, State in, const std::string &branch) {
        const Step *step = process_.find_step(id);
        if (!step) return in;
        out_.facts_before[id] = in.facts;
        const std::string where = "step:" + id;
        const ServiceProfile *profile = snapshot_.registry->find(step->service);
        if (!profile) {
            report(Severity::Error, DiagnosticKind::DanglingStep, where,
                   "service '" + step->service + "' is no longer registered", branch, {id});
            in.done.insert(id);
            return in;
        }
        auto actions = step_actions(domain_, *step);
        if (actions.empty()) {
            report(Severity::Error, DiagnosticKind::UnresolvedReference, where,
                   "service '" + step->service + "' has no outcome '" + step->outcome.value_or("") +
                       "'",
                   branch, {id});
            in.done.insert(id);
            return in;
        }

        for (const auto &input : profile->inputs) {
            const std::string loc = "input:" + id + "." + input.name;
            if (const Consolidation *c = process_.feeding(id, input.name)) {
                if (!in.done.contains(c->producer)) {
                    report(Severity::Error, DiagnosticKind::UnsatisfiedPrecondition, loc,
                           "input '" + input.name + "' is fed by " + c->producer +
                               ", which is not guaranteed to run before " + id,
                           branch, {id, c->producer});
                }
                continue;
            }
            Requirement req{PropKind::Avail, snapshot_.ontology->find_class(input.type), input.type, {}};
            if (!req.type) {
                report(Severity::Warning, DiagnosticKind::WeakMatch, loc,
                       "input type '" + input.type + "' is not a known class; availability unchecked",
                       branch, {id});
                continue;
            }
            if (!met(req, in.facts)) {
                report(Severity::Error, DiagnosticKind::UnsatisfiedPrecondition, loc,
                       "no " + input.type + " is guaranteed to be available for input '" +
                           input.name + "'",
                       branch, {id});
                Gap gap;
                gap.step = id;
                gap.input = true;
                gap.input_name = input.name;
                gap.type = input.type;
                gap.facts_before = in.facts;
                out_.gaps.push_back(std::move(gap));
            }
        }
        for (std::size_t i = 0; i < profile->preconditions.size(); ++i) {
            const auto &pre = profile->preconditions[i];
            const std::string loc = "precondition:" + id + "." + std::to_string(i);
            Requirement req = domain_.pattern_requirement(pre, profile);
            if (!req.type) {
                report(Severity::Warning, DiagnosticKind::WeakMatch, loc,
                       "status class '" + pre.status_class + "' is not a known class; unchecked",
                       branch, {id});
                continue;
            }
            if (!met(req, in.facts)) {
                report(Severity::Error, DiagnosticKind::UnsatisfiedPrecondition, loc,
                       "status " + pre.status_class + " is not guaranteed to hold before " + id,
                       branch, {id});
                Gap gap;
                gap.step = id;
                gap.input = false;
                gap.precondition = pre;
                gap.facts_before = in.facts;
                out_.gaps.push_back(std::move(gap));
            }
        }

        // Guaranteed adds hold under every possible outcome.
        std::vector<char> adds(domain_.props().size(), 1);
        for (ActionId a : actions) {
            std::vector<char> mine(domain_.props().size(), 0);
            for (PropId p : domain_.actions()[a].adds) mine[p] = 1;
            for (std::size_t p = 0; p < adds.size(); ++p) adds[p] = adds[p] && mine[p];
        }
        for (PropId p : step_deletes(id)) in.facts[p] = 0;
        for (std::size_t p = 0; p < adds.size(); ++p) {
            if (adds[p]) in.facts[p] = 1;
        }
        in.done.insert(id);
        return in;
    }

    State visit_parallel(const ControlNode &node, const State &in, const std::string &branch) {
        const std::size_t n = node.children.size();
        std::vector<std::vector<char>> dels;
        for (const auto &c : node.children) dels.push_back(subtree_deletes(c));
        auto others = [&](std::size_t i) {
            std::vector<char> mask(domain_.props().size(), 0);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                for (std::size_t p = 0; p < mask.size(); ++p) mask[p] = mask[p] || dels[j][p];
            }
            return mask;
        };
        State out;
        out.facts.assign(domain_.props().size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto mask = others(i);
            State child = in;
            for (std::size_t p = 0; p < mask.size(); ++p) {
                if (mask[p]) child.facts[p] = 0;
            }
            State res = visit(node.children[i], std::move(child), branch);
            for (std::size_t p = 0; p < mask.size(); ++p) {
                if (res.facts[p] && !mask[p]) out.facts[p] = 1;
            }
            out.done.insert(res.done.begin(), res.done.end());
        }
        return out;
    }

    State visit_choice(const ControlNode &node, const State &in, const std::string &branch) {
        std::vector<std::string> steps;
        node.collect_steps(steps);
        const std::string anchor = steps.empty() ? std::string("?") : steps.front();
        std::optional<State> out;
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            std::string label = "choice@" + anchor + "/branch " + std::to_string(i + 1);
            if (!branch.empty()) label = branch + " > " + label;
            State res = visit(node.children[i], in, label);
            if (!out) {
                out = std::move(res);
                continue;
            }
            for (std::size_t p = 0; p < out->facts.size(); ++p) {
                out->facts[p] = out->facts[p] && res.facts[p];
            }
            std::set<std::string> both;
            std::set_intersection(out->done.begin(), out->done.end(), res.done.begin(),
                                  res.done.end(), std::inserter(both, both.end()));
            out->done = std::move(both);
        }
        return out ? *out : in;
    }

    const CompositeProcess &process_;
    const Snapshot &snapshot_;
    FlowAnalysis &out_;
    const Domain &domain_;
    std::map<std::string, std::vector<PropId>> deletes_;
};

}  // namespace

FlowAnalysis analyse_flow(const CompositeProcess &process, const AbstractRequest *request,
                          const Snapshot &snapshot) {
    FlowAnalysis out;
    static const AbstractRequest none;
    out.domain = Domain::compile(snapshot.registry, snapshot.ontology, request ? *request : none,
                                 false);
    const Domain &domain = *out.domain;

    State start;
    start.facts.assign(domain.props().size(), 0);
    for (PropId p : domain.initial()) start.facts[p] = 1;
    Analyser analyser(process, snapshot, out);
    analyser.visit(process.control, std::move(start), {});

    // Parallel members that cannot share a layer.
    const auto order = step_sequence(process);
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (order_of(process, order[i], order[j]) != StepOrder::Unordered) continue;
            const Step *a = process.find_step(order[i]);
            const Step *b = process.find_step(order[j]);
            if (!a || !b || !snapshot.registry->find(a->service) ||
                !snapshot.registry->find(b->service)) {
                continue;
            }
            std::string why = step_conflict(domain, *a, *b);
            if (why.empty()) continue;
            out.findings.push_back({{Severity::Error, DiagnosticKind::MutexConflict,
                                     "step:" + a->id,
                                     a->id + " and " + b->id + " run in parallel but " + why, {}},
                                    {a->id, b->id}});
        }
    }
    return out;
}

bool no_worse(const CompositeProcess &before, const Delta &delta,
              std::span<const DiagnosticKind> kinds, const AbstractRequest *request,
              const Snapshot &snapshot) {
    CompositeProcess after;
    try {
        after = apply(before, delta);
    } catch (const Error &) {
        return false;
    }
    if (!invariant_violations(after, snapshot.registry.get()).empty()) return false;
    return count_errors(verify_all(after, request, snapshot), kinds) <=
           count_errors(verify_all(before, request, snapshot), kinds);
}

}  // namespace detail

std::vector<Diagnostic> verify_controlflow(const CompositeProcess &process,
                                           const AbstractRequest *request,
                                           const Snapshot &snapshot,
                                           std::span<const std::string> scope) {
    auto analysis = detail::analyse_flow(process, request, snapshot);
    std::vector<Diagnostic> out;
    for (auto &f : analysis.findings) {
        bool in_scope = scope.empty() || std::any_of(f.touches.begin(), f.touches.end(), [&](const auto &t) {
            return std::find(scope.begin(), scope.end(), t) != scope.end();
        });
        if (in_scope) out.push_back(std::move(f.diagnostic));
    }
    return out;
}

std::vector<Diagnostic> verify_all(const CompositeProcess &process, const AbstractRequest *request,
                                   const Snapshot &snapshot) {
    auto out = verify_dataflow(process, snapshot, request);
    auto more = verify_controlflow(process, request, snapshot);
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

}  // namespace semcomp
