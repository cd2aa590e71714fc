#include "semcomp/process.hpp"

#include "semcomp/error.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace semcomp {

std::string_view to_string(Provenance provenance) {
    switch (provenance) {
    case Provenance::User: return "user";
    case Provenance::SuggestedAccepted: return "suggested-accepted";
    case Provenance::AutoCompleted: return "auto-completed";
    }
    return "user";
}

Provenance parse_provenance(std::string_view text) {
    if (text == "user") return Provenance::User;
    if (text == "suggested-accepted") return Provenance::SuggestedAccepted;
    if (text == "auto-completed") return Provenance::AutoCompleted;
    throw Error(ErrorCode::Parse, "unknown provenance '" + std::string(text) + "'");
}

std::string_view to_string(ControlNode::Kind kind) {
    switch (kind) {
    case ControlNode::Kind::Step: return "step";
    case ControlNode::Kind::Sequence: return "sequence";
    case ControlNode::Kind::Parallel: return "parallel";
    case ControlNode::Kind::Choice: return "choice";
    }
    return "sequence";
}

std::string_view to_string(Relation relation) {
    switch (relation) {
    case Relation::Append: return "append";
    case Relation::Before: return "before";
    case Relation::After: return "after";
    case Relation::ParallelWith: return "parallel";
    }
    return "append";
}

Relation parse_relation(std::string_view text) {
    if (text == "append") return Relation::Append;
    if (text == "before") return Relation::Before;
    if (text == "after") return Relation::After;
    if (text == "parallel") return Relation::ParallelWith;
    throw Error(ErrorCode::Parse, "unknown relation '" + std::string(text) + "'");
}

ControlNode ControlNode::leaf(std::string step_id) {
    ControlNode n;
    n.kind = Kind::Step;
    n.step = std::move(step_id);
    return n;
}

ControlNode ControlNode::sequence(std::vector<ControlNode> children) {
    ControlNode n;
    n.kind = Kind::Sequence;
    n.children = std::move(children);
    return n;
}

ControlNode ControlNode::parallel(std::vector<ControlNode> children) {
    ControlNode n;
    n.kind = Kind::Parallel;
    n.children = std::move(children);
    return n;
}

ControlNode ControlNode::choice(std::vector<ControlNode> children) {
    ControlNode n;
    n.kind = Kind::Choice;
    n.children = std::move(children);
    return n;
}

void ControlNode::collect_steps(std::vector<std::string> &out) const {
    if (is_step()) {
        out.push_back(step);
        return;
    }
    for (const auto &c : children) c.collect_steps(out);
}

std::string Consolidation::describe() const {
    return producer + "." + output + "->" + consumer + "." + input;
}

const Step *CompositeProcess::find_step(std::string_view id) const {
    auto it = steps.find(std::string(id));
    return it == steps.end() ? nullptr : &it->second;
}

const Consolidation *CompositeProcess::feeding(std::string_view consumer,
                                               std::string_view input) const {
    for (const auto &c : consolidations) {
        if (c.consumer == consumer && c.input == input) return &c;
    }
    return nullptr;
}

namespace {

using Path = std::vector<std::size_t>;

void normalize_children(ControlNode &node) {
    std::vector<ControlNode> out;
    for (auto &child : node.children) {
        if (!child.is_step()) {
            normalize_children(child);
            if (child.children.empty()) continue;
            if (child.children.size() == 1) {
                ControlNode only = std::move(child.children.front());
                child = std::move(only);
            }
        }
        if (!child.is_step() && child.kind == node.kind) {
            for (auto &grandchild : child.children) out.push_back(std::move(grandchild));
        } else {
            out.push_back(std::move(child));
        }
    }
    node.children = std::move(out);
}

bool find_path(const ControlNode &node, std::string_view step, Path &path) {
    if (node.is_step()) return node.step == step;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        path.push_back(i);
        if (find_path(node.children[i], step, path)) return true;
        path.pop_back();
    }
    return false;
}

Path require_path(const CompositeProcess &process, std::string_view step) {
    Path path;
    if (!find_path(process.control, step, path)) {
        throw Error(ErrorCode::Precondition, "step '" + std::string(step) + "' not in control tree");
    }
    return path;
}

ControlNode &node_at(ControlNode &root, const Path &path, std::size_t depth) {
    ControlNode *node = &root;
    for (std::size_t i = 0; i < depth; ++i) node = &node->children[path[i]];
    return *node;
}

const ControlNode &node_at(const ControlNode &root, const Path &path, std::size_t depth) {
    const ControlNode *node = &root;
    for (std::size_t i = 0; i < depth; ++i) node = &node->children[path[i]];
    return *node;
}

std::size_t common_prefix(const Path &a, const Path &b) {
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
    return n;
}

[[noreturn]] void reject(const std::string &message) {
    throw Error(ErrorCode::Precondition, message);
}

void insert_step(CompositeProcess &p, const edit::AddStep &e) {
    const Step &step = e.step;
    if (step.id.empty()) reject("step id must not be empty");
    if (p.steps.contains(step.id)) reject("step '" + step.id + "' already exists");
    if (step.service.empty()) reject("step '" + step.id + "' has no service");

    ControlNode leaf = ControlNode::leaf(step.id);
    if (e.placement.relation == Relation::Append || !e.placement.anchor) {
        p.control.children.push_back(std::move(leaf));
    } else {
        Path path = require_path(p, *e.placement.anchor);
        ControlNode &parent = node_at(p.control, path, path.size() - 1);
        std::size_t idx = path.back();
        ControlNode &anchor = parent.children[idx];
        switch (e.placement.relation) {
        case Relation::Before:
            if (parent.kind == ControlNode::Kind::Sequence) {
                parent.children.insert(parent.children.begin() + idx, std::move(leaf));
            } else {
                anchor = ControlNode::sequence({std::move(leaf), anchor});
            }
            break;
        case Relation::After:
            if (parent.kind == ControlNode::Kind::Sequence) {
                parent.children.insert(parent.children.begin() + idx + 1, std::move(leaf));
            } else {
                anchor = ControlNode::sequence({anchor, std::move(leaf)});
            }
            break;
        case Relation::ParallelWith:
            if (parent.kind == ControlNode::Kind::Parallel) {
                parent.children.insert(parent.children.begin() + idx + 1, std::move(leaf));
            } else {
                anchor = ControlNode::parallel({anchor, std::move(leaf)});
            }
            break;
        case Relation::Append: break;
        }
    }
    p.steps.emplace(step.id, step);
}

void remove_step(CompositeProcess &p, const std::string &id) {
    if (!p.steps.contains(id)) reject("unknown step '" + id + "'");
    Path path = require_path(p, id);
    ControlNode &parent = node_at(p.control, path, path.size() - 1);
    parent.children.erase(parent.children.begin() + path.back());
    std::erase_if(p.consolidations,
                  [&](const Consolidation &c) { return c.producer == id || c.consumer == id; });
    p.steps.erase(id);
}

void add_consolidation(CompositeProcess &p, const Consolidation &link) {
    if (!p.steps.contains(link.producer)) reject("unknown producer step '" + link.producer + "'");
    if (!p.steps.contains(link.consumer)) reject("unknown consumer step '" + link.consumer + "'");
    if (link.producer == link.consumer) reject("a step cannot feed itself");
    if (p.feeding(link.consumer, link.input)) {
        reject("input " + link.consumer + "." + link.input + " is already consolidated");
    }
    p.consolidations.push_back(link);
}

void order_steps(CompositeProcess &p, const edit::Order &e) {
    if (e.first == e.second) reject("cannot order a step against itself");
    Path a = require_path(p, e.first);
    Path b = require_path(p, e.second);
    std::size_t lca = common_prefix(a, b);
    ControlNode &node = node_at(p.control, a, lca);
    std::size_t ia = a[lca], ib = b[lca];
    switch (node.kind) {
    case ControlNode::Kind::Sequence:
        if (ia < ib) return;
        reject("'" + e.second + "' is already sequenced before '" + e.first + "'");
    case ControlNode::Kind::Choice:
        reject("steps in different choice branches cannot be sequenced");
    case ControlNode::Kind::Parallel: {
        ControlNode first = node.children[ia];
        ControlNode second = node.children[ib];
        std::size_t lo = std::min(ia, ib), hi = std::max(ia, ib);
        node.children.erase(node.children.begin() + hi);
        node.children.erase(node.children.begin() + lo);
        node.children.insert(node.children.begin() + lo,
                             ControlNode::sequence({std::move(first), std::move(second)}));
        return;
    }
    case ControlNode::Kind::Step: break;
    }
    reject("malformed control tree");
}

void parallelize_steps(CompositeProcess &p, const edit::Parallelize &e) {
    if (e.first == e.second) reject("cannot parallelize a step with itself");
    Path a = require_path(p, e.first);
    Path b = require_path(p, e.second);
    std::size_t lca = common_prefix(a, b);
    ControlNode &node = node_at(p.control, a, lca);
    if (node.kind != ControlNode::Kind::Sequence) reject("steps are not sequenced");
    std::size_t lo = std::min(a[lca], b[lca]), hi = std::max(a[lca], b[lca]);
    if (hi != lo + 1) reject("only adjacent sequence members can be parallelized");
    ControlNode merged =
        ControlNode::parallel({std::move(node.children[lo]), std::move(node.children[hi])});
    node.children.erase(node.children.begin() + hi);
    node.children[lo] = std::move(merged);
}

}  // namespace

void normalize(CompositeProcess &process) {
    if (process.control.kind != ControlNode::Kind::Sequence) {
        process.control = ControlNode::sequence({std::move(process.control)});
    }
    normalize_children(process.control);
    std::sort(process.consolidations.begin(), process.consolidations.end(),
              [](const Consolidation &x, const Consolidation &y) {
                  return std::tie(x.consumer, x.input, x.producer, x.output) <
                         std::tie(y.consumer, y.input, y.producer, y.output);
              });
}

std::vector<std::string> invariant_violations(const CompositeProcess &process,
                                              const Registry *registry) {
    std::vector<std::string> problems;
    if (process.control.kind != ControlNode::Kind::Sequence) problems.push_back("root is not a sequence");
    std::vector<std::string> leaves;
    process.control.collect_steps(leaves);
    std::map<std::string, int> seen;
    for (const auto &leaf : leaves) ++seen[leaf];
    for (const auto &[leaf, count] : seen) {
        if (!process.steps.contains(leaf)) problems.push_back("control tree names unknown step " + leaf);
        if (count > 1) problems.push_back("step " + leaf + " appears more than once");
    }
    for (const auto &[id, step] : process.steps) {
        if (step.id != id) problems.push_back("step key mismatch for " + id);
        if (!seen.contains(id)) problems.push_back("step " + id + " missing from control tree");
    }
    std::set<std::pair<std::string, std::string>> fed;
    for (const auto &c : process.consolidations) {
        const Step *producer = process.find_step(c.producer);
        const Step *consumer = process.find_step(c.consumer);
        if (!producer || !consumer) {
            problems.push_back("consolidation " + c.describe() + " references unknown step");
            continue;
        }
        if (!fed.insert({c.consumer, c.input}).second) {
            problems.push_back("input " + c.consumer + "." + c.input + " fed more than once");
        }
        if (registry) {
            const auto *ps = registry->find(producer->service);
            const auto *cs = registry->find(consumer->service);
            if (ps && !ps->find_output(c.output)) {
                problems.push_back("consolidation " + c.describe() + " names unknown output");
            }
            if (cs && !cs->find_input(c.input)) {
                problems.push_back("consolidation " + c.describe() + " names unknown input");
            }
        }
    }
    return problems;
}

StepOrder order_of(const CompositeProcess &process, std::string_view a, std::string_view b) {
    Path pa = require_path(process, a);
    Path pb = require_path(process, b);
    std::size_t lca = common_prefix(pa, pb);
    if (lca == pa.size() || lca == pb.size()) return StepOrder::Unordered;
    const ControlNode &node = node_at(process.control, pa, lca);
    switch (node.kind) {
    case ControlNode::Kind::Sequence: return pa[lca] < pb[lca] ? StepOrder::Before : StepOrder::After;
    case ControlNode::Kind::Choice: return StepOrder::Exclusive;
    default: return StepOrder::Unordered;
    }
}

std::vector<std::string> step_sequence(const CompositeProcess &process) {
    std::vector<std::string> out;
    process.control.collect_steps(out);
    return out;
}

std::string next_step_id(const CompositeProcess &process, std::size_t offset) {
    std::size_t highest = 0;
    for (const auto &[id, step] : process.steps) {
        if (id.size() < 2 || id[0] != 's') continue;
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), value);
        if (ec == std::errc() && ptr == id.data() + id.size()) highest = std::max(highest, value);
    }
    return "s" + std::to_string(highest + 1 + offset);
}

CompositeProcess apply(const CompositeProcess &process, const Delta &delta) {
    CompositeProcess p = process;
    for (const auto &e : delta.edits) {
        std::visit(
            [&](const auto &op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, edit::AddStep>) {
                    insert_step(p, op);
                } else if constexpr (std::is_same_v<T, edit::RemoveStep>) {
                    remove_step(p, op.step);
                } else if constexpr (std::is_same_v<T, edit::AddConsolidation>) {
                    add_consolidation(p, op.link);
                } else if constexpr (std::is_same_v<T, edit::RemoveConsolidation>) {
                    auto before = p.consolidations.size();
                    std::erase_if(p.consolidations, [&](const Consolidation &c) {
                        return c.consumer == op.consumer && c.input == op.input;
                    });
                    if (before == p.consolidations.size()) {
                        reject("no consolidation feeds " + op.consumer + "." + op.input);
                    }
                } else if constexpr (std::is_same_v<T, edit::Order>) {
                    order_steps(p, op);
                } else if constexpr (std::is_same_v<T, edit::Parallelize>) {
                    parallelize_steps(p, op);
                } else if constexpr (std::is_same_v<T, edit::SetOutcome>) {
                    auto it = p.steps.find(op.step);
                    if (it == p.steps.end()) reject("unknown step '" + op.step + "'");
                    it->second.outcome = op.outcome;
                } else if constexpr (std::is_same_v<T, edit::ReplaceProcess>) {
                    p = op.process;
                }
            },
            e);
        normalize(p);
    }
    return p;
}

}  // namespace semcomp
