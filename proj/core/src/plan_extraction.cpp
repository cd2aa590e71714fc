#include "semcomp/planner.hpp"

#include "semcomp/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace semcomp {

namespace {

constexpr std::uint32_t kExactBit = 0x80000000u;

struct VecHash {
    std::size_t operator()(const std::vector<std::uint32_t> &v) const {
        std::uint64_t h = 1469598103934665603ull;
        for (auto x : v) {
            h ^= x;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

struct Choice {
    std::size_t goal_index = 0;
    std::vector<GraphNode> options;
    std::size_t next = 0;
    bool skipped = false;
};

struct Frame {
    std::uint32_t level = 0;
    std::vector<std::uint32_t> goals;  // ReqId, or PropId | kExactBit
    std::vector<Choice> choices;
    std::vector<GraphNode> chosen;
    std::size_t cursor = 0;
    bool found = false;
};

}  // namespace

struct PlanCursor::Search {
    PlanGraph &graph;
    const Domain &domain;
    std::size_t level = 0;
    bool level_started = false;
    std::size_t plans_at_level = 0;
    std::optional<std::size_t> solved_level;
    std::vector<Frame> stack;
    std::vector<std::unordered_set<std::vector<std::uint32_t>, VecHash>> memo;
    std::set<std::vector<std::vector<ActionId>>> seen;
    std::size_t emitted = 0;
    bool done = false;
    bool pending_backtrack = false;
    std::size_t work = 0;
    std::size_t work_limit = 0;  // 0 = unbounded
    bool starved = false;

    explicit Search(PlanGraph &g) : graph(g), domain(g.domain()) { seek_reachable(); }

    void ensure_built(std::size_t l) {
        while (graph.last_level() < l && !graph.leveled_off()) graph.expand();
    }

    // Moves `level` forward to the next level whose goals are reachable.
    void seek_reachable() {
        while (level <= graph.horizon()) {
            ensure_built(level);
            if (graph.goals_reachable_at(level)) return;
            if (graph.leveled_off() && level >= graph.last_level()) break;
            ++level;
        }
        done = true;
    }

    bool provides(GraphNode node, std::uint32_t goal) const {
        if (goal & kExactBit) {
            PropId p = goal & ~kExactBit;
            if (node.noop) return node.id == p;
            const auto adds = domain.actions()[node.id].adds;
            return std::binary_search(adds.begin(), adds.end(), p);
        }
        if (node.noop) return domain.matches(node.id, goal);
        for (PropId p : domain.actions()[node.id].adds) {
            if (domain.matches(p, goal)) return true;
        }
        return false;
    }

    bool satisfied(const Frame &f, std::uint32_t goal) const {
        return std::any_of(f.chosen.begin(), f.chosen.end(),
                           [&](GraphNode n) { return provides(n, goal); });
    }

    std::vector<GraphNode> options(const Frame &f, std::uint32_t goal) const {
        std::vector<GraphNode> out;
        const std::size_t l = f.level;
        auto consider = [&](GraphNode n) {
            for (auto c : f.chosen) {
                if (graph.nodes_mutex(l, n, c)) return;
            }
            out.push_back(n);
        };
        if (goal & kExactBit) {
            PropId p = goal & ~kExactBit;
            for (ActionId a : domain.adders(p)) {
                if (graph.has_action(a, l)) consider({false, a});
            }
            if (graph.has_prop(p, l - 1)) consider({true, p});
        } else {
            for (ActionId a : domain.achievers(goal)) {
                if (graph.has_action(a, l)) consider({false, a});
            }
            for (PropId p : domain.supporters(goal)) {
                if (graph.has_prop(p, l - 1)) consider({true, p});
            }
        }
        return out;
    }

    std::vector<std::uint32_t> subgoals(const Frame &f) const {
        std::vector<std::uint32_t> out;
        for (auto n : f.chosen) {
            if (n.noop) {
                out.push_back(n.id | kExactBit);
            } else {
                const auto needs = domain.actions()[n.id].needs;
                out.insert(out.end(), needs.begin(), needs.end());
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    bool initially_met(const std::vector<std::uint32_t> &goals) const {
        return std::all_of(goals.begin(), goals.end(), [&](std::uint32_t g) {
            if (g & kExactBit) return graph.has_prop(g & ~kExactBit, 0);
            for (PropId p : domain.supporters(g)) {
                if (graph.has_prop(p, 0)) return true;
            }
            return false;
        });
    }

    std::vector<std::vector<ActionId>> collect() const {
        std::vector<std::vector<ActionId>> layers;
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            std::vector<ActionId> layer;
            for (auto n : it->chosen) {
                if (!n.noop) layer.push_back(n.id);
            }
            std::sort(layer.begin(), layer.end());
            layers.push_back(std::move(layer));
        }
        return layers;
    }

    auto &memo_at(std::size_t l) {
        if (memo.size() <= l) memo.resize(l + 1);
        return memo[l];
    }

    bool backtrack() {
        while (!stack.empty()) {
            Frame &f = stack.back();
            while (!f.choices.empty()) {
                Choice &c = f.choices.back();
                if (!c.skipped) {
                    f.chosen.pop_back();
                    if (c.next < c.options.size()) {
                        f.chosen.push_back(c.options[c.next++]);
                        f.cursor = c.goal_index + 1;
                        return true;
                    }
                }
                f.choices.pop_back();
            }
            if (!f.found) memo_at(f.level).insert(f.goals);
            stack.pop_back();
        }
        return false;
    }

    std::optional<std::vector<std::vector<ActionId>>> next_derivation() {
        if (pending_backtrack) {
            pending_backtrack = false;
            if (!backtrack()) return std::nullopt;
        }
        while (!stack.empty()) {
            if (work_limit && ++work > work_limit) {
                starved = true;
                return std::nullopt;
            }
            Frame &f = stack.back();
            while (f.cursor < f.goals.size() && satisfied(f, f.goals[f.cursor])) {
                f.choices.push_back({f.cursor, {}, 0, true});
                ++f.cursor;
            }
            if (f.cursor < f.goals.size()) {
                auto opts = options(f, f.goals[f.cursor]);
                if (opts.empty()) {
                    if (!backtrack()) return std::nullopt;
                    continue;
                }
                f.chosen.push_back(opts.front());
                f.choices.push_back({f.cursor, std::move(opts), 1, false});
                ++f.cursor;
                continue;
            }
            // Selection complete; a layer made only of no-ops adds nothing.
            bool any_real = std::any_of(f.chosen.begin(), f.chosen.end(),
                                        [](GraphNode n) { return !n.noop; });
            if (!any_real) {
                if (!backtrack()) return std::nullopt;
                continue;
            }
            auto sub = subgoals(f);
            const std::uint32_t below = f.level - 1;
            if (below == 0) {
                if (initially_met(sub)) {
                    for (auto &fr : stack) fr.found = true;
                    pending_backtrack = true;
                    return collect();
                }
                if (!backtrack()) return std::nullopt;
                continue;
            }
            if (memo_at(below).contains(sub)) {
                if (!backtrack()) return std::nullopt;
                continue;
            }
            Frame child;
            child.level = below;
            child.goals = std::move(sub);
            stack.push_back(std::move(child));
        }
        return std::nullopt;
    }

    bool irredundant(const std::vector<std::vector<ActionId>> &layers) const {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            for (std::size_t j = 0; j < layers[i].size(); ++j) {
                std::vector<std::vector<ActionId>> reduced;
                for (std::size_t x = 0; x < layers.size(); ++x) {
                    std::vector<ActionId> layer;
                    for (std::size_t y = 0; y < layers[x].size(); ++y) {
                        if (x != i || y != j) layer.push_back(layers[x][y]);
                    }
                    if (!layer.empty()) reduced.push_back(std::move(layer));
                }
                if (simulate(domain, reduced).valid) return false;
            }
        }
        return true;
    }

    bool start_level() {
        level_started = true;
        plans_at_level = 0;
        if (level == 0) return true;
        Frame top;
        top.level = static_cast<std::uint32_t>(level);
        top.goals.assign(domain.goals().begin(), domain.goals().end());
        stack.push_back(std::move(top));
        return true;
    }

    void finish_level() {
        if (plans_at_level > 0 && !solved_level) solved_level = level;
        level_started = false;
        stack.clear();
        pending_backtrack = false;
        if (solved_level &&
            (level == 0 || level >= *solved_level + domain.request().extra_levels)) {
            done = true;
            return;
        }
        ++level;
        seek_reachable();
    }

    std::optional<std::vector<std::vector<ActionId>>> next_plan() {
        while (!done && !starved) {
            if (!level_started) start_level();
            if (level == 0) {
                // Goals hold initially: the empty plan, and nothing else is irredundant.
                std::vector<std::vector<ActionId>> empty;
                ++plans_at_level;
                finish_level();
                ++emitted;
                return empty;
            }
            auto d = next_derivation();
            if (starved) return std::nullopt;
            if (!d) {
                finish_level();
                continue;
            }
            if (!simulate(domain, *d).valid || !irredundant(*d)) continue;
            if (!seen.insert(*d).second) continue;
            ++plans_at_level;
            ++emitted;
            return d;
        }
        return std::nullopt;
    }
};

PlanCursor::PlanCursor(std::shared_ptr<PlanGraph> graph)
    : graph_(std::move(graph)), search_(std::make_unique<Search>(*graph_)) {}

PlanCursor::~PlanCursor() = default;

std::vector<Plan> PlanCursor::next(std::size_t k) {
    std::vector<Plan> out;
    while (out.size() < k) {
        auto layers = search_->next_plan();
        if (!layers) break;
        out.push_back(to_plan(graph_->domain(), *layers));
    }
    return out;
}

bool PlanCursor::exhausted() const { return search_->done; }
std::size_t PlanCursor::emitted() const { return search_->emitted; }
std::optional<std::size_t> PlanCursor::minimal_layers() const { return search_->solved_level; }
void PlanCursor::set_work_limit(std::size_t steps) { search_->work_limit = steps; }
bool PlanCursor::starved() const { return search_->starved; }

std::string PlanCursor::token() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(graph_->domain().basis()));
    std::string out = std::string(buf) + ":" + std::to_string(search_->emitted);
    if (search_->done) out += ":done";
    return out;
}

PlanBatch extract_plans(PlanCursor &cursor, std::size_t k) {
    PlanBatch batch;
    batch.plans = cursor.next(k);
    batch.token = cursor.token();
    batch.exhausted = cursor.exhausted();
    return batch;
}

std::optional<ParsedToken> parse_token(std::string_view token) {
    ParsedToken out;
    auto colon = token.find(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    auto hex = token.substr(0, colon);
    auto r = std::from_chars(hex.data(), hex.data() + hex.size(), out.basis, 16);
    if (r.ec != std::errc() || r.ptr != hex.data() + hex.size()) return std::nullopt;
    auto rest = token.substr(colon + 1);
    auto colon2 = rest.find(':');
    auto count = rest.substr(0, colon2);
    if (count.empty()) return std::nullopt;
    auto r2 = std::from_chars(count.data(), count.data() + count.size(), out.emitted);
    if (r2.ec != std::errc() || r2.ptr != count.data() + count.size()) return std::nullopt;
    if (colon2 != std::string_view::npos) {
        if (rest.substr(colon2 + 1) != "done") return std::nullopt;
        out.done = true;
    }
    return out;
}

namespace {

struct Candidate {
    MatchDegree match;
    std::size_t layer = 0;
    std::string step;
    std::string output;
};

// Better degree first, then the most recent layer, then step id and output name.
bool preferred(const Candidate &a, const Candidate &b) {
    if (a.match.degree != b.match.degree) return a.match.degree < b.match.degree;
    if (a.match.distance != b.match.distance) return a.match.distance < b.match.distance;
    if (a.layer != b.layer) return a.layer > b.layer;
    if (a.step != b.step) return a.step < b.step;
    return a.output < b.output;
}

}  // namespace

CompositeProcess plan_to_process(const Plan &plan, const Registry &registry,
                                 const OntologyStore &ontology) {
    CompositeProcess process;
    std::size_t counter = 0;
    struct Placed {
        std::string step;
        const ServiceProfile *profile;
        std::size_t layer;
    };
    std::vector<Placed> placed;
    for (std::size_t i = 0; i < plan.layers.size(); ++i) {
        std::vector<ControlNode> nodes;
        for (const auto &ref : plan.layers[i]) {
            const ServiceProfile *profile = registry.find(ref.service);
            if (!profile) {
                throw Error(ErrorCode::UnknownId,
                            "plan uses service '" + ref.service + "' which is no longer registered");
            }
            Step step{"s" + std::to_string(++counter), ref.service, ref.outcome,
                      Provenance::AutoCompleted};
            nodes.push_back(ControlNode::leaf(step.id));
            placed.push_back({step.id, profile, i});
            process.steps.emplace(step.id, std::move(step));
        }
        if (nodes.size() == 1) process.control.children.push_back(std::move(nodes.front()));
        else if (!nodes.empty()) process.control.children.push_back(ControlNode::parallel(std::move(nodes)));
    }

    for (const auto &consumer : placed) {
        for (const auto &input : consumer.profile->inputs) {
            auto want = ontology.find_class(input.type);
            if (!want) continue;
            std::optional<Candidate> best;
            for (const auto &producer : placed) {
                if (producer.layer >= consumer.layer) continue;
                for (const auto &output : producer.profile->outputs) {
                    auto have = ontology.find_class(output.type);
                    if (!have) continue;
                    MatchDegree m = ontology.match_degree(*have, *want);
                    if (!m.usable()) continue;
                    Candidate c{m, producer.layer, producer.step, output.name};
                    if (!best || preferred(c, *best)) best = c;
                }
            }
            if (best) {
                process.consolidations.push_back({best->step, best->output, consumer.step,
                                                  input.name, Provenance::AutoCompleted});
            }
        }
    }
    normalize(process);
    return process;
}

}  // namespace semcomp
