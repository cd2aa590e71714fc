#include "semcomp/planner.hpp"

#include <algorithm>

namespace semcomp {

namespace {

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

std::size_t default_horizon(const Registry &registry) {
    return std::max<std::size_t>(1, 2 * registry.size());
}

PlanGraph::PlanGraph(std::shared_ptr<const Domain> domain, std::size_t horizon)
    : domain_(std::move(domain)), horizon_(std::max<std::size_t>(1, horizon)) {
    const auto &d = *domain_;
    prop_level_.assign(d.props().size(), kNever);
    action_level_.assign(d.actions().size(), kNever);
    for (PropId p : d.initial()) prop_level_[p] = 0;
    props_per_level_.push_back(d.initial().size());
    prop_mutex_.emplace_back();
    action_mutex_.emplace_back();  // layer 0 has no actions
    req_mutex_cache_.emplace_back();
}

std::vector<PropId> PlanGraph::props_at(std::size_t level) const {
    std::vector<PropId> out;
    for (PropId p = 0; p < prop_level_.size(); ++p) {
        if (prop_level_[p] <= level) out.push_back(p);
    }
    return out;
}

std::vector<ActionId> PlanGraph::actions_at(std::size_t level) const {
    std::vector<ActionId> out;
    if (level == 0) return out;
    for (ActionId a = 0; a < action_level_.size(); ++a) {
        if (action_level_[a] <= level) out.push_back(a);
    }
    return out;
}

std::vector<PropId> PlanGraph::supporters_at(ReqId req, std::size_t level) const {
    std::vector<PropId> out;
    for (PropId p : domain_->supporters(req)) {
        if (prop_level_[p] <= level) out.push_back(p);
    }
    return out;
}

bool PlanGraph::props_mutex(std::size_t level, PropId a, PropId b) const {
    if (a == b) return false;
    return prop_mutex_[clamp(level)].contains(pair_key(a, b));
}

bool PlanGraph::nodes_mutex(std::size_t level, GraphNode a, GraphNode b) const {
    if (a == b) return false;
    if (!a.noop && !b.noop) {
        if (domain_->statically_mutex(a.id, b.id)) return true;
    } else if (a.noop != b.noop) {
        const GraphNode &op = a.noop ? b : a;
        const GraphNode &np = a.noop ? a : b;
        const auto dels = domain_->actions()[op.id].deletes;
        if (std::binary_search(dels.begin(), dels.end(), np.id)) return true;
    }
    if (level == 0) return false;
    return action_mutex_[clamp_actions(level)].contains(pair_key(a.encoded(), b.encoded()));
}

bool PlanGraph::req_mutex_uncached(std::size_t level, ReqId a, ReqId b) const {
    const auto sa = supporters_at(a, level);
    const auto sb = supporters_at(b, level);
    if (sa.empty() || sb.empty()) return false;
    for (PropId p : sa) {
        for (PropId q : sb) {
            if (!props_mutex(level, p, q)) return false;
        }
    }
    return true;
}

bool PlanGraph::reqs_mutex(std::size_t level, ReqId a, ReqId b) const {
    if (a == b) return false;
    level = clamp(level);
    if (prop_mutex_[level].empty()) return false;
    auto &cache = req_mutex_cache_[level];
    auto key = pair_key(a, b);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    bool m = req_mutex_uncached(level, a, b);
    cache.emplace(key, m);
    return m;
}

std::size_t PlanGraph::prop_mutex_count(std::size_t level) const {
    return prop_mutex_[clamp(level)].size();
}

std::size_t PlanGraph::action_mutex_count(std::size_t level) const {
    if (level == 0) return 0;
    level = clamp_actions(level);
    std::size_t n = action_mutex_[level].size();
    for (ActionId a = 0; a < action_level_.size(); ++a) {
        if (action_level_[a] > level) continue;
        for (ActionId b : domain_->static_mutex(a)) {
            if (b > a && action_level_[b] <= level) ++n;
        }
        for (PropId p : domain_->actions()[a].deletes) {
            if (prop_level_[p] + 1 <= level) ++n;
        }
    }
    return n;
}

std::size_t PlanGraph::node_count() const {
    std::size_t n = 0;
    for (auto l : prop_level_) n += l != kNever;
    for (auto l : action_level_) n += l != kNever;
    return n;
}

bool PlanGraph::goals_reachable_at(std::size_t level) const {
    const auto goals = domain_->goals();
    for (ReqId g : goals) {
        if (supporters_at(g, level).empty()) return false;
    }
    for (std::size_t i = 0; i < goals.size(); ++i) {
        for (std::size_t j = i + 1; j < goals.size(); ++j) {
            if (reqs_mutex(level, goals[i], goals[j])) return false;
        }
    }
    return true;
}

void PlanGraph::expand() {
    if (leveled_off_) return;
    const Domain &d = *domain_;
    const std::size_t n = levels_ - 1;  // building A_{n+1}, P_{n+1}
    const std::uint32_t next = static_cast<std::uint32_t>(n + 1);

    // Action layer.
    for (ActionId a = 0; a < d.actions().size(); ++a) {
        if (action_level_[a] != kNever) continue;
        const auto needs = d.actions()[a].needs;
        bool ok = std::all_of(needs.begin(), needs.end(), [&](ReqId r) {
            for (PropId p : d.supporters(r)) {
                if (prop_level_[p] <= n) return true;
            }
            return false;
        });
        for (std::size_t i = 0; ok && i < needs.size(); ++i) {
            for (std::size_t j = i + 1; ok && j < needs.size(); ++j) {
                if (reqs_mutex(n, needs[i], needs[j])) ok = false;
            }
        }
        if (ok) action_level_[a] = next;
    }

    // Competing needs. Only nodes with a need whose every supporter already
    // has a mutex partner can take part.
    std::unordered_set<std::uint64_t> amutex;
    const auto &pm = prop_mutex_[n];
    if (!pm.empty()) {
        std::vector<char> prop_fragile(d.props().size(), 0);
        for (auto key : pm) {
            prop_fragile[key >> 32] = 1;
            prop_fragile[key & 0xffffffffu] = 1;
        }
        auto req_fragile = [&](ReqId r) {
            bool any = false;
            for (PropId p : d.supporters(r)) {
                if (prop_level_[p] > n) continue;
                if (!prop_fragile[p]) return false;
                any = true;
            }
            return any;
        };
        std::vector<GraphNode> candidates;
        for (ActionId a = 0; a < d.actions().size(); ++a) {
            if (action_level_[a] > next) continue;
            const auto needs = d.actions()[a].needs;
            if (std::any_of(needs.begin(), needs.end(), req_fragile)) candidates.push_back({false, a});
        }
        for (PropId p = 0; p < d.props().size(); ++p) {
            if (prop_level_[p] <= n && prop_fragile[p]) candidates.push_back({true, p});
        }
        // Support sets at P_n: a noop needs exactly its proposition.
        auto support_sets = [&](GraphNode x) {
            std::vector<std::vector<PropId>> out;
            if (x.noop) {
                out.push_back({x.id});
            } else {
                for (ReqId r : d.actions()[x.id].needs) out.push_back(supporters_at(r, n));
            }
            return out;
        };
        std::vector<std::vector<std::vector<PropId>>> sets;
        sets.reserve(candidates.size());
        for (auto c : candidates) sets.push_back(support_sets(c));
        auto sets_mutex = [&](const std::vector<PropId> &s1, const std::vector<PropId> &s2) {
            for (PropId p : s1) {
                for (PropId q : s2) {
                    if (!props_mutex(n, p, q)) return false;
                }
            }
            return true;
        };
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            for (std::size_t j = i + 1; j < candidates.size(); ++j) {
                bool m = false;
                for (const auto &s1 : sets[i]) {
                    for (const auto &s2 : sets[j]) {
                        if (sets_mutex(s1, s2)) {
                            m = true;
                            break;
                        }
                    }
                    if (m) break;
                }
                if (m) amutex.insert(pair_key(candidates[i].encoded(), candidates[j].encoded()));
            }
        }
    }
    action_mutex_.push_back(std::move(amutex));
    req_mutex_cache_.emplace_back();
    ++levels_;

    // Proposition layer.
    std::size_t count = 0;
    for (ActionId a = 0; a < d.actions().size(); ++a) {
        if (action_level_[a] > next) continue;
        for (PropId p : d.actions()[a].adds) {
            if (prop_level_[p] == kNever) prop_level_[p] = next;
        }
    }
    for (auto l : prop_level_) count += l <= next;
    props_per_level_.push_back(count);

    // Proposition mutex: every pair of achievers mutex. Only propositions
    // whose achievers all have some mutex partner qualify.
    auto achievers = [&](PropId p) {
        std::vector<GraphNode> out;
        for (ActionId a : d.adders(p)) {
            if (action_level_[a] <= next) out.push_back({false, a});
        }
        if (prop_level_[p] <= n) out.push_back({true, p});
        return out;
    };
    std::vector<char> node_has_partner_action(d.actions().size(), 0);
    for (ActionId a = 0; a < d.actions().size(); ++a) {
        if (action_level_[a] > next) continue;
        for (ActionId b : d.static_mutex(a)) {
            if (action_level_[b] <= next) {
                node_has_partner_action[a] = 1;
                break;
            }
        }
        for (PropId p : d.actions()[a].deletes) {
            if (prop_level_[p] <= n) node_has_partner_action[a] = 1;
        }
    }
    std::vector<char> noop_partner(d.props().size(), 0);
    for (PropId p = 0; p < d.props().size(); ++p) {
        if (prop_level_[p] > n) continue;
        for (ActionId a : d.deleters(p)) {
            if (action_level_[a] <= next) noop_partner[p] = 1;
        }
    }
    for (auto key : action_mutex_.back()) {
        for (std::uint32_t e : {static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key)}) {
            if (e & 0x80000000u) noop_partner[e & 0x7fffffffu] = 1;
            else node_has_partner_action[e] = 1;
        }
    }
    std::vector<PropId> fragile;
    std::vector<std::vector<GraphNode>> fragile_achievers;
    for (PropId p = 0; p < d.props().size(); ++p) {
        if (prop_level_[p] > next) continue;
        auto ach = achievers(p);
        bool all = !ach.empty() && std::all_of(ach.begin(), ach.end(), [&](GraphNode x) {
            return x.noop ? noop_partner[x.id] : node_has_partner_action[x.id];
        });
        if (all) {
            fragile.push_back(p);
            fragile_achievers.push_back(std::move(ach));
        }
    }
    std::unordered_set<std::uint64_t> pmutex;
    for (std::size_t i = 0; i < fragile.size(); ++i) {
        for (std::size_t j = i + 1; j < fragile.size(); ++j) {
            bool all = true;
            for (auto x : fragile_achievers[i]) {
                for (auto y : fragile_achievers[j]) {
                    if (!nodes_mutex(next, x, y)) {
                        all = false;
                        break;
                    }
                }
                if (!all) break;
            }
            if (all) pmutex.insert(pair_key(fragile[i], fragile[j]));
        }
    }
    prop_mutex_.push_back(std::move(pmutex));

    if (props_per_level_[next] == props_per_level_[n] &&
        prop_mutex_[next].size() == prop_mutex_[n].size()) {
        leveled_off_ = true;
    }
    if (!leveled_off_ && levels_ - 1 >= horizon_) horizon_hit_ = true;
}

void expand_level(PlanGraph &graph) { graph.expand(); }

std::shared_ptr<PlanGraph> build_graph(const AbstractRequest &request,
                                       std::shared_ptr<const Registry> registry,
                                       std::shared_ptr<const OntologyStore> ontology) {
    std::size_t horizon = request.horizon ? *request.horizon : default_horizon(*registry);
    auto domain = Domain::compile(registry, std::move(ontology), request);
    auto graph = std::make_shared<PlanGraph>(std::move(domain), horizon);
    while (!graph->goals_reachable_at(graph->last_level()) && !graph->leveled_off() &&
           graph->last_level() < graph->horizon()) {
        graph->expand();
    }
    return graph;
}

bool goals_reachable(const PlanGraph &graph, const AbstractRequest &) {
    return graph.goals_reachable_at(graph.last_level());
}

}  // namespace semcomp
