#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>

namespace oracle {

std::vector<std::vector<int>> floyd_warshall(std::size_t n, const std::vector<std::pair<int, int>> &edges) {
    std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (auto [c, p] : edges) {
        if (c != p) d[c][p] = std::min(d[c][p], 1);
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    return d;
}

std::vector<std::pair<int, int>> random_dag(std::mt19937_64 &rng, std::size_t n, double density) {
    std::bernoulli_distribution coin(density);
    std::vector<std::pair<int, int>> edges;
    for (std::size_t c = 1; c < n; ++c)
        for (std::size_t p = 0; p < c; ++p)
            if (coin(rng)) edges.emplace_back(static_cast<int>(c), static_cast<int>(p));
    return edges;
}

semcomp::OntologyDocument ToyDomain::ontology() const {
    semcomp::OntologyDocument doc;
    auto add = [&](std::string s, std::string p, std::string o) { doc.triples.push_back({s, p, o, false}); };
    for (std::size_t i = 0; i < types; ++i) add(type_name(int(i)), "rdf:type", "owl:Class");
    for (std::size_t i = 0; i < statuses; ++i) add(status_name(int(i)), "rdf:type", "owl:Class");
    for (auto [c, p] : type_edges) add(type_name(c), "rdfs:subClassOf", type_name(p));
    for (auto [c, p] : status_edges) add(status_name(c), "rdfs:subClassOf", status_name(p));
    return doc;
}

std::vector<semcomp::ServiceProfile> ToyDomain::profiles() const {
    std::vector<semcomp::ServiceProfile> out;
    for (const auto &s : services) {
        semcomp::ServiceProfile p;
        p.id = s.id;
        p.name = s.id;
        for (std::size_t i = 0; i < s.inputs.size(); ++i) p.inputs.push_back({"i" + std::to_string(i), type_name(s.inputs[i])});
        for (std::size_t i = 0; i < s.outputs.size(); ++i) p.outputs.push_back({"o" + std::to_string(i), type_name(s.outputs[i])});
        for (int st : s.pre) p.preconditions.push_back({status_name(st), {}});
        for (const auto &o : s.outcomes) {
            semcomp::ConditionalEffect e;
            e.label = o.label;
            for (int a : o.adds) e.adds.push_back({status_name(a), {}});
            for (int x : o.deletes) e.deletes.push_back({status_name(x), {}});
            p.effects.push_back(e);
        }
        out.push_back(p);
    }
    return out;
}

semcomp::AbstractRequest ToyDomain::request() const {
    semcomp::AbstractRequest r;
    for (int t : available) r.available_inputs.push_back(type_name(t));
    for (int s : initial) r.initial_statuses.push_back({status_name(s), {}});
    for (int t : goal_outputs) r.goal_outputs.push_back(type_name(t));
    for (int s : goal_statuses) r.goal_statuses.push_back({status_name(s), {}});
    return r;
}

namespace {

std::vector<int> distinct(std::mt19937_64 &rng, std::size_t n, std::size_t lo, std::size_t hi) {
    std::vector<int> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = int(i);
    std::shuffle(all.begin(), all.end(), rng);
    std::size_t k = std::uniform_int_distribution<std::size_t>(lo, std::min(hi, n))(rng);
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

ToyDomain random_domain(std::uint64_t seed, const ToyShape &shape) {
    std::mt19937_64 rng(seed);
    ToyDomain d;
    d.types = shape.types;
    d.statuses = shape.statuses;
    d.type_edges = random_dag(rng, d.types, 0.25);
    d.status_edges = random_dag(rng, d.statuses, 0.2);
    auto sdist = floyd_warshall(d.statuses, d.status_edges);
    std::bernoulli_distribution two_outcomes(0.3), has_pre(0.35);

    for (std::size_t i = 0; i < shape.services; ++i) {
        Service s;
        s.id = "svc" + std::string(1, char('a' + i));
        s.inputs = distinct(rng, d.types, 0, shape.max_params);
        // bias towards chains: consume what an earlier service makes
        if (i > 0 && std::bernoulli_distribution(0.6)(rng)) {
            const auto &earlier = d.services[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)];
            s.inputs = {earlier.outputs[std::uniform_int_distribution<std::size_t>(0, earlier.outputs.size() - 1)(rng)]};
        }
        s.outputs = distinct(rng, d.types, 1, shape.max_params);
        if (has_pre(rng)) s.pre = distinct(rng, d.statuses, 1, 1);
        const std::size_t n = two_outcomes(rng) ? 2 : 1;
        for (std::size_t k = 0; k < n; ++k) {
            Outcome o;
            o.label = n == 1 ? "default" : (k == 0 ? "ok" : "fail");
            o.adds = distinct(rng, d.statuses, 0, 2);
            for (int x : distinct(rng, d.statuses, 0, 1)) {
                bool clash = std::any_of(o.adds.begin(), o.adds.end(), [&](int a) { return sdist[a][x] < kInf; });
                if (!clash) o.deletes.push_back(x);
            }
            s.outcomes.push_back(o);
        }
        d.services.push_back(s);
    }
    d.available = distinct(rng, d.types, 1, 2);
    d.initial = distinct(rng, d.statuses, 0, 2);
    // goals drawn from what services produce and not already holding, so
    // that nontrivial solvable requests are common
    auto tdist = floyd_warshall(d.types, d.type_edges);
    std::vector<int> produced, added;
    for (std::size_t i = 0; i < d.services.size(); ++i) {
        const auto &s = d.services[i];
        const std::size_t weight = 1 + i * i;  // later services sit deeper in chains
        for (int t : s.outputs)
            for (std::size_t w = 0; w < weight; ++w)
            if (std::none_of(d.available.begin(), d.available.end(), [&](int a) { return tdist[a][t] < kInf; }))
                produced.push_back(t);
        for (const auto &o : s.outcomes)
            for (int a : o.adds)
                if (std::none_of(d.initial.begin(), d.initial.end(), [&](int i) { return sdist[i][a] < kInf; }))
                    added.push_back(a);
    }
    auto pick_from = [&](const std::vector<int> &v) {
        return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
    };
    for (int g = std::uniform_int_distribution<int>(1, 3)(rng); g > 0; --g) {
        if (!added.empty() && (produced.empty() || std::bernoulli_distribution(0.3)(rng))) {
            int s = pick_from(added);
            if (std::find(d.goal_statuses.begin(), d.goal_statuses.end(), s) == d.goal_statuses.end())
                d.goal_statuses.push_back(s);
        } else if (!produced.empty()) {
            int t = pick_from(produced);
            if (std::find(d.goal_outputs.begin(), d.goal_outputs.end(), t) == d.goal_outputs.end())
                d.goal_outputs.push_back(t);
        }
    }
    if (d.goal_outputs.empty() && d.goal_statuses.empty()) d.goal_outputs.push_back(int(d.types) - 1);
    return d;
}

CanonPlan canonical(const semcomp::Plan &plan) {
    CanonPlan out;
    for (const auto &layer : plan.layers) {
        Layer l;
        for (const auto &a : layer) l.push_back(a.service + "/" + a.outcome);
        std::sort(l.begin(), l.end());
        out.push_back(l);
    }
    return out;
}

Checker::Checker(const ToyDomain &domain)
    : d_(domain),
      tdist_(floyd_warshall(domain.types, domain.type_edges)),
      sdist_(floyd_warshall(domain.statuses, domain.status_edges)) {
    std::set<int> u(domain.initial.begin(), domain.initial.end());
    for (const auto &s : domain.services) {
        for (const auto &o : s.outcomes) {
            u.insert(o.adds.begin(), o.adds.end());
            names_.push_back(s.id + "/" + o.label);
            acts_.push_back({&s, &o});
        }
    }
    universe_.assign(u.begin(), u.end());
}

const Checker::Act &Checker::act(const std::string &name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return acts_[i];
    throw std::runtime_error("unknown action " + name);
}

bool Checker::mutex(const std::string &an, const std::string &bn) const {
    const Act &a = act(an), &b = act(bn);
    if (a.service == b.service) return a.outcome != b.outcome;
    auto one_way = [&](const Act &x, const Act &y) {
        for (int del : x.outcome->deletes) {
            for (int add : y.outcome->adds)
                if (status_sub(add, del)) return true;
            for (int need : y.service->pre)
                for (int s : universe_)
                    if (status_sub(s, del) && status_sub(s, need)) return true;
        }
        return false;
    };
    return one_way(a, b) || one_way(b, a);
}

bool Checker::applicable(const Act &a, const State &s) const {
    for (int in : a.service->inputs) {
        bool ok = false;
        for (std::size_t t = 0; t < d_.types && !ok; ++t) ok = s.types[t] && type_sub(int(t), in);
        if (!ok) return false;
    }
    for (int pre : a.service->pre) {
        bool ok = false;
        for (std::size_t t = 0; t < d_.statuses && !ok; ++t) ok = s.statuses[t] && status_sub(int(t), pre);
        if (!ok) return false;
    }
    return true;
}

bool Checker::goals(const State &s) const {
    for (int g : d_.goal_outputs) {
        bool ok = false;
        for (std::size_t t = 0; t < d_.types && !ok; ++t) ok = s.types[t] && type_sub(int(t), g);
        if (!ok) return false;
    }
    for (int g : d_.goal_statuses) {
        bool ok = false;
        for (std::size_t t = 0; t < d_.statuses && !ok; ++t) ok = s.statuses[t] && status_sub(int(t), g);
        if (!ok) return false;
    }
    return true;
}

bool Checker::step(State &s, const Layer &layer) const {
    for (std::size_t i = 0; i < layer.size(); ++i)
        for (std::size_t j = i + 1; j < layer.size(); ++j)
            if (layer[i] == layer[j] || mutex(layer[i], layer[j])) return false;
    for (const auto &n : layer)
        if (!applicable(act(n), s)) return false;
    State next = s;
    for (const auto &n : layer)
        for (int del : act(n).outcome->deletes)
            for (std::size_t t = 0; t < d_.statuses; ++t)
                if (status_sub(int(t), del)) next.statuses[t] = false;
    for (const auto &n : layer) {
        const Act &a = act(n);
        for (int o : a.service->outputs) next.types[o] = true;
        for (int add : a.outcome->adds) next.statuses[add] = true;
    }
    s = std::move(next);
    return true;
}

bool Checker::valid(const CanonPlan &plan) const {
    State s{std::vector<bool>(d_.types, false), std::vector<bool>(d_.statuses, false)};
    for (int t : d_.available) s.types[t] = true;
    for (int t : d_.initial) s.statuses[t] = true;
    for (const auto &layer : plan)
        if (!step(s, layer)) return false;
    return goals(s);
}

bool Checker::irredundant(const CanonPlan &plan) const {
    for (std::size_t l = 0; l < plan.size(); ++l) {
        for (std::size_t i = 0; i < plan[l].size(); ++i) {
            CanonPlan less = plan;
            less[l].erase(less[l].begin() + long(i));
            if (less[l].empty()) less.erase(less.begin() + long(l));
            if (valid(less)) return false;
        }
    }
    return true;
}

std::set<CanonPlan> Checker::minimal_plans(std::size_t max_layers, std::size_t &min_layers) const {
    std::set<CanonPlan> found;
    min_layers = 0;
    if (valid({})) {
        found.insert(CanonPlan{});
        return found;
    }
    const std::size_t n = names_.size();
    for (std::size_t depth = 1; depth <= max_layers; ++depth) {
        CanonPlan current;
        std::function<void(const State &)> dfs = [&](const State &s) {
            if (current.size() == depth) {
                if (goals(s) && irredundant(current)) found.insert(current);
                return;
            }
            std::vector<std::size_t> usable;
            for (std::size_t i = 0; i < n; ++i)
                if (applicable(acts_[i], s)) usable.push_back(i);
            for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << usable.size()); ++mask) {
                Layer layer;
                for (std::size_t b = 0; b < usable.size(); ++b)
                    if (mask >> b & 1) layer.push_back(names_[usable[b]]);
                std::sort(layer.begin(), layer.end());
                State next = s;
                if (!step(next, layer)) continue;
                current.push_back(layer);
                dfs(next);
                current.pop_back();
            }
        };
        State s{std::vector<bool>(d_.types, false), std::vector<bool>(d_.statuses, false)};
        for (int t : d_.available) s.types[t] = true;
        for (int t : d_.initial) s.statuses[t] = true;
        dfs(s);
        if (!found.empty()) {
            min_layers = depth;
            return found;
        }
    }
    return found;
}

}  // namespace oracle
