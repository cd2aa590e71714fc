#include "semcomp/bench.hpp"

#include "semcomp/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace semcomp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::size_t pick(std::mt19937_64 &rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::string class_name(std::size_t i) { return "b:C" + std::to_string(i); }

std::string padded(const char *prefix, std::size_t i, std::size_t width) {
    std::string n = std::to_string(i);
    if (n.size() < width) n.insert(0, width - n.size(), '0');
    return prefix + n;
}

OntologyDocument synthetic_ontology(const OntologySpec &spec) {
    std::mt19937_64 rng(spec.seed);
    std::bernoulli_distribution extra(spec.extra_parent_probability);
    OntologyDocument doc;
    auto add = [&](std::string s, std::string_view p, std::string o, bool literal = false) {
        doc.triples.push_back({std::move(s), std::string(p), std::move(o), literal});
    };

    std::vector<std::size_t> depth(spec.classes, 0), children(spec.classes, 0);
    for (std::size_t i = 0; i < spec.classes; ++i) {
        const std::string c = class_name(i);
        add(c, vocab::kType, std::string(vocab::kClass));
        if (spec.annotations) {
            add(c, vocab::kLabel, "C" + std::to_string(i), true);
            add(c, vocab::kComment, "synthetic class " + std::to_string(i), true);
        }
        if (i == 0) continue;
        auto open = [&](std::size_t j) { return depth[j] < spec.max_depth && children[j] < spec.branching; };
        std::size_t parent = i;
        for (int attempt = 0; attempt < 32 && parent == i; ++attempt) {
            std::size_t j = pick(rng, i);
            if (open(j)) parent = j;
        }
        if (parent == i) {
            const std::size_t start = pick(rng, i);
            for (std::size_t k = 0; k < i && parent == i; ++k) {
                if (open((start + k) % i)) parent = (start + k) % i;
            }
        }
        if (parent == i) parent = pick(rng, i);  // tree is full; ignore the limits
        depth[i] = depth[parent] + 1;
        ++children[parent];
        add(c, vocab::kSubClassOf, class_name(parent));
        if (i > 1 && extra(rng)) {
            std::size_t second = pick(rng, i);
            if (second != parent && depth[second] < spec.max_depth) {
                add(c, vocab::kSubClassOf, class_name(second));
            }
        }
    }
    for (std::size_t p = 0; p < spec.properties; ++p) {
        const std::string name = "b:p" + std::to_string(p);
        add(name, vocab::kType, std::string(vocab::kObjectProperty));
        add(name, vocab::kDomain, class_name(pick(rng, spec.classes)));
        add(name, vocab::kRange, class_name(pick(rng, spec.classes)));
        if (p > 0 && pick(rng, 4) == 0) add(name, vocab::kSubPropertyOf, "b:p" + std::to_string(pick(rng, p)));
    }
    return doc;
}

std::string read_text(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Generator {
    const BenchConfig &config;
    const OntologyStore &onto;
    std::vector<ClassId> classes;
    std::vector<ServiceProfile> services;

    bool covered(const std::string &required, const std::vector<std::string> &available) const {
        for (const auto &a : available) {
            if (onto.subsumes(required, a)) return true;
        }
        return false;
    }

    bool applicable(const ServiceProfile &s, const std::vector<std::string> &available) const {
        return std::all_of(s.inputs.begin(), s.inputs.end(),
                           [&](const Param &p) { return covered(p.type, available); });
    }

    // Random superclass up to two steps above `c`.
    std::string generalize(std::mt19937_64 &rng, const std::string &c) const {
        ClassId id = onto.require_class(c);
        for (std::size_t up = pick(rng, 3); up > 0; --up) {
            auto parents = onto.parents(id);
            if (parents.empty()) break;
            id = parents[pick(rng, parents.size())];
        }
        return onto.class_iri(id);
    }

    std::optional<AbstractRequest> satisfiable(std::mt19937_64 &rng) const {
        const ServiceProfile &first = services[pick(rng, services.size())];
        std::vector<std::string> initial;
        for (const auto &p : first.inputs) initial.push_back(p.type);
        std::sort(initial.begin(), initial.end());
        initial.erase(std::unique(initial.begin(), initial.end()), initial.end());

        std::vector<std::string> available = initial;
        std::vector<std::string> produced;
        std::set<std::size_t> used;
        for (std::size_t step = 0; step < std::max<std::size_t>(1, config.chain_length); ++step) {
            std::vector<std::size_t> candidates;
            for (std::size_t i = 0; i < services.size(); ++i) {
                if (!used.count(i) && applicable(services[i], available)) candidates.push_back(i);
            }
            if (candidates.empty()) break;
            // prefer services that need something the walk produced
            std::vector<std::size_t> chained;
            for (auto i : candidates) {
                if (!applicable(services[i], initial)) chained.push_back(i);
            }
            const auto &pool = chained.empty() || step == 0 ? candidates : chained;
            const std::size_t chosen = pool[pick(rng, pool.size())];
            used.insert(chosen);
            produced.clear();
            for (const auto &o : services[chosen].outputs) {
                produced.push_back(o.type);
                available.push_back(o.type);
            }
        }
        std::shuffle(produced.begin(), produced.end(), rng);
        for (const auto &out : produced) {
            std::string goal = generalize(rng, out);
            if (covered(goal, initial)) goal = out;
            if (covered(goal, initial)) continue;
            AbstractRequest r;
            r.available_inputs = initial;
            r.goal_outputs = {goal};
            r.max_plans = std::max<std::size_t>(1, config.k);
            r.extra_levels = config.extra_levels;
            return r;
        }
        return std::nullopt;
    }

    std::optional<AbstractRequest> adversarial(std::mt19937_64 &rng) const {
        std::set<ClassId> producible;
        for (const auto &s : services) {
            for (const auto &o : s.outputs) {
                for (const auto &a : onto.ancestors(onto.require_class(o.type))) producible.insert(a.id);
            }
        }
        std::vector<ClassId> pool;
        for (ClassId c : classes) {
            if (!producible.count(c)) pool.push_back(c);
        }
        if (pool.empty()) return std::nullopt;
        AbstractRequest r;
        r.available_inputs = {onto.class_iri(classes[pick(rng, classes.size())])};
        r.goal_outputs = {onto.class_iri(pool[pick(rng, pool.size())])};
        if (covered(r.goal_outputs[0], r.available_inputs)) return std::nullopt;
        r.max_plans = std::max<std::size_t>(1, config.k);
        r.extra_levels = config.extra_levels;
        return r;
    }
};

}  // namespace

void BenchConfig::validate() const {
    if (!ontology_file && ontology.classes < 2) throw Error(ErrorCode::Usage, "class count must be at least 2");
    if (!ontology_file && (ontology.max_depth == 0 || ontology.branching == 0)) {
        throw Error(ErrorCode::Usage, "max depth and branching must be positive");
    }
    if (services == 0) throw Error(ErrorCode::Usage, "service count must be positive");
    if (max_inputs == 0 || max_outputs == 0) throw Error(ErrorCode::Usage, "max inputs/outputs must be positive");
    if (repetitions == 0) throw Error(ErrorCode::Usage, "repetitions must be positive");
    if (threads == 0 || threads > 256) throw Error(ErrorCode::Usage, "threads must be between 1 and 256");
}

namespace {

// nlohmann happily converts -1 to a huge size_t
void reject_negative(const Json &j, const std::string &where) {
    if (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0) {
        throw Error(ErrorCode::Usage, "bench config: '" + where + "' must not be negative");
    }
    if (j.is_object()) {
        for (const auto &[k, v] : j.items()) reject_negative(v, k);
    }
}

}  // namespace

BenchConfig parse_bench_config(const Json &j) {
    if (!j.is_object()) throw Error(ErrorCode::Parse, "a bench config is an object");
    reject_negative(j, "");
    BenchConfig c;
    try {
        if (auto it = j.find("ontology"); it != j.end()) {
            if (it->is_string()) {
                c.ontology_file = it->get<std::string>();
            } else {
                c.ontology.classes = it->value("classes", c.ontology.classes);
                c.ontology.max_depth = it->value("max_depth", c.ontology.max_depth);
                c.ontology.branching = it->value("branching", c.ontology.branching);
                c.ontology.extra_parent_probability =
                    it->value("extra_parent_probability", c.ontology.extra_parent_probability);
                c.ontology.properties = it->value("properties", c.ontology.properties);
                c.ontology.annotations = it->value("annotations", c.ontology.annotations);
                c.ontology.seed = it->value("seed", c.ontology.seed);
            }
        }
        c.services = j.value("services", c.services);
        c.max_inputs = j.value("max_inputs", c.max_inputs);
        c.max_outputs = j.value("max_outputs", c.max_outputs);
        c.vocabulary = j.value("vocabulary", c.vocabulary);
        if (auto it = j.find("requests"); it != j.end()) {
            if (it->is_number()) {
                c.requests = it->get<std::size_t>();
            } else {
                c.requests = it->value("count", c.requests);
                c.request_seed = it->value("seed", c.request_seed);
                c.adversarial_requests = it->value("adversarial", c.adversarial_requests);
                c.chain_length = it->value("chain_length", c.chain_length);
            }
        }
        c.service_seed = j.value("service_seed", c.service_seed);
        c.k = j.value("k", c.k);
        c.extra_levels = j.value("extra_levels", c.extra_levels);
        c.repetitions = j.value("repetitions", c.repetitions);
        c.count_cap = j.value("count_cap", c.count_cap);
        c.count_work = j.value("count_work", c.count_work);
        c.threads = j.value("threads", c.threads);
    } catch (const Json::exception &e) {
        throw Error(ErrorCode::Parse, std::string("bench config: ") + e.what());
    }
    c.validate();
    return c;
}

void to_json(Json &j, const BenchConfig &v) {
    j = Json{{"services", v.services},
             {"max_inputs", v.max_inputs},
             {"max_outputs", v.max_outputs},
             {"vocabulary", v.vocabulary},
             {"requests",
              {{"count", v.requests},
               {"seed", v.request_seed},
               {"adversarial", v.adversarial_requests},
               {"chain_length", v.chain_length}}},
             {"service_seed", v.service_seed},
             {"k", v.k},
             {"count_cap", v.count_cap},
             {"count_work", v.count_work},
             {"threads", v.threads},
             {"extra_levels", v.extra_levels},
             {"repetitions", v.repetitions}};
    if (v.ontology_file) {
        j["ontology"] = *v.ontology_file;
    } else {
        j["ontology"] = {{"classes", v.ontology.classes},
                         {"max_depth", v.ontology.max_depth},
                         {"branching", v.ontology.branching},
                         {"extra_parent_probability", v.ontology.extra_parent_probability},
                         {"properties", v.ontology.properties},
                         {"annotations", v.ontology.annotations},
                         {"seed", v.ontology.seed}};
    }
}

GeneratedDomain generate_domain(const BenchConfig &config) {
    config.validate();
    GeneratedDomain out;
    OntologyDocument doc;
    if (config.ontology_file) {
        out.ontology_text = read_text(*config.ontology_file);
        doc = parse_ontology(out.ontology_text);
    } else {
        doc = synthetic_ontology(config.ontology);
        out.ontology_text = to_triples_text(doc);
    }
    out.triples = doc.triples.size();

    OntologyStore onto;
    onto.load(doc);
    onto.classify();

    Generator gen{config, onto, {}, {}};
    for (ClassId c = 0; c < onto.class_count(); ++c) {
        const auto &iri = onto.class_iri(c);
        if (std::find(OntologyStore::kPrimitiveClasses.begin(), OntologyStore::kPrimitiveClasses.end(), iri) ==
            OntologyStore::kPrimitiveClasses.end()) {
            gen.classes.push_back(c);
        }
    }
    if (gen.classes.size() < 2) throw Error(ErrorCode::Usage, "ontology has fewer than 2 classes");

    std::mt19937_64 rng(config.service_seed);
    if (config.vocabulary >= 2 && config.vocabulary < gen.classes.size()) {
        std::shuffle(gen.classes.begin(), gen.classes.end(), rng);
        gen.classes.resize(config.vocabulary);
        std::sort(gen.classes.begin(), gen.classes.end());
    }
    const std::size_t width = std::to_string(config.services).size();
    auto params = [&](std::size_t max, const char *prefix) {
        std::vector<Param> ps;
        const std::size_t n = 1 + pick(rng, max);
        std::set<ClassId> seen;
        while (ps.size() < n) {
            ClassId c = gen.classes[pick(rng, gen.classes.size())];
            if (!seen.insert(c).second) continue;
            ps.push_back({prefix + std::to_string(ps.size() + 1), onto.class_iri(c)});
        }
        return ps;
    };
    for (std::size_t s = 0; s < config.services; ++s) {
        ServiceProfile p;
        p.id = padded("svc", s, width);
        p.name = p.id;
        p.inputs = params(config.max_inputs, "in");
        p.outputs = params(config.max_outputs, "out");
        p.nonfunctional["cost"] = static_cast<double>(1 + pick(rng, 100));
        gen.services.push_back(std::move(p));
    }

    for (std::size_t i = 0; i < config.requests; ++i) {
        std::mt19937_64 r(config.request_seed * 1000003 + i);
        for (int attempt = 0; attempt < 20; ++attempt) {
            if (auto req = gen.satisfiable(r)) {
                out.requests.push_back({std::move(*req), false});
                break;
            }
        }
    }
    for (std::size_t i = 0; i < config.adversarial_requests; ++i) {
        std::mt19937_64 r(config.request_seed * 1000033 + i);
        if (auto req = gen.adversarial(r)) out.requests.push_back({std::move(*req), true});
    }
    out.services = std::move(gen.services);
    return out;
}

PhaseStats summarize(std::vector<double> samples) {
    PhaseStats s;
    if (samples.empty()) return s;
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    s.min_ms = samples.front();
    s.max_ms = samples.back();
    s.median_ms = n % 2 ? samples[n / 2] : (samples[n / 2 - 1] + samples[n / 2]) / 2;
    return s;
}

BenchReport run_benchmark(const BenchConfig &config) {
    return run_benchmark(config, generate_domain(config));
}

BenchReport run_benchmark(const BenchConfig &config, const GeneratedDomain &domain) {
    config.validate();
    const auto start = Clock::now();
    const std::string bundle = Json{{"services", domain.services}}.dump();

    BenchReport report;
    report.services = domain.services.size();
    report.triples = domain.triples;
    report.requests = domain.requests.size();
    std::vector<double> load, reason, request;

    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        auto t = Clock::now();
        auto onto = std::make_shared<OntologyStore>();
        onto->load(parse_ontology(domain.ontology_text));
        auto reg = std::make_shared<Registry>();
        for (auto &p : parse_profiles(bundle)) reg->register_service(std::move(p), *onto);
        load.push_back(ms_since(t));

        t = Clock::now();
        onto->classify();
        reason.push_back(ms_since(t));
        report.classes = onto->class_count();

        std::vector<RequestOutcome> outcomes;
        double total = 0;
        for (std::size_t i = 0; i < domain.requests.size(); ++i) {
            RequestOutcome o;
            o.index = i;
            o.unsatisfiable = domain.requests[i].unsatisfiable;
            const auto rt = Clock::now();
            auto graph = build_graph(domain.requests[i].request, reg, onto);
            o.reachable = graph->goals_reachable_at(graph->last_level());
            if (config.k > 0 && o.reachable) {
                PlanCursor cursor(graph);
                o.plans = cursor.next(config.k).size();
            }
            o.ms = ms_since(rt);
            total += o.ms;
            o.levels = graph->last_level() + 1;
            o.nodes = graph->node_count();
            for (std::size_t l = 0; l <= graph->last_level(); ++l) {
                o.mutex_pairs += graph->prop_mutex_count(l);
                if (l >= 1) o.mutex_pairs += graph->action_mutex_count(l);
            }
            outcomes.push_back(o);
        }
        request.push_back(total);
        report.outcomes = std::move(outcomes);
    }
    report.threads = config.threads;
    if (config.threads > 1) {
        auto onto = std::make_shared<OntologyStore>();
        onto->load(parse_ontology(domain.ontology_text));
        onto->classify();
        auto reg = std::make_shared<Registry>();
        for (const auto &p : domain.services) reg->register_service(p, *onto);
        std::vector<double> wall;
        for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
            std::atomic<std::size_t> next{0};
            const auto t = Clock::now();
            {
                std::vector<std::jthread> pool;
                for (std::size_t w = 0; w < config.threads; ++w) {
                    pool.emplace_back([&] {
                        for (std::size_t i; (i = next++) < domain.requests.size();) {
                            auto graph = build_graph(domain.requests[i].request, reg, onto);
                            if (config.k > 0 && graph->goals_reachable_at(graph->last_level()))
                                PlanCursor(graph).next(config.k);
                        }
                    });
                }
            }
            wall.push_back(ms_since(t));
        }
        report.parallel_request = summarize(wall);
    }
    if (config.count_cap > 0 && !report.outcomes.empty()) {
        auto onto = std::make_shared<OntologyStore>();
        onto->load(parse_ontology(domain.ontology_text));
        onto->classify();
        auto reg = std::make_shared<Registry>();
        for (const auto &p : domain.services) reg->register_service(p, *onto);
        for (auto &o : report.outcomes) {
            if (!o.reachable) continue;
            AbstractRequest r = domain.requests[o.index].request;
            r.extra_levels = 0;
            auto count = [&](std::shared_ptr<PlanGraph> g) {
                PlanCursor cursor(std::move(g));
                cursor.set_work_limit(config.count_work);
                const std::size_t n = cursor.next(config.count_cap).size();
                if (cursor.starved() || (n == config.count_cap && !cursor.exhausted())) o.counts_truncated = true;
                return n;
            };
            auto graph = build_graph(r, reg, onto);
            const std::size_t first = graph->last_level();
            o.minimal_plans = count(graph);
            while (!graph->leveled_off() && !graph->horizon_hit()) graph->expand();
            r.extra_levels = graph->last_level() - first;
            o.level_off_plans = count(build_graph(r, reg, onto));
        }
    }
    for (const auto &o : report.outcomes) {
        report.minimal_solutions += o.minimal_plans;
        report.level_off_solutions += o.level_off_plans;
        if (o.counts_truncated) ++report.truncated_counts;
        report.solutions += o.plans;
        if (config.k > 0 ? o.plans > 0 : o.reachable) ++report.solved;
    }
    report.load = summarize(load);
    report.reasoning = summarize(reason);
    report.request = summarize(request);
    report.total_ms = ms_since(start);
    return report;
}

std::string BenchReport::csv_header() const { return "services,solutions,load_ms,reason_ms,request_ms"; }

std::string BenchReport::csv_row() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.1f,%.1f,%.1f", services, solutions, load.median_ms,
                  reasoning.median_ms, request.median_ms);
    return buf;
}

std::string BenchReport::table() const {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-18s %16s %20s %20s\n", "services(solns)", "loading ms",
                  "reasoning ms", "requests ms");
    out += buf;
    auto cell = [](const PhaseStats &s) {
        char c[64];
        std::snprintf(c, sizeof c, "%.1f [%.1f-%.1f]", s.median_ms, s.min_ms, s.max_ms);
        return std::string(c);
    };
    std::string label = std::to_string(services) + "(" + std::to_string(solutions) + ")";
    std::snprintf(buf, sizeof buf, "%-18s %16s %20s %20s\n", label.c_str(), cell(load).c_str(),
                  cell(reasoning).c_str(), cell(request).c_str());
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "classes=%zu triples=%zu requests=%zu solved=%zu minimal_solutions=%zu level_off_solutions=%zu"
                  " truncated=%zu\n",
                  classes, triples, requests, solved, minimal_solutions, level_off_solutions, truncated_counts);
    out += buf;
    if (parallel_request) {
        std::snprintf(buf, sizeof buf, "requests on %zu threads (wall ms): %s\n", threads,
                      cell(*parallel_request).c_str());
        out += buf;
    }
    return out;
}

void to_json(Json &j, const BenchReport &v) {
    auto phase = [](const PhaseStats &s) {
        return Json{{"median_ms", s.median_ms}, {"min_ms", s.min_ms}, {"max_ms", s.max_ms}};
    };
    Json outcomes = Json::array();
    for (const auto &o : v.outcomes) {
        outcomes.push_back({{"index", o.index},
                            {"unsatisfiable", o.unsatisfiable},
                            {"reachable", o.reachable},
                            {"plans", o.plans},
                            {"levels", o.levels},
                            {"nodes", o.nodes},
                            {"mutex_pairs", o.mutex_pairs},
                            {"ms", o.ms},
                            {"minimal_plans", o.minimal_plans},
                            {"level_off_plans", o.level_off_plans},
                            {"counts_truncated", o.counts_truncated}});
    }
    j = Json{{"services", v.services},   {"classes", v.classes},  {"triples", v.triples},
             {"requests", v.requests},   {"solutions", v.solutions}, {"solved", v.solved},
             {"minimal_solutions", v.minimal_solutions}, {"level_off_solutions", v.level_off_solutions},
             {"truncated_counts", v.truncated_counts},
             {"load", phase(v.load)},    {"reasoning", phase(v.reasoning)},
             {"request", phase(v.request)}, {"total_ms", v.total_ms}, {"outcomes", outcomes},
             {"threads", v.threads}};
    if (v.parallel_request) j["parallel_request"] = phase(*v.parallel_request);
}

}  // namespace semcomp
