#include "semcomp/planner.hpp"

#include "fnv.hpp"
#include "semcomp/error.hpp"

#include <algorithm>
#include <map>

namespace semcomp {

namespace {

template <typename T>
void sort_unique(std::vector<T> &v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool contains_sorted(std::span<const std::uint32_t> v, std::uint32_t x) {
    return std::binary_search(v.begin(), v.end(), x);
}

void append_signature(std::string &key, const std::vector<SignatureEntry> &signature) {
    for (const auto &e : signature) {
        key += '\x1e';
        key += e.property;
        key += e.literal ? "\x1fL\x1f" : "\x1fT\x1f";
        key += e.value;
    }
}

std::string pattern_text(const StatusPattern &p) {
    std::string out = p.status_class;
    for (const auto &[property, b] : p.bindings) {
        out += '|' + property + (b.kind == Binding::Kind::Literal ? "=\"" : "=") + b.value;
    }
    return out;
}

// Stable textual form of the request for the basis hash.
std::string request_text(const AbstractRequest &r) {
    std::string out;
    auto list = [&](const char *tag, const std::vector<std::string> &items) {
        out += tag;
        for (const auto &i : items) out += i + ';';
    };
    list("in:", r.available_inputs);
    out += "init:";
    for (const auto &s : r.initial_statuses) out += pattern_text(s) + ';';
    list("out:", r.goal_outputs);
    out += "goal:";
    for (const auto &s : r.goal_statuses) out += pattern_text(s) + ';';
    out += "nf:";
    for (const auto &f : r.nonfunctional_filters) {
        out += f.attribute + std::string(to_string(f.comparator));
        std::visit([&](const auto &v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) out += std::to_string(v);
            else if constexpr (std::is_same_v<V, std::string>) out += '"' + v;
            else out += '<' + v.iri;
        }, f.value);
        out += ';';
    }
    out += "h:" + (r.horizon ? std::to_string(*r.horizon) : std::string("-"));
    out += "x:" + std::to_string(r.extra_levels);
    return out;
}

}  // namespace

std::size_t Plan::action_count() const {
    std::size_t n = 0;
    for (const auto &l : layers) n += l.size();
    return n;
}

std::vector<SignatureEntry> Domain::signature_of(const StatusPattern &pattern,
                                                 const ServiceProfile *owner) const {
    std::vector<SignatureEntry> out;
    for (const auto &[property, binding] : pattern.bindings) {
        SignatureEntry e;
        e.property = property;
        if (binding.kind == Binding::Kind::Literal) {
            e.literal = true;
            e.value = binding.value;
        } else {
            if (owner) {
                if (const Param *p = owner->find_param(binding.value)) e.value = p->type;
            } else {
                e.value = binding.value;
            }
            if (!e.value.empty()) e.type = ontology_->find_class(e.value);
        }
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Requirement Domain::pattern_requirement(const StatusPattern &pattern,
                                        const ServiceProfile *owner) const {
    return {PropKind::Status, ontology_->find_class(pattern.status_class), pattern.status_class,
            signature_of(pattern, owner)};
}

std::optional<Proposition> Domain::pattern_proposition(const StatusPattern &pattern,
                                                       const ServiceProfile *owner) const {
    auto cls = ontology_->find_class(pattern.status_class);
    if (!cls) return std::nullopt;
    return Proposition{PropKind::Status, *cls, signature_of(pattern, owner)};
}

PropId Domain::intern_prop(Proposition prop) {
    std::string key = prop.kind == PropKind::Avail ? "A" : "S";
    key += std::to_string(prop.type);
    append_signature(key, prop.signature);
    auto [it, inserted] = prop_index_.try_emplace(std::move(key), static_cast<PropId>(props_.size()));
    if (inserted) props_.push_back(std::move(prop));
    return it->second;
}

ReqId Domain::intern_req(Requirement req) {
    std::string key = req.kind == PropKind::Avail ? "A" : "S";
    key += req.type_iri;
    append_signature(key, req.signature);
    auto [it, inserted] = req_index_.try_emplace(std::move(key), static_cast<ReqId>(reqs_.size()));
    if (inserted) reqs_.push_back(std::move(req));
    return it->second;
}

std::optional<PropId> Domain::find_prop(const Proposition &prop) const {
    std::string key = prop.kind == PropKind::Avail ? "A" : "S";
    key += std::to_string(prop.type);
    auto sig = prop.signature;
    std::sort(sig.begin(), sig.end());
    append_signature(key, sig);
    auto it = prop_index_.find(key);
    if (it == prop_index_.end()) return std::nullopt;
    return it->second;
}

bool Domain::matches(const Proposition &prop, const Requirement &req) const {
    if (prop.kind != req.kind || !req.type) return false;
    if (!ontology_->subsumes(*req.type, prop.type)) return false;
    for (const auto &want : req.signature) {
        bool met = std::any_of(prop.signature.begin(), prop.signature.end(), [&](const auto &have) {
            if (!ontology_->property_subsumes(want.property, have.property)) return false;
            if (want.literal) return have.literal && have.value == want.value;
            return !have.literal && have.type && want.type &&
                   ontology_->subsumes(*want.type, *have.type);
        });
        if (!met) return false;
    }
    return true;
}

bool Domain::matches(PropId prop, ReqId req) const {
    return contains_sorted(supporters_[req], prop);
}

bool Domain::statically_mutex(ActionId a, ActionId b) const {
    return contains_sorted(static_mutex_[a], b);
}

std::optional<ActionId> Domain::find_action(const ActionRef &ref) const {
    auto it = std::lower_bound(actions_.begin(), actions_.end(), ref,
                               [](const CompiledAction &a, const ActionRef &r) { return a.ref < r; });
    if (it == actions_.end() || it->ref != ref) return std::nullopt;
    return static_cast<ActionId>(it - actions_.begin());
}

std::string Domain::describe(PropId prop) const {
    const auto &p = props_[prop];
    std::string out = p.kind == PropKind::Avail ? "Avail(" : "Status(";
    out += ontology_->class_iri(p.type);
    if (!p.signature.empty()) {
        out += " {";
        for (std::size_t i = 0; i < p.signature.size(); ++i) {
            const auto &e = p.signature[i];
            if (i) out += ", ";
            out += e.property + "=" + (e.literal ? "\"" + e.value + "\"" : e.value);
        }
        out += "}";
    }
    return out + ")";
}

std::string Domain::describe_requirement(ReqId req) const {
    const auto &r = reqs_[req];
    std::string out = r.kind == PropKind::Avail ? "input of type " : "status ";
    out += r.type_iri;
    if (!r.signature.empty()) {
        out += " {";
        for (std::size_t i = 0; i < r.signature.size(); ++i) {
            const auto &e = r.signature[i];
            if (i) out += ", ";
            out += e.property + "=" + (e.literal ? "\"" + e.value + "\"" : e.value);
        }
        out += "}";
    }
    return out;
}

std::shared_ptr<const Domain> Domain::compile(std::shared_ptr<const Registry> registry,
                                              std::shared_ptr<const OntologyStore> ontology,
                                              const AbstractRequest &request, bool apply_filters) {
    if (!ontology->is_classified()) {
        throw Error(ErrorCode::StaleClosure, "ontology must be classified before planning");
    }
    std::shared_ptr<Domain> d(new Domain());
    d->registry_ = std::move(registry);
    d->ontology_ = std::move(ontology);
    d->request_ = request;
    const OntologyStore &onto = *d->ontology_;

    for (const auto &iri : request.available_inputs) {
        if (auto c = onto.find_class(iri)) {
            d->initial_.push_back(d->intern_prop({PropKind::Avail, *c, {}}));
        } else {
            d->warnings_.push_back("available input '" + iri + "' is not a known class; ignored");
        }
    }
    for (const auto &s : request.initial_statuses) {
        if (auto p = d->pattern_proposition(s, nullptr)) {
            d->initial_.push_back(d->intern_prop(std::move(*p)));
        } else {
            d->warnings_.push_back("initial status '" + s.status_class +
                                   "' is not a known class; ignored");
        }
    }
    sort_unique(d->initial_);

    struct Pending {
        std::vector<Requirement> deletes;
    };
    std::vector<Pending> pending;
    for (const auto &[id, profile] : d->registry_->services()) {
        if (apply_filters && !passes_all(profile, request.nonfunctional_filters, onto)) continue;
        std::vector<const ConditionalEffect *> effects;
        for (const auto &e : profile.effects) effects.push_back(&e);
        std::sort(effects.begin(), effects.end(),
                  [](const auto *a, const auto *b) { return a->label < b->label; });
        for (const auto *effect : effects) {
            CompiledAction action;
            action.ref = {id, effect->label};
            for (const auto &in : profile.inputs) {
                action.needs.push_back(
                    d->intern_req({PropKind::Avail, onto.find_class(in.type), in.type, {}}));
            }
            for (const auto &pre : profile.preconditions) {
                action.needs.push_back(d->intern_req(d->pattern_requirement(pre, &profile)));
            }
            for (const auto &out : profile.outputs) {
                if (auto c = onto.find_class(out.type)) {
                    action.adds.push_back(d->intern_prop({PropKind::Avail, *c, {}}));
                }
            }
            for (const auto &add : effect->adds) {
                if (auto p = d->pattern_proposition(add, &profile)) {
                    action.adds.push_back(d->intern_prop(std::move(*p)));
                }
            }
            sort_unique(action.needs);
            sort_unique(action.adds);
            Pending pend;
            for (const auto &del : effect->deletes) {
                pend.deletes.push_back(d->pattern_requirement(del, &profile));
            }
            d->actions_.push_back(std::move(action));
            pending.push_back(std::move(pend));
        }
    }

    for (const auto &g : request.goal_outputs) {
        ReqId r = d->intern_req({PropKind::Avail, onto.find_class(g), g, {}});
        if (!d->reqs_[r].type) d->warnings_.push_back("goal output '" + g + "' is not a known class");
        d->goals_.push_back(r);
    }
    for (const auto &g : request.goal_statuses) {
        ReqId r = d->intern_req(d->pattern_requirement(g, nullptr));
        if (!d->reqs_[r].type) {
            d->warnings_.push_back("goal status '" + g.status_class + "' is not a known class");
        }
        d->goals_.push_back(r);
    }
    sort_unique(d->goals_);

    const std::size_t np = d->props_.size();
    const std::size_t nr = d->reqs_.size();
    const std::size_t na = d->actions_.size();

    // Avail requirements are indexed by class so each proposition only visits
    // its ancestors; status requirements are few and scanned directly.
    d->supporters_.assign(nr, {});
    std::unordered_map<ClassId, std::vector<ReqId>> avail_by_class;
    std::vector<ReqId> status_reqs;
    for (ReqId r = 0; r < nr; ++r) {
        const auto &req = d->reqs_[r];
        if (!req.type) continue;
        if (req.kind == PropKind::Avail) avail_by_class[*req.type].push_back(r);
        else status_reqs.push_back(r);
    }
    for (PropId p = 0; p < np; ++p) {
        const auto &prop = d->props_[p];
        if (prop.kind == PropKind::Avail) {
            for (const auto &a : onto.ancestors(prop.type)) {
                auto it = avail_by_class.find(a.id);
                if (it == avail_by_class.end()) continue;
                for (ReqId r : it->second) d->supporters_[r].push_back(p);
            }
        } else {
            for (ReqId r : status_reqs) {
                if (d->matches(prop, d->reqs_[r])) d->supporters_[r].push_back(p);
            }
        }
    }

    // Deletes resolve against the whole universe; an action never deletes
    // what it adds itself.
    for (ActionId a = 0; a < na; ++a) {
        auto &action = d->actions_[a];
        for (const auto &del : pending[a].deletes) {
            for (PropId p = 0; p < np; ++p) {
                if (d->matches(d->props_[p], del) && !contains_sorted(action.adds, p)) {
                    action.deletes.push_back(p);
                }
            }
        }
        sort_unique(action.deletes);
    }

    d->adders_.assign(np, {});
    d->deleters_.assign(np, {});
    d->needers_.assign(nr, {});
    for (ActionId a = 0; a < na; ++a) {
        for (PropId p : d->actions_[a].adds) d->adders_[p].push_back(a);
        for (PropId p : d->actions_[a].deletes) d->deleters_[p].push_back(a);
        for (ReqId r : d->actions_[a].needs) d->needers_[r].push_back(a);
    }
    d->achievers_.assign(nr, {});
    std::vector<std::vector<ReqId>> supported_by(np);
    for (ReqId r = 0; r < nr; ++r) {
        for (PropId p : d->supporters_[r]) {
            supported_by[p].push_back(r);
            auto &ach = d->achievers_[r];
            ach.insert(ach.end(), d->adders_[p].begin(), d->adders_[p].end());
        }
        sort_unique(d->achievers_[r]);
    }

    d->static_mutex_.assign(na, {});
    auto relate = [&](ActionId a, ActionId b) {
        if (a == b) return;
        d->static_mutex_[a].push_back(b);
        d->static_mutex_[b].push_back(a);
    };
    for (ActionId a = 0; a < na; ++a) {
        for (ActionId b = a + 1; b < na && d->actions_[b].ref.service == d->actions_[a].ref.service; ++b) {
            relate(a, b);
        }
    }
    for (PropId p = 0; p < np; ++p) {
        for (ActionId del : d->deleters_[p]) {
            for (ActionId add : d->adders_[p]) relate(del, add);
            for (ReqId r : supported_by[p]) {
                for (ActionId user : d->needers_[r]) relate(del, user);
            }
        }
    }
    for (auto &m : d->static_mutex_) sort_unique(m);

    std::uint64_t h = detail::fnv1a(std::to_string(d->registry_->version()) + "/" +
                                    std::to_string(onto.version()) + "/" +
                                    (apply_filters ? "f/" : "u/"));
    d->basis_ = detail::fnv1a(request_text(request), h);
    return d;
}

SimulationResult simulate(const Domain &domain, const std::vector<std::vector<ActionId>> &layers) {
    std::vector<char> state(domain.props().size(), 0);
    for (PropId p : domain.initial()) state[p] = 1;
    auto met = [&](ReqId r) {
        for (PropId p : domain.supporters(r)) {
            if (state[p]) return true;
        }
        return false;
    };
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto &layer = layers[i];
        const std::string where = "layer " + std::to_string(i + 1);
        for (std::size_t x = 0; x < layer.size(); ++x) {
            for (std::size_t y = x + 1; y < layer.size(); ++y) {
                if (layer[x] == layer[y] || domain.statically_mutex(layer[x], layer[y])) {
                    return {false, where + ": " + domain.actions()[layer[x]].ref.describe() +
                                       " conflicts with " + domain.actions()[layer[y]].ref.describe()};
                }
            }
        }
        for (ActionId a : layer) {
            for (ReqId r : domain.actions()[a].needs) {
                if (!met(r)) {
                    return {false, where + ": " + domain.actions()[a].ref.describe() + " lacks " +
                                       domain.describe_requirement(r)};
                }
            }
        }
        for (ActionId a : layer) {
            for (PropId p : domain.actions()[a].deletes) state[p] = 0;
        }
        for (ActionId a : layer) {
            for (PropId p : domain.actions()[a].adds) state[p] = 1;
        }
    }
    for (ReqId g : domain.goals()) {
        if (!met(g)) return {false, "goal " + domain.describe_requirement(g) + " not reached"};
    }
    return {true, {}};
}

Plan to_plan(const Domain &domain, const std::vector<std::vector<ActionId>> &layers) {
    Plan plan;
    for (const auto &layer : layers) {
        std::vector<ActionRef> refs;
        for (ActionId a : layer) {
            refs.push_back(domain.actions()[a].ref);
            plan.assumptions.insert(domain.actions()[a].ref);
        }
        std::sort(refs.begin(), refs.end());
        plan.layers.push_back(std::move(refs));
    }
    plan.goal_outputs = domain.request().goal_outputs;
    plan.goal_statuses = domain.request().goal_statuses;
    return plan;
}

}  // namespace semcomp
