#pragma once

#include "oracles.hpp"
#include "semcomp/assist.hpp"

#include <memory>

namespace oracle {

// The toy domain loaded into fresh engine snapshots.
struct Loaded {
    std::shared_ptr<semcomp::OntologyStore> ontology;
    std::shared_ptr<semcomp::Registry> registry;
    semcomp::AbstractRequest request;

    semcomp::Snapshot snapshot() const { return {ontology, registry}; }
};

inline Loaded load(const ToyDomain &d) {
    Loaded l{std::make_shared<semcomp::OntologyStore>(), std::make_shared<semcomp::Registry>(), d.request()};
    l.ontology->load(d.ontology());
    l.ontology->classify();
    for (auto &p : d.profiles()) l.registry->register_service(p, *l.ontology);
    return l;
}

}  // namespace oracle
