#include "soilcn/network.hpp"

#include "soilcn/common.hpp"

namespace soilcn {

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Aqueous: return "aqueous";
        case Phase::Gaseous: return "gaseous";
        case Phase::Protected: return "protected";
        case Phase::Biomass: return "biomass";
    }
    return "?";
}

const char* reaction_kind_name(ReactionKind k) {
    switch (k) {
        case ReactionKind::Monod: return "monod";
        case ReactionKind::Uptake: return "uptake";
        case ReactionKind::Fixation: return "fixation";
        case ReactionKind::ChemoDenit: return "chemo_denit";
        case ReactionKind::FirstOrder: return "first_order";
        case ReactionKind::Protect: return "protect";
        case ReactionKind::Unprotect: return "unprotect";
        case ReactionKind::Gas: return "gas";
        case ReactionKind::Litter: return "litter";
    }
    return "?";
}

int ReactionNetwork::species_index(const std::string& id) const {
    auto it = species_map.find(id);
    return it == species_map.end() ? -1 : it->second;
}

int ReactionNetwork::param_index(const std::string& name) const {
    for (size_t i = 0; i < params.size(); ++i)
        if (params[i].name == name) return static_cast<int>(i);
    return -1;
}

int ReactionNetwork::pool_index(const std::string& name) const {
    for (size_t i = 0; i < pools.size(); ++i)
        if (pools[i] == name) return static_cast<int>(i);
    return -1;
}

int ReactionNetwork::stress_index(const std::string& name) const {
    for (size_t i = 0; i < stress.size(); ++i)
        if (stress[i].name == name) return static_cast<int>(i);
    return -1;
}

void ReactionNetwork::compile() {
    species_map.clear();
    for (size_t i = 0; i < species.size(); ++i)
        species_map[species[i].id] = static_cast<int>(i);

    auto resolve = [&](double& value, int shared) {
        if (shared >= 0) value = params[shared].value;
    };

    kinetic.clear();
    gases.clear();
    litters.clear();
    uptakes.clear();
    fixation = -1;

    // Protect/unprotect declarations join on (aqueous, protected).
    std::vector<ProtectionPair> joined;
    auto pair_slot = [&](int aq, int prot) -> ProtectionPair& {
        for (auto& p : joined)
            if (p.aqueous == aq && p.protected_sp == prot) return p;
        joined.push_back({});
        joined.back().aqueous = aq;
        joined.back().protected_sp = prot;
        return joined.back();
    };

    for (size_t i = 0; i < reactions.size(); ++i) {
        Reaction& rx = reactions[i];
        resolve(rx.k, rx.k_shared);
        for (auto& t : rx.substrates) resolve(t.value, t.shared);
        for (auto& t : rx.inhibitors) resolve(t.value, t.shared);
        rx.availability.clear();
        if (rx.kind == ReactionKind::Monod) {
            for (const auto& [sp, coeff] : rx.stoich) {
                if (coeff >= 0 || sp == rx.actor) continue;
                bool limited = false;
                for (const auto& t : rx.substrates)
                    if (t.species == sp) limited = true;
                if (!limited) rx.availability.push_back(sp);
            }
        }
        switch (rx.kind) {
            case ReactionKind::Monod:
            case ReactionKind::ChemoDenit:
            case ReactionKind::FirstOrder:
                kinetic.push_back(static_cast<int>(i));
                break;
            case ReactionKind::Protect: {
                auto& p = pair_slot(rx.aqueous, rx.protected_sp);
                p.kp = rx.k;
                p.pool = rx.capacity_pool;
                p.protect_rx = static_cast<int>(i);
                break;
            }
            case ReactionKind::Unprotect: {
                auto& p = pair_slot(rx.aqueous, rx.protected_sp);
                p.k_unp = rx.k;
                p.unprotect_rx = static_cast<int>(i);
                break;
            }
            case ReactionKind::Gas: {
                GasPair g;
                g.gas = rx.gas_sp;
                g.aqueous = rx.aq_partner;
                g.logk = rx.logk;
                g.rx = static_cast<int>(i);
                gases.push_back(g);
                break;
            }
            case ReactionKind::Litter:
                litters.push_back(static_cast<int>(i));
                break;
            case ReactionKind::Uptake:
                uptakes.push_back(static_cast<int>(i));
                break;
            case ReactionKind::Fixation:
                fixation = static_cast<int>(i);
                break;
        }
    }
    pairs = std::move(joined);
}

}  // namespace soilcn
