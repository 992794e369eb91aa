#ifndef SOILCN_NETWORK_HPP
#define SOILCN_NETWORK_HPP

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace soilcn {

enum class Phase { Aqueous, Gaseous, Protected, Biomass };

const char* phase_name(Phase p);

// One chemical species of the network. Biomass species follow the
// C_{5x}H_{8x}O_{2x}N convention, so carbon = 5x and nitrogen = 1.
struct Species {
    std::string id;
    std::string name;
    Phase phase = Phase::Aqueous;
    double carbon = 0.0;    // C atoms per formula unit
    double nitrogen = 0.0;  // N atoms per formula unit
    double x = 0.0;         // biomass stoichiometry factor, biomass only
    int stress = -1;        // index into ReactionNetwork::stress, biomass only
    bool mineral = false;   // inorganic C carrier (HCO3-), excluded from C stocks
    bool inert = false;     // excluded from the inorganic-N stock (N2)
};

// Moisture stress response f_S(S_l) of one microbial group.
// Hump: rises over [s_min, s_opt], falls over [s_opt, s_max], 1 at s_opt.
// Increasing: rises over [s_min, s_opt] and stays at 1 above s_opt.
struct StressProfile {
    enum class Form { Hump, Increasing };
    std::string name;
    Form form = Form::Hump;
    double s_min = 0.05;
    double s_opt = 0.65;
    double s_max = 1.0;
    double a = 1.0;  // exponent on the rising limb
    double b = 1.0;  // exponent on the falling limb (hump only)
};

// A named constant shared by several reactions (k_p, K_M,O2, ...).
struct SharedParam {
    std::string name;
    double value = 0.0;
    std::string unit;
    std::string group;
    int line = 0;
};

// One Michaelis-Menten / inhibition factor. `shared` >= 0 means the constant
// lives in ReactionNetwork::params; `value` always holds the resolved number.
struct MonodTerm {
    int species = -1;
    double value = 0.0;
    int shared = -1;
};

enum class ReactionKind {
    Monod,       // Michaelis-Menten-Monod, optional biomass actor
    Uptake,      // plant uptake, actor-less Michaelis-Menten, root-scaled
    Fixation,    // zero-order areal N input, moisture-limited
    ChemoDenit,  // abiotic NO2- reduction, double half-saturation in NO2- and H+
    FirstOrder,  // abiotic first-order aqueous reaction
    Protect,     // Langmuir sorption onto a finite capacity pool
    Unprotect,   // first-order release from the protected pool
    Gas,         // gas-aqueous local equilibrium, logK(T) polynomial
    Litter       // first-order input from a standing vegetation pool
};

const char* reaction_kind_name(ReactionKind k);

struct Reaction {
    std::string id;
    ReactionKind kind = ReactionKind::Monod;
    std::string group;
    int line = 0;

    double k = 0.0;  // rate constant in the kind's canonical unit
    int k_shared = -1;
    std::string k_unit;

    // Monod / Uptake
    int actor = -1;
    double yield = 0.0;
    std::vector<MonodTerm> substrates;
    std::vector<MonodTerm> inhibitors;
    std::vector<std::pair<int, double>> stoich;  // species -> signed coefficient
    bool moisture = false;

    // ChemoDenit
    double km_no2 = 0.0;
    double km_h = 0.0;

    // FirstOrder
    int substrate = -1;

    // Protect / Unprotect
    int aqueous = -1;
    int protected_sp = -1;
    int capacity_pool = -1;  // index into ReactionNetwork::pools

    // Gas: logK(T) = c0 + c1*(T - 298.15) + c2*(T - 298.15)^2,
    // K = [aqueous]/[gaseous] at equilibrium (dimensionless).
    int gas_sp = -1;
    int aq_partner = -1;
    std::array<double, 3> logk{0.0, 0.0, 0.0};

    // Litter
    enum class LitterTarget { Surface, Roots };
    LitterTarget litter_target = LitterTarget::Surface;
    double cn = 0.0;  // declared C:N mass ratio of the stream
    std::vector<std::pair<int, double>> compose;  // species -> C mass fraction

    // Fixation
    int product = -1;

    // Consumed species without their own Monod factor (filled by compile()).
    // The assembled RHS multiplies the rate by X/(X+eps) for each, so a
    // reaction cannot draw a pool it does not rate-limit below zero.
    std::vector<int> availability;
};

// First-order mortality of one microbial group with a C-mass partition of
// the necromass over receiving pools.
struct MortalityLaw {
    std::string group_id;
    int species = -1;
    double delta = 0.0;  // [1/s]
    std::vector<std::pair<int, double>> partition;  // species -> C mass fraction
    std::string group;
    int line = 0;
};

// Joined view of a Protect/Unprotect declaration pair.
struct ProtectionPair {
    int aqueous = -1;
    int protected_sp = -1;
    int pool = -1;
    double kp = 0.0;      // [L/mol/s]
    double k_unp = 0.0;   // [1/s]
    int protect_rx = -1;  // indices into ReactionNetwork::reactions
    int unprotect_rx = -1;
};

struct GasPair {
    int gas = -1;
    int aqueous = -1;
    std::array<double, 3> logk{0.0, 0.0, 0.0};
    int rx = -1;
};

// Immutable after validation; safe to share across concurrent model runs.
// apply_parameters() produces modified copies.
struct ReactionNetwork {
    std::string name;
    int format_version = 1;

    std::vector<Species> species;
    std::vector<StressProfile> stress;
    std::vector<SharedParam> params;
    std::vector<Reaction> reactions;  // document order
    std::vector<MortalityLaw> mortality;
    std::vector<std::string> pools;  // capacity pool names ("C", "NH4", ...)

    // Derived by compile(): kind-partitioned indices into `reactions`.
    std::vector<int> kinetic;  // Monod + ChemoDenit + FirstOrder, node RHS
    std::vector<ProtectionPair> pairs;
    std::vector<GasPair> gases;
    std::vector<int> litters;
    std::vector<int> uptakes;
    int fixation = -1;

    int species_index(const std::string& id) const;
    int param_index(const std::string& name) const;
    int pool_index(const std::string& name) const;
    int stress_index(const std::string& name) const;
    size_t n_species() const { return species.size(); }

    // Copies shared parameter values into every bound MonodTerm / rate and
    // rebuilds the kind partitions. Called after parse and after parameter
    // assignment.
    void compile();

    std::unordered_map<std::string, int> species_map;
};

}  // namespace soilcn

#endif
