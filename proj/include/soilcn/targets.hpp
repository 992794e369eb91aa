#ifndef SOILCN_TARGETS_HPP
#define SOILCN_TARGETS_HPP

#include <array>
#include <string>
#include <vector>

namespace soilcn {

// The seven screening targets: mean daily surface gas exchange rates and
// depth-integrated stocks over the analysis window.
struct TargetOutputs {
    double co2_rate = 0.0;  // [kg-C/day/m2], net surface exchange
    double nh3_rate = 0.0;  // [kg-N/day/m2]
    double n2o_rate = 0.0;  // [kg-N/day/m2]
    double no_rate = 0.0;   // [kg-N/day/m2]
    double c_stock = 0.0;        // [kg-C/m2] organic C, top integration depth
    double n_stock = 0.0;        // [kg-N/m2] organic N
    double n_inorg_stock = 0.0;  // [kg-N/m2] inorganic N
    int window_start_day = 0;
    int window_end_day = 0;

    static constexpr int kCount = 7;
    static const std::array<const char*, kCount>& names();
    double value(int i) const;
};

// Fraction split of the C stock plus per-monomer aqueous densities.
struct PoolPartition {
    double frac_polymers = 0.0;
    double frac_protected_monomers = 0.0;
    double frac_aqueous_monomers = 0.0;
    // per aqueous monomer: (species id, g-C per kg soil)
    std::vector<std::pair<std::string, double>> aqueous_density;
    // polymer split over Lig/HCl/Cls in weight-C percent
    std::vector<std::pair<std::string, double>> polymer_wc;
};

}  // namespace soilcn

#endif
