#ifndef SOILCN_KINETICS_HPP
#define SOILCN_KINETICS_HPP

#include <span>
#include <utility>
#include <vector>

#include "soilcn/network.hpp"

namespace soilcn {

// Per-node environment for the local reaction system. All concentrations are
// mol per liter of water; protection capacities arrive already converted to
// the same basis by the caller.
struct NodeEnv {
    double h_conc = 1.0e-6;               // H+ [mol/L], configured per layer
    std::span<const double> f_s;          // f_S per stress profile index
    std::span<const double> qmax;         // remaining-capacity basis per pool [mol/L]
};

// Monod rate law with inhibition and moisture stress:
//   R = k * f_S * ([B]/Y) * prod_i [X_i]/([X_i]+K_M,i) * prod_m K_I,m/(K_I,m+[X_m])
// The biomass factor is 1 for actor-less reactions. Throws DomainError on
// negative concentrations or f_s outside [0,1].
double reaction_rate(const ReactionNetwork& net, const Reaction& rx,
                     std::span<const double> conc, double f_s);

// d[B]/dt = sum_j Y_j * R_j - delta * [B]
double biomass_derivative(const MortalityLaw& law,
                          std::span<const std::pair<double, double>> contributions,
                          double biomass);

// R_cd = k_cd * [NO2-]/([NO2-]+K_M,NO2) * [H+]/([H+]+K_M,H)
double chemo_denit_rate(double k_cd, double km_no2, double km_h,
                        double no2, double h);

// d[X_p]/dt = k_p * (q_max - [X_p]) * [X_aq] - k_unp * [X_p]
// q_max is the effective capacity available to this pair (shared pools are
// netted out by the caller). Throws DomainError when x_p > q_max.
double protection_flux(double kp, double k_unp, double q_max,
                       double x_aq, double x_p);

double log10_k(const GasPair& gas, double temperature_k);

// Splits `total_moles` between the aqueous and gaseous phase so that
// c_aq = K(T) * c_gas, closing the mole balance on the aqueous side.
// Returns (aqueous mol/L-water, gaseous mol/L-gas).
std::pair<double, double> gas_partition(const GasPair& gas, double total_moles,
                                        double temperature_k, double water_volume_l,
                                        double gas_volume_l);

double moisture_stress(const StressProfile& p, double s_l);

// Assembles d(conc)/dt for every species at one node from all Monod,
// chemo-denitrification, first-order, protection, and mortality terms.
// Gaseous species get zero (partitioning is a separate step). The result
// conserves C and N exactly by construction of the validated network.
void node_rhs(const ReactionNetwork& net, const NodeEnv& env,
              std::span<const double> conc, std::span<double> dcdt);

// Directional derivative (J*v) of node_rhs at `conc`, from the analytic
// partial derivatives of the rate laws. Used to cross-check the assembled
// RHS against finite differences.
void node_rhs_jvp(const ReactionNetwork& net, const NodeEnv& env,
                  std::span<const double> conc, std::span<const double> v,
                  std::span<double> jv);

struct IntegrateResult {
    bool ok = true;
    long steps = 0;
    double clipped_c = 0.0;  // mol-C added by clipping negatives to zero
    double clipped_n = 0.0;
};

// Adaptive explicit integration of the node reaction system over dt using a
// Heun step with an embedded Euler error estimate, per-species relative
// tolerance. Negative excursions are clipped to zero and the clipped element
// mass is accounted in the result.
IntegrateResult integrate_node(const ReactionNetwork& net, const NodeEnv& env,
                               std::span<double> conc, double dt,
                               double rtol = 1.0e-6, double atol = 1.0e-12);

}  // namespace soilcn

#endif
