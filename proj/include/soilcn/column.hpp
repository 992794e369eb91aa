#ifndef SOILCN_COLUMN_HPP
#define SOILCN_COLUMN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "soilcn/network.hpp"
#include "soilcn/weather.hpp"

namespace soilcn {

// Brooks-Corey retention/conductivity parameters.
struct BrooksCorey {
    double psi_b = 0.1;     // air-entry pressure head [m]
    double lambda = 0.25;   // pore-size index
    double k_sat = 1.0e-6;  // saturated conductivity [m/s]
    double s_res = 0.05;    // residual saturation
};

// Texture-to-hydraulics pedotransfer (Clapp-Hornberger b-parameterization,
// continuous regressions in sand/clay fractions). Deterministic.
BrooksCorey texture_to_hydraulics(double sand, double silt, double clay);
double texture_porosity(double sand, double silt, double clay);

// Brooks-Corey relative conductivity at liquid saturation s.
double relative_conductivity(const BrooksCorey& bc, double s);

struct SoilLayer {
    double top = 0.0;     // [m]
    double bottom = 0.0;  // [m]
    double sand = 0.0, silt = 0.0, clay = 0.0;  // mass fractions, sum 1
    double porosity = 0.45;
    double bulk_density = 1.3;  // [kg soil per L bulk]
    double ph = 5.5;
    BrooksCorey bc;
    std::vector<double> qmax;  // per capacity pool [mol per L bulk]
};

struct Grid {
    int n = 0;
    std::vector<double> z_top, z_bot, z_mid, dz;  // [m]
    std::vector<int> layer;  // layer index per node
};

Grid make_grid(double depth, int nodes, const std::vector<SoilLayer>& layers);

// Root-density weights per node: negative-exponential profile with the given
// mean depth, integrated over each node interval, normalized to sum 1.
std::vector<double> root_weights(double mean_depth, const Grid& grid);

// Cumulative boundary-exchange bookkeeping. Every entry is monotone for
// one-signed processes; gas exchange is net signed (+ = efflux).
struct Ledgers {
    std::vector<double> gas_exchange;  // per gas pair [mol/m2], + = to atmosphere
    double infiltration_m = 0.0;
    double runoff_m = 0.0;
    double et_m = 0.0;
    double drainage_m = 0.0;
    double leach_c = 0.0, leach_n = 0.0;    // [mol/m2] out the bottom
    double input_c = 0.0, input_n = 0.0;    // [mol/m2] litter + exudates
    double fix_n = 0.0;                     // [mol/m2]
    double uptake_n = 0.0;                  // [mol/m2] into N_plant
    double clip_c = 0.0, clip_n = 0.0;      // [mol/m2] added by clipping
};

// One simulation's mutable state. Species are stored as amounts [mol/m2]
// per node so that element bookkeeping is exact under changing water
// content; concentrations are derived views.
struct ColumnState {
    int n_species = 0;
    int n_nodes = 0;
    std::vector<double> amount;       // species-major: amount[sp*n_nodes + node]
    std::vector<double> water;        // [L/m2] per node
    std::vector<double> temperature;  // [K] per node
    Ledgers ledgers;

    double& at(int sp, int node) { return amount[sp * n_nodes + node]; }
    double at(int sp, int node) const { return amount[sp * n_nodes + node]; }
};

struct VegetationConfig {
    double root_mean_depth = 0.075;  // [m]
    // Standing input pools [kg-C/m2], keyed by litter reaction id; the
    // reaction's first-order rate applies to its pool.
    std::map<std::string, double> standing;
};

enum class ParallelMode { Serial, OpenMP };

struct ColumnOptions {
    double dt_outer = 86400.0;      // [s]
    double dt_chem = 21600.0;       // reaction/gas-exchange cadence [s]
    int hydro_substeps = 4;
    double rtol = 1.0e-6;
    double dt_outer_floor = 450.0;  // advance() halves down to this on failure
    bool enable_drainage = true;
    bool enable_surface_exchange = true;
    bool enable_inputs = true;
    bool enable_uptake = true;
    ParallelMode parallel = ParallelMode::Serial;
};

// Immutable per-run context: grid, layers, derived per-node constants.
struct Column {
    const ReactionNetwork* net = nullptr;
    Grid grid;
    std::vector<SoilLayer> layers;
    VegetationConfig veg;
    ColumnOptions opts;
    double latitude = -33.8;
    double k_c = 1.0;
    double mean_annual_temp_k = 288.15;
    double damping_depth = 0.5;  // [m]
    std::vector<double> roots;          // root weights per node
    std::vector<double> qmax_amount;    // pool-major [mol/m2]: qmax[pool*n+node]
    std::vector<double> water_capacity; // porosity*dz*1000 [L/m2]
    std::vector<double> water_residual; // s_res*capacity [L/m2]
    std::vector<double> atm_gas;        // ambient gas conc per gas pair [mol/L-gas]

    int n_nodes() const { return grid.n; }
    const SoilLayer& layer_of(int node) const { return layers[grid.layer[node]]; }
};

// Water cascade record for one outer step; transport replays it against the
// recorded per-substep water volumes so solute mass closes exactly.
struct WaterFluxPlan {
    struct Substep {
        double infiltration = 0.0;            // [L/m2] into node 0
        std::vector<double> water_before;     // [L/m2] per node at substep start
        std::vector<double> inter;            // [L/m2] flow node i -> i+1
        double drainage = 0.0;                // [L/m2] out the bottom
        std::vector<double> et;               // [L/m2] extracted per node
    };
    std::vector<Substep> substeps;
};

// Gravity-driven Brooks-Corey cascade; updates water contents and the water
// ledgers, returns the flux plan. Water balance closes exactly; saturation
// excess becomes runoff.
WaterFluxPlan water_step(Column& col, ColumnState& st, double precip_m_day,
                         double et_m_day, double dt);

// Upwind (mixing-cell) advection of aqueous species along the flux plan.
// Bottom efflux goes to the leaching ledger. Protected, biomass, and gaseous
// species are immobile.
void transport_step(const Column& col, ColumnState& st, const WaterFluxPlan& plan);

// Litter to the surface node, exudates and N fixation along the root
// profile; fixation is scaled by the surface moisture stress factor.
void apply_inputs(const Column& col, ColumnState& st, double dt, double f_s_surface);

// Michaelis-Menten plant uptake of NO3-/NH4+, root-weighted.
void apply_uptake(const Column& col, ColumnState& st, double dt);

// Local gas-aqueous equilibration at every node; at the surface node the gas
// phase is held at the ambient concentration and the net difference is
// booked as surface exchange.
void gas_partition_step(const Column& col, ColumnState& st);

// One operator-split outer step: water -> transport -> inputs/uptake ->
// per-node reaction integration -> gas partition. Throws on unrecoverable
// inner-solver failure after exhausting dt halving.
void advance(Column& col, ColumnState& st, const DailyWeather& day, double dt_outer);

double saturation(const Column& col, const ColumnState& st, int node);

// Element totals over all species and nodes [mol/m2].
std::pair<double, double> element_totals(const Column& col, const ColumnState& st);

}  // namespace soilcn

#endif
