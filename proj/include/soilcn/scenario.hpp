#ifndef SOILCN_SCENARIO_HPP
#define SOILCN_SCENARIO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "soilcn/column.hpp"
#include "soilcn/network.hpp"
#include "soilcn/targets.hpp"
#include "soilcn/weather.hpp"

namespace soilcn {

enum class WeatherMode { Synthetic, History, ParamsFile };

struct LayerSpec {
    double top = 0.0, bottom = 0.0;
    double sand = 0.4, silt = 0.4, clay = 0.2;
    double porosity = -1.0;      // < 0: derive from texture
    double bulk_density = 1.3;   // [kg/L bulk]
    double ph = 5.5;
    std::map<std::string, double> qmax;  // pool name -> [mol per L bulk]
};

struct Scenario {
    std::string name = "scenario";
    std::string network_path;

    double depth = 2.0;
    int nodes = 10;
    std::vector<LayerSpec> layers;

    VegetationConfig veg;

    WeatherMode weather_mode = WeatherMode::Synthetic;
    WeatherGenParams synthetic;      // Synthetic mode
    std::string weather_path;        // History / ParamsFile modes
    double k_c = 1.0;
    double latitude = -33.8;
    double mean_annual_temp_c = 15.0;
    double damping_depth = 0.5;

    int horizon_years = 20;
    int window_years = 5;
    double dt_outer = 86400.0;
    double dt_chem = 21600.0;
    int hydro_substeps = 4;
    int snapshot_every_days = 365;
    uint64_t seed = 1;
    double rtol = 1.0e-6;

    bool closed = false;  // no drainage, no surface exchange, no inputs, no uptake
    bool enable_drainage = true;
    bool enable_surface_exchange = true;
    bool enable_inputs = true;
    bool enable_uptake = true;

    double initial_saturation = 0.55;
    // species id -> concentration; mol/L-water for aqueous and biomass,
    // mol/L-gas for gaseous, mol/L-bulk for protected species.
    std::map<std::string, double> initial;
    std::map<std::string, double> atmosphere;  // gas species id -> [mol/L-gas]
};

// Sectioned-text scenario file. Throws ConfigError with diagnostics on
// failure. Relative paths inside the file resolve against its directory.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& base_dir = "");

struct LedgerRow {
    int day = 0;
    Ledgers ledgers;
    double total_water = 0.0;  // [L/m2] column storage
};

struct Snapshot {
    int day = 0;
    std::vector<double> amount;       // copy of state amounts
    std::vector<double> water;        // [L/m2]
    std::vector<double> temperature;  // [K]
};

struct RunResult {
    TargetOutputs targets;
    std::vector<Snapshot> snapshots;
    std::vector<LedgerRow> ledger_series;
    // Analysis-window daily means, for partition/profile reports.
    std::vector<double> window_mean_amount;  // species-major [mol/m2]
    std::vector<double> window_mean_water;   // [L/m2]
    std::vector<double> window_mean_sl;
    Grid grid;
    int window_start_day = 0, window_end_day = 0;
    int horizon_days = 0;
};

Column build_column(const Scenario& sc, const ReactionNetwork& net,
                    ParallelMode parallel = ParallelMode::Serial);
ColumnState initial_state(const Scenario& sc, const Column& col);

std::vector<DailyWeather> scenario_weather(const Scenario& sc, uint64_t seed,
                                           int years);

// Deterministic per (scenario, network, seed). The weather series may be
// supplied (shared across ensemble runs) or derived from the scenario.
RunResult run_simulation(const Scenario& sc, const ReactionNetwork& net,
                         ParallelMode parallel = ParallelMode::Serial,
                         const std::vector<DailyWeather>* weather = nullptr);

}  // namespace soilcn

#endif
