#ifndef SOILCN_ENSEMBLE_HPP
#define SOILCN_ENSEMBLE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "soilcn/morris.hpp"
#include "soilcn/network_io.hpp"
#include "soilcn/scenario.hpp"

namespace soilcn {

// A model evaluated at one normalized trajectory point.
using PointModel = std::function<std::vector<double>(std::span<const double> point)>;

struct EnsembleOptions {
    int concurrency = 1;           // 1 = serial reference path
    std::string ledger_path;       // empty = no persistence
    bool resume = false;           // restore completed runs from the ledger
    int max_runs = -1;             // test hook: stop after this many evaluations
};

// Runs `model` at every point of every trajectory. Results are keyed by
// (trajectory, step) and merged deterministically, so any concurrency level
// yields identical output. Failed evaluations are recorded, not dropped.
// With a ledger path, completed runs are appended as JSON lines and restored
// on resume instead of being recomputed.
EnsembleResult execute_ensemble(const ParameterSpace& space,
                                const std::vector<Trajectory>& trajectories,
                                const std::vector<std::string>& target_names,
                                const PointModel& model,
                                const EnsembleOptions& opts = {});

// The simulator as a point model: denormalize -> apply_parameters ->
// run_simulation -> seven targets. All ensemble runs share one weather
// realization unless per_run_weather is set.
PointModel simulator_model(const Scenario& scenario, const ReactionNetwork& net,
                           const ParameterSpace& space,
                           const std::vector<DailyWeather>& weather);

// ---- Screening configuration (file-driven CLI entry point) --------------

struct ScreenConfig {
    std::string scenario_path;
    int levels = 11;
    int trajectories = 10;
    uint64_t seed = 1;
    double floor = 1.0e-10;
    double floor_fraction = 0.5;
    double span = 0.5;  // +-50%
    bool per_run_weather = false;
    std::string ledger_path;
    std::vector<std::string> param_filter;  // empty = full catalog
};

ScreenConfig load_screen_config(const std::string& path);

// ---- Single-parameter sweep ---------------------------------------------

struct SweepStep {
    double value = 0.0;
    double relative = 0.0;  // (value - reference)/reference
    std::vector<double> targets;
    std::vector<double> increments;  // (y - y_ref)/|y_ref|, or absolute when flagged
    std::vector<bool> absolute_flag; // y_ref == 0 for this target
    // C partition per step: polymers, aqueous monomers, protected monomers [kg-C/m2]
    double c_polymers = 0.0, c_aqueous = 0.0, c_protected = 0.0;
    RunResult run;
};

struct SweepResult {
    std::string parameter;
    double reference = 0.0;
    std::vector<std::string> target_names;
    std::vector<SweepStep> steps;  // ascending by value; includes the reference
    int reference_step = -1;
};

// Runs the scenario at `steps` values of one catalog parameter spanning
// reference*(1 +- range) plus the reference itself.
SweepResult sweep_parameter(const Scenario& scenario, const ReactionNetwork& net,
                            const std::string& path, double range, int steps,
                            int concurrency = 1);

void write_sweep_csv(const std::string& path, const SweepResult& r);

}  // namespace soilcn

#endif
