// Command-line front end: network validation, column simulation, weather
// generation, Morris screening, single-parameter sweeps, and report
// extraction. Exit codes: 0 success, 1 domain/configuration error, 2 usage.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "soilcn/common.hpp"
#include "soilcn/csv.hpp"
#include "soilcn/ensemble.hpp"
#include "soilcn/morris.hpp"
#include "soilcn/network_io.hpp"
#include "soilcn/report.hpp"
#include "soilcn/scenario.hpp"

namespace fs = std::filesystem;
using namespace soilcn;

namespace {

struct GlobalFlags {
    uint64_t seed = 0;
    bool seed_set = false;
    int concurrency = 1;
    bool resume = false;
    std::string out;
};

uint64_t point_hash(std::span<const double> point) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (double x : point) {
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        h = (h ^ bits) * 0x100000001b3ull;
    }
    return h;
}

int cmd_validate(const std::string& path) {
    NetworkDocument doc = parse_network(read_text_file(path));
    std::vector<Diagnostic> diags;
    auto net = validate(doc, diags);
    for (const auto& d : diags) std::cerr << format_diagnostic(path, d) << "\n";
    if (!net) return 1;
    ParameterCatalog cat = catalog_parameters(*net);
    std::printf("%s: %zu species, %zu reactions, %zu mortality laws, %zu parameters\n",
                path.c_str(), net->species.size(), net->reactions.size(),
                net->mortality.size(), cat.size());
    return 0;
}

void write_run_outputs(const std::string& dir, const RunResult& run,
                       const ReactionNetwork& net, const Column& col) {
    fs::create_directories(dir);
    write_targets_csv(dir + "/targets.csv", run.targets);
    write_snapshots_csv(dir + "/snapshots.csv", run, net, col);
    write_ledger_csv(dir + "/ledger.csv", run, net);
    std::vector<std::string> ids;
    for (const char* id : {"F", "AER", "AOB", "NOB", "DEN", "Lig"})
        if (net.species_index(id) >= 0) ids.push_back(id);
    if (!ids.empty()) write_profiles_csv(dir + "/profiles.csv", run, net, col, ids);
    write_partition_csv(dir + "/partition.csv", pool_partition(run, net, col));
}

int cmd_simulate(const std::string& scenario_path, const GlobalFlags& g,
                 bool parallel) {
    Scenario sc = load_scenario(scenario_path);
    if (g.seed_set) sc.seed = g.seed;
    ReactionNetwork net = load_network(sc.network_path);
    RunResult run = run_simulation(sc, net,
                                   parallel ? ParallelMode::OpenMP
                                            : ParallelMode::Serial);
    std::string dir = g.out.empty() ? "run_" + sc.name : g.out;
    Column col = build_column(sc, net);
    write_run_outputs(dir, run, net, col);
    for (int i = 0; i < TargetOutputs::kCount; ++i)
        std::printf("%-14s %s\n", TargetOutputs::names()[i],
                    format_double(run.targets.value(i)).c_str());
    std::printf("outputs written to %s/\n", dir.c_str());
    return 0;
}

int cmd_screen(const std::string& config_path, const GlobalFlags& g) {
    ScreenConfig cfg = load_screen_config(config_path);
    if (g.seed_set) cfg.seed = g.seed;
    if (!g.out.empty()) {
        // results land in --out; a configured ledger stays where it is
    }
    Scenario sc = load_scenario(cfg.scenario_path);
    ReactionNetwork net = load_network(sc.network_path);

    ParameterCatalog cat = catalog_parameters(net);
    if (!cfg.param_filter.empty()) {
        ParameterCatalog filtered;
        for (const auto& want : cfg.param_filter) {
            int idx = cat.index_of(want);
            if (idx < 0) throw ConfigError("screen config: unknown param " + want);
            filtered.entries.push_back(cat.entries[idx]);
        }
        cat = filtered;
    }
    ParameterSpace space = make_parameter_space(cat, cfg.levels, cfg.span);
    auto trajectories = sample_trajectories(space, cfg.trajectories, cfg.seed);

    std::vector<DailyWeather> weather =
        scenario_weather(sc, sc.seed, sc.horizon_years);
    PointModel model;
    if (cfg.per_run_weather) {
        Scenario sc_copy = sc;
        ReactionNetwork net_copy = net;
        ParameterSpace space_copy = space;
        model = [sc_copy, net_copy, space_copy](std::span<const double> point) {
            Scenario mine = sc_copy;
            mine.seed = point_hash(point);
            auto wx = scenario_weather(mine, mine.seed, mine.horizon_years);
            std::vector<std::pair<std::string, double>> assignment;
            for (size_t i = 0; i < space_copy.dim(); ++i)
                assignment.emplace_back(
                    space_copy.specs[i].path,
                    space_copy.denormalize(static_cast<int>(i), point[i]));
            ReactionNetwork varied = apply_parameters(net_copy, assignment);
            RunResult run = run_simulation(mine, varied, ParallelMode::Serial, &wx);
            std::vector<double> targets(TargetOutputs::kCount);
            for (int i = 0; i < TargetOutputs::kCount; ++i)
                targets[i] = run.targets.value(i);
            return targets;
        };
    } else {
        model = simulator_model(sc, net, space, weather);
    }

    std::vector<std::string> names;
    for (const char* n : TargetOutputs::names()) names.push_back(n);

    EnsembleOptions opts;
    opts.concurrency = g.concurrency;
    opts.ledger_path = cfg.ledger_path;
    opts.resume = g.resume;
    EnsembleResult runs = execute_ensemble(space, trajectories, names, model, opts);

    SensitivityResult result = sensitivity_indices(space, trajectories, runs,
                                                   cfg.floor, cfg.floor_fraction);
    std::string dir = g.out.empty() ? "screen_out" : g.out;
    fs::create_directories(dir);
    write_sensitivity_csv(dir + "/sensitivity.csv", result);
    write_effects_csv(dir + "/effects.csv", space, result);
    std::printf("%d evaluations (%d computed), results in %s/\n",
                static_cast<int>(runs.records.size()), runs.executed, dir.c_str());
    for (size_t y = 0; y < result.flags.size(); ++y)
        if (result.flags[y].unreliable)
            std::printf("note: target %s flagged unreliable (%s)\n",
                        names[y].c_str(), result.flags[y].reason.c_str());
    return 0;
}

double parse_range(std::string text) {
    // accepts "0.4", "40%", "+-40%" and a UTF-8 plus-minus prefix
    if (text.rfind("\xc2\xb1", 0) == 0) text = text.substr(2);
    if (text.rfind("+-", 0) == 0) text = text.substr(2);
    bool pct = !text.empty() && text.back() == '%';
    if (pct) text.pop_back();
    double v = std::stod(text);
    return pct ? v / 100.0 : v;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::string& range_text, int steps, const GlobalFlags& g) {
    Scenario sc = load_scenario(scenario_path);
    if (g.seed_set) sc.seed = g.seed;
    ReactionNetwork net = load_network(sc.network_path);
    double range = parse_range(range_text);
    SweepResult r = sweep_parameter(sc, net, param, range, steps, g.concurrency);

    std::string dir = g.out.empty() ? "sweep_out" : g.out;
    fs::create_directories(dir);
    write_sweep_csv(dir + "/sweep.csv", r);
    Column col = build_column(sc, net);
    for (size_t i = 0; i < r.steps.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s/profiles_step%zu.csv", dir.c_str(), i);
        std::vector<std::string> ids;
        for (const char* id : {"F", "AER", "Lig"})
            if (net.species_index(id) >= 0) ids.push_back(id);
        write_profiles_csv(name, r.steps[i].run, net, col, ids);
    }
    std::printf("sweep of %s over %zu values, results in %s/\n", param.c_str(),
                r.steps.size(), dir.c_str());
    return 0;
}

int cmd_weathergen_fit(const std::string& history, const GlobalFlags& g) {
    auto series = read_weather_csv(history);
    WeatherGenParams p = fit_generator(series);
    std::string out = g.out.empty() ? "weather_params.json" : g.out;
    write_text_file(out, weather_params_to_json(p));
    std::printf("fitted %zu days into %s\n", series.size(), out.c_str());
    return 0;
}

int cmd_weathergen_generate(const std::string& params_path, int years,
                            const GlobalFlags& g) {
    WeatherGenParams p = weather_params_from_json(read_text_file(params_path));
    auto series = generate(p, years, g.seed_set ? g.seed : 1);
    std::string out = g.out.empty() ? "weather_generated.csv" : g.out;
    write_weather_csv(out, series);
    std::printf("generated %zu days into %s\n", series.size(), out.c_str());
    return 0;
}

int cmd_report(const std::string& kind, const std::string& scenario_path,
               const std::string& run_dir, int window_start, int window_end,
               double depth, const GlobalFlags& g) {
    Scenario sc = load_scenario(scenario_path);
    ReactionNetwork net = load_network(sc.network_path);
    Column col = build_column(sc, net);

    // Rebuild a recorded run from the simulate outputs.
    RunResult run;
    run.grid = col.grid;
    CsvTable snaps = read_csv_file(run_dir + "/snapshots.csv");
    int c_day = snaps.column("day"), c_node = snaps.column("node");
    int c_sl = snaps.column("s_l"), c_temp = snaps.column("temp_k");
    if (c_day < 0 || c_node < 0 || c_sl < 0)
        throw ConfigError("snapshots.csv is missing required columns");
    std::vector<int> sp_cols(net.n_species(), -1);
    for (size_t sp = 0; sp < net.n_species(); ++sp)
        sp_cols[sp] = snaps.column(net.species[sp].id);

    const int n = col.n_nodes();
    Snapshot* cur = nullptr;
    int cur_day = -1;
    for (const auto& row : snaps.rows) {
        int day = std::atoi(row[c_day].c_str());
        int node = std::atoi(row[c_node].c_str());
        if (day != cur_day) {
            run.snapshots.push_back({});
            cur = &run.snapshots.back();
            cur->day = day;
            cur->amount.assign(net.n_species() * n, 0.0);
            cur->water.assign(n, 0.0);
            cur->temperature.assign(n, 288.15);
            cur_day = day;
        }
        double s_l = std::strtod(row[c_sl].c_str(), nullptr);
        cur->water[node] = s_l * col.water_capacity[node];
        if (c_temp >= 0)
            cur->temperature[node] = std::strtod(row[c_temp].c_str(), nullptr);
        for (size_t sp = 0; sp < net.n_species(); ++sp) {
            if (sp_cols[sp] < 0) continue;
            double conc = std::strtod(row[sp_cols[sp]].c_str(), nullptr);
            double basis;
            switch (net.species[sp].phase) {
                case Phase::Gaseous:
                    basis = std::max(col.water_capacity[node] - cur->water[node],
                                     0.0);
                    break;
                case Phase::Protected:
                    basis = col.grid.dz[node] * 1000.0;
                    break;
                default:
                    basis = cur->water[node];
            }
            cur->amount[sp * n + node] = conc * basis;
        }
    }
    if (run.snapshots.empty()) throw ConfigError("no snapshots in " + run_dir);

    CsvTable ledger = read_csv_file(run_dir + "/ledger.csv");
    int l_day = ledger.column("day");
    for (const auto& row : ledger.rows) {
        LedgerRow lr;
        lr.day = std::atoi(row[l_day].c_str());
        lr.ledgers.gas_exchange.assign(net.gases.size(), 0.0);
        for (size_t gi = 0; gi < net.gases.size(); ++gi) {
            int cidx = ledger.column("ex_" + net.species[net.gases[gi].gas].id);
            if (cidx >= 0)
                lr.ledgers.gas_exchange[gi] = std::strtod(row[cidx].c_str(), nullptr);
        }
        run.ledger_series.push_back(std::move(lr));
    }
    run.horizon_days = run.snapshots.back().day;
    if (window_end < 0) window_end = run.horizon_days;
    if (window_start < 0)
        window_start = (sc.horizon_years - sc.window_years) * kDaysPerYear;
    run.window_start_day = window_start;
    run.window_end_day = window_end;

    // Window means from the snapshots inside the window.
    run.window_mean_amount.assign(net.n_species() * n, 0.0);
    run.window_mean_water.assign(n, 0.0);
    run.window_mean_sl.assign(n, 0.0);
    int used = 0;
    for (const auto& s : run.snapshots) {
        if (s.day <= window_start || s.day > window_end) continue;
        for (size_t c = 0; c < s.amount.size(); ++c)
            run.window_mean_amount[c] += s.amount[c];
        for (int i = 0; i < n; ++i) {
            run.window_mean_water[i] += s.water[i];
            run.window_mean_sl[i] += s.water[i] / col.water_capacity[i];
        }
        ++used;
    }
    if (used == 0) throw ConfigError("no snapshots inside the requested window");
    for (auto& v : run.window_mean_amount) v /= used;
    for (int i = 0; i < n; ++i) {
        run.window_mean_water[i] /= used;
        run.window_mean_sl[i] /= used;
    }

    std::string out = g.out;
    if (kind == "targets") {
        TargetOutputs t =
            extract_targets(run, net, col, window_start, window_end, depth);
        if (!out.empty()) write_targets_csv(out, t);
        for (int i = 0; i < TargetOutputs::kCount; ++i)
            std::printf("%-14s %s\n", TargetOutputs::names()[i],
                        format_double(t.value(i)).c_str());
    } else if (kind == "partition") {
        PoolPartition p = pool_partition(run, net, col, depth);
        if (!out.empty()) write_partition_csv(out, p);
        std::printf("polymers %s\nprotected_monomers %s\naqueous_monomers %s\n",
                    format_double(p.frac_polymers).c_str(),
                    format_double(p.frac_protected_monomers).c_str(),
                    format_double(p.frac_aqueous_monomers).c_str());
        for (const auto& [id, v] : p.aqueous_density)
            std::printf("aqueous %s %s g-C/kg\n", id.c_str(),
                        format_double(v).c_str());
    } else if (kind == "profiles") {
        std::vector<std::string> ids;
        for (const char* id : {"F", "AER", "AOB", "NOB", "DEN", "Lig"})
            if (net.species_index(id) >= 0) ids.push_back(id);
        std::string path = out.empty() ? run_dir + "/profiles_report.csv" : out;
        write_profiles_csv(path, run, net, col, ids);
        std::printf("profiles written to %s\n", path.c_str());
    } else {
        throw ConfigError("unknown report kind: " + kind);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"soil C-N reaction-network simulator and parameter screening"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--seed", g.seed, "override the run seed")
        ->each([&](const std::string&) { g.seed_set = true; });
    app.add_option("--concurrency", g.concurrency, "parallel model evaluations");
    app.add_flag("--resume", g.resume, "resume from the run ledger");
    app.add_option("--out", g.out, "output file or directory");

    auto* validate_cmd = app.add_subcommand("validate-network",
                                            "parse and validate a network file");
    std::string net_path;
    validate_cmd->add_option("file", net_path)->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "run one scenario");
    std::string scn_path;
    bool parallel_nodes = false;
    simulate_cmd->add_option("scenario", scn_path)->required();
    simulate_cmd->add_flag("--parallel-nodes", parallel_nodes,
                           "OpenMP over column nodes");

    auto* weather_cmd = app.add_subcommand("weathergen", "weather generator");
    auto* fit_cmd = weather_cmd->add_subcommand("fit", "fit generator parameters");
    std::string history_path;
    fit_cmd->add_option("--history", history_path, "historical CSV")->required();
    auto* gen_cmd = weather_cmd->add_subcommand("generate", "generate daily series");
    std::string params_path;
    int gen_years = 10;
    gen_cmd->add_option("--params", params_path, "parameter JSON")->required();
    gen_cmd->add_option("--years", gen_years, "years to generate");
    weather_cmd->require_subcommand(1);

    auto* screen_cmd = app.add_subcommand("screen", "Morris parameter screening");
    std::string screen_cfg;
    screen_cmd->add_option("config", screen_cfg)->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "single-parameter sweep");
    std::string sweep_scn, sweep_param, sweep_range = "40%";
    int sweep_steps = 3;
    sweep_cmd->add_option("scenario", sweep_scn)->required();
    sweep_cmd->add_option("--param", sweep_param)->required();
    sweep_cmd->add_option("--range", sweep_range, "relative range, e.g. 40%");
    sweep_cmd->add_option("--steps", sweep_steps, "number of sweep values");

    auto* report_cmd = app.add_subcommand("report", "extract report tables");
    std::string report_kind, report_scn, report_run;
    int rw0 = -1, rw1 = -1;
    double report_depth = 0.30;
    report_cmd->add_option("kind", report_kind, "targets|partition|profiles")
        ->required();
    report_cmd->add_option("--scenario", report_scn)->required();
    report_cmd->add_option("--run", report_run, "simulate output directory")
        ->required();
    report_cmd->add_option("--window-start", rw0, "window start day");
    report_cmd->add_option("--window-end", rw1, "window end day");
    report_cmd->add_option("--depth", report_depth, "integration depth [m]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(net_path);
        if (simulate_cmd->parsed()) return cmd_simulate(scn_path, g, parallel_nodes);
        if (weather_cmd->parsed()) {
            if (fit_cmd->parsed()) return cmd_weathergen_fit(history_path, g);
            if (gen_cmd->parsed())
                return cmd_weathergen_generate(params_path, gen_years, g);
        }
        if (screen_cmd->parsed()) return cmd_screen(screen_cfg, g);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_scn, sweep_param, sweep_range, sweep_steps, g);
        if (report_cmd->parsed())
            return cmd_report(report_kind, report_scn, report_run, rw0, rw1,
                              report_depth, g);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
