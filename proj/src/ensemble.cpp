#include "soilcn/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "soilcn/common.hpp"
#include "soilcn/csv.hpp"
#include "soilcn/report.hpp"

namespace soilcn {

namespace {

nlohmann::json record_to_json(const RunRecord& r) {
    nlohmann::json j;
    j["trajectory"] = r.trajectory;
    j["step"] = r.step;
    j["ok"] = r.ok;
    if (r.ok) j["targets"] = r.targets;
    else j["error"] = r.error;
    return j;
}

bool record_from_json(const std::string& line, RunRecord& r, size_t n_targets) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("trajectory")) return false;
    r.trajectory = j["trajectory"];
    r.step = j["step"];
    r.ok = j.value("ok", false);
    if (r.ok) {
        r.targets = j["targets"].get<std::vector<double>>();
        if (r.targets.size() != n_targets) return false;
    } else {
        r.error = j.value("error", "");
    }
    return true;
}

}  // namespace

EnsembleResult execute_ensemble(const ParameterSpace& space,
                                const std::vector<Trajectory>& trajectories,
                                const std::vector<std::string>& target_names,
                                const PointModel& model,
                                const EnsembleOptions& opts) {
    const int k = static_cast<int>(space.dim());
    const int per_traj = k + 1;
    const int total = static_cast<int>(trajectories.size()) * per_traj;

    EnsembleResult out;
    out.target_names = target_names;
    out.n_trajectories = static_cast<int>(trajectories.size());
    out.records.resize(total);
    std::vector<char> done(total, 0);

    for (int t = 0; t < out.n_trajectories; ++t)
        for (int s = 0; s < per_traj; ++s) {
            RunRecord& r = out.records[size_t(t) * per_traj + s];
            r.trajectory = t;
            r.step = s;
            r.ok = false;
            r.error = "not executed";
        }

    // Restore completed runs from the ledger.
    if (opts.resume && !opts.ledger_path.empty() &&
        std::filesystem::exists(opts.ledger_path)) {
        std::ifstream in(opts.ledger_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            RunRecord r;
            if (!record_from_json(line, r, target_names.size())) continue;
            if (r.trajectory < 0 || r.trajectory >= out.n_trajectories) continue;
            if (r.step < 0 || r.step >= per_traj) continue;
            size_t idx = size_t(r.trajectory) * per_traj + r.step;
            out.records[idx] = std::move(r);
            done[idx] = 1;
        }
    }

    std::vector<int> todo;
    for (int i = 0; i < total; ++i)
        if (!done[i]) todo.push_back(i);
    if (opts.max_runs >= 0 && static_cast<int>(todo.size()) > opts.max_runs)
        todo.resize(opts.max_runs);

    std::ofstream ledger;
    std::mutex ledger_mutex;
    if (!opts.ledger_path.empty())
        ledger.open(opts.ledger_path, std::ios::app);

    auto run_one = [&](int idx) {
        int t = idx / per_traj, s = idx % per_traj;
        RunRecord r;
        r.trajectory = t;
        r.step = s;
        try {
            r.targets = model(trajectories[t].points[s]);
            r.ok = r.targets.size() == target_names.size();
            if (!r.ok) r.error = "model returned a wrong target count";
        } catch (const std::exception& e) {
            r.ok = false;
            r.error = e.what();
        }
        if (ledger.is_open()) {
            std::lock_guard<std::mutex> lock(ledger_mutex);
            ledger << record_to_json(r).dump() << "\n";
            ledger.flush();
        }
        out.records[idx] = std::move(r);
    };

    if (opts.concurrency > 1) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(opts.concurrency)
        for (size_t i = 0; i < todo.size(); ++i) run_one(todo[i]);
#else
        for (size_t i = 0; i < todo.size(); ++i) run_one(todo[i]);
#endif
    } else {
        for (size_t i = 0; i < todo.size(); ++i) run_one(todo[i]);
    }
    out.executed = static_cast<int>(todo.size());

    // Compact the ledger into deterministic (trajectory, step) order.
    if (ledger.is_open() && opts.max_runs < 0) {
        ledger.close();
        std::ofstream rewritten(opts.ledger_path, std::ios::trunc);
        for (const auto& r : out.records)
            rewritten << record_to_json(r).dump() << "\n";
    }
    return out;
}

PointModel simulator_model(const Scenario& scenario, const ReactionNetwork& net,
                           const ParameterSpace& space,
                           const std::vector<DailyWeather>& weather) {
    auto sc = std::make_shared<Scenario>(scenario);
    auto base = std::make_shared<ReactionNetwork>(net);
    auto spc = std::make_shared<ParameterSpace>(space);
    auto wx = std::make_shared<std::vector<DailyWeather>>(weather);

    return [sc, base, spc, wx](std::span<const double> point) {
        std::vector<std::pair<std::string, double>> assignment;
        assignment.reserve(spc->dim());
        for (size_t i = 0; i < spc->dim(); ++i)
            assignment.emplace_back(spc->specs[i].path,
                                    spc->denormalize(static_cast<int>(i), point[i]));
        ReactionNetwork varied = apply_parameters(*base, assignment);
        RunResult run = run_simulation(*sc, varied, ParallelMode::Serial, wx.get());
        std::vector<double> targets(TargetOutputs::kCount);
        for (int i = 0; i < TargetOutputs::kCount; ++i)
            targets[i] = run.targets.value(i);
        return targets;
    };
}

ScreenConfig load_screen_config(const std::string& path) {
    ScreenConfig cfg;
    std::string dir = std::filesystem::path(path).parent_path().string();
    auto resolve = [&](const std::string& p) {
        if (p.empty() || p.front() == '/' || dir.empty()) return p;
        return dir + "/" + p;
    };
    std::istringstream in(read_text_file(path));
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string key, value;
        if (!(ls >> key)) continue;
        if (key.front() == '[') {
            section = key.substr(1, key.find(']') - 1);
            continue;
        }
        if (!(ls >> value))
            throw ConfigError("screen config line " + std::to_string(lineno) +
                              ": missing value");
        if (section != "screen")
            throw ConfigError("screen config expects a [screen] section");
        if (key == "scenario") cfg.scenario_path = resolve(value);
        else if (key == "levels") cfg.levels = std::stoi(value);
        else if (key == "trajectories") cfg.trajectories = std::stoi(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "floor") cfg.floor = std::stod(value);
        else if (key == "floor_fraction") cfg.floor_fraction = std::stod(value);
        else if (key == "span") cfg.span = std::stod(value);
        else if (key == "weather") cfg.per_run_weather = (value == "per_run");
        else if (key == "ledger") cfg.ledger_path = resolve(value);
        else if (key == "param") cfg.param_filter.push_back(value);
        else throw ConfigError("unknown screen config key " + key);
    }
    if (cfg.scenario_path.empty())
        throw ConfigError("screen config needs a scenario path");
    return cfg;
}

SweepResult sweep_parameter(const Scenario& scenario, const ReactionNetwork& net,
                            const std::string& path, double range, int steps,
                            int concurrency) {
    if (range <= -1.0) throw ConfigError("sweep range must exceed -100%");
    if (steps < 1) throw ConfigError("sweep needs at least one step");

    ParameterCatalog cat = catalog_parameters(net);
    int idx = cat.index_of(path);
    if (idx < 0) throw ConfigError("unknown parameter path '" + path + "'");
    double ref = cat.entries[idx].reference;

    SweepResult out;
    out.parameter = path;
    out.reference = ref;
    for (const char* name : TargetOutputs::names()) out.target_names.push_back(name);

    std::vector<double> values;
    for (int i = 0; i < steps; ++i) {
        double f = steps == 1 ? 0.0
                              : -range + 2.0 * range * double(i) / double(steps - 1);
        values.push_back(ref * (1.0 + f));
    }
    if (std::none_of(values.begin(), values.end(),
                     [&](double v) { return v == ref; }))
        values.push_back(ref);
    std::sort(values.begin(), values.end());
    if (ref < 0) std::reverse(values.begin(), values.end());

    std::vector<DailyWeather> weather =
        scenario_weather(scenario, scenario.seed, scenario.horizon_years);

    out.steps.resize(values.size());
    auto run_value = [&](size_t i) {
        SweepStep step;
        step.value = values[i];
        step.relative = ref != 0 ? (values[i] - ref) / ref : 0.0;
        ReactionNetwork varied =
            apply_parameters(net, {{path, values[i]}});
        step.run = run_simulation(scenario, varied, ParallelMode::Serial, &weather);
        for (int y = 0; y < TargetOutputs::kCount; ++y)
            step.targets.push_back(step.run.targets.value(y));
        out.steps[i] = std::move(step);
    };

    if (concurrency > 1) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(concurrency)
        for (size_t i = 0; i < values.size(); ++i) run_value(i);
#else
        for (size_t i = 0; i < values.size(); ++i) run_value(i);
#endif
    } else {
        for (size_t i = 0; i < values.size(); ++i) run_value(i);
    }

    for (size_t i = 0; i < out.steps.size(); ++i)
        if (out.steps[i].value == ref) out.reference_step = static_cast<int>(i);

    // Relative increments against the reference run, plus the C partition.
    const SweepStep& ref_step = out.steps[out.reference_step];
    for (auto& step : out.steps) {
        Column col = build_column(scenario, net, ParallelMode::Serial);
        CPartition part = c_partition(step.run, net, col, 0.30);
        step.c_polymers = part.polymers;
        step.c_aqueous = part.aqueous_monomers;
        step.c_protected = part.protected_monomers;
        step.increments.resize(step.targets.size());
        step.absolute_flag.assign(step.targets.size(), false);
        for (size_t y = 0; y < step.targets.size(); ++y) {
            double y_ref = ref_step.targets[y];
            if (y_ref == 0.0) {
                step.increments[y] = step.targets[y];
                step.absolute_flag[y] = true;
            } else {
                step.increments[y] = (step.targets[y] - y_ref) / std::abs(y_ref);
            }
        }
    }
    return out;
}

void write_sweep_csv(const std::string& path, const SweepResult& r) {
    CsvTable t;
    t.header = {"parameter", "value", "relative"};
    for (const auto& name : r.target_names) t.header.push_back(name);
    for (const auto& name : r.target_names)
        t.header.push_back(std::string("incr_") + name);
    t.header.push_back("c_polymers");
    t.header.push_back("c_aqueous");
    t.header.push_back("c_protected");
    for (const auto& s : r.steps) {
        std::vector<std::string> row = {r.parameter, format_double(s.value),
                                        format_double(s.relative)};
        for (double y : s.targets) row.push_back(format_double(y));
        for (size_t y = 0; y < s.increments.size(); ++y) {
            std::string v = format_double(s.increments[y]);
            if (s.absolute_flag[y]) v += " (absolute)";
            row.push_back(v);
        }
        row.push_back(format_double(s.c_polymers));
        row.push_back(format_double(s.c_aqueous));
        row.push_back(format_double(s.c_protected));
        t.add_row(row);
    }
    write_csv_file(path, t);
}

}  // namespace soilcn
