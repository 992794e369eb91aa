#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "soilcn/common.hpp"
#include "soilcn/csv.hpp"
#include "soilcn/kinetics.hpp"
#include "soilcn/network_io.hpp"
#include "soilcn/scenario.hpp"

namespace soilcn {

namespace {

std::vector<std::string> tokenize_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double num_or_throw(const std::string& tok, const std::string& what) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (!end || *end != '\0') throw ConfigError("bad number for " + what + ": " + tok);
    return v;
}

bool flag_of(const std::string& v) { return v == "on" || v == "true" || v == "1"; }

// Synthetic-weather scalar knobs expanded to month-resolved generator
// parameters with a sinusoidal seasonal temperature cycle.
struct SyntheticSpec {
    double p_wd = 0.3, p_ww = 0.5;
    double gamma_shape = 0.8, gamma_scale = 3.5;
    double tmax_mean = 20.0, tmax_amp = 6.0;
    double tmin_mean = 9.0, tmin_amp = 6.0;
    double t_sd = 3.0;
    double wet_t_offset = -1.5;
    double t_autocorr = 0.6;

    WeatherGenParams build() const {
        WeatherGenParams p;
        p.t_autocorr = t_autocorr;
        for (int m = 0; m < 12; ++m) {
            MonthParams& mp = p.months[m];
            mp.p_wd = p_wd;
            mp.p_ww = p_ww;
            mp.gamma_shape = gamma_shape;
            mp.gamma_scale = gamma_scale;
            double phase = std::cos(2.0 * 3.14159265358979323846 * (m + 0.5) / 12.0);
            for (int w = 0; w < 2; ++w) {
                double off = w ? wet_t_offset : 0.0;
                mp.tmax_mean[w] = tmax_mean + tmax_amp * phase + off;
                mp.tmax_sd[w] = t_sd;
                mp.tmin_mean[w] = tmin_mean + tmin_amp * phase + off;
                mp.tmin_sd[w] = t_sd;
            }
        }
        return p;
    }
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
    Scenario sc;
    SyntheticSpec synth;
    std::istringstream in(text);
    std::string raw, section;
    int lineno = 0;

    auto resolve = [&](const std::string& p) {
        if (p.empty() || p.front() == '/' || base_dir.empty()) return p;
        return base_dir + "/" + p;
    };

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        auto tokens = tokenize_ws(line);
        if (tokens.empty()) continue;
        if (tokens[0].front() == '[') {
            section = tokens[0].substr(1);
            if (!section.empty() && section.back() == ']') section.pop_back();
            continue;
        }
        const std::string& key = tokens[0];
        auto val = [&](size_t i = 1) -> const std::string& {
            if (tokens.size() <= i)
                throw ConfigError("scenario line " + std::to_string(lineno) +
                                  ": missing value for " + key);
            return tokens[i];
        };

        if (section == "scenario") {
            if (key == "name") sc.name = val();
            else if (key == "network") sc.network_path = resolve(val());
            else if (key == "depth") sc.depth = num_or_throw(val(), key);
            else if (key == "nodes") sc.nodes = int(num_or_throw(val(), key));
            else if (key == "horizon_years") sc.horizon_years = int(num_or_throw(val(), key));
            else if (key == "window_years") sc.window_years = int(num_or_throw(val(), key));
            else if (key == "dt_outer") sc.dt_outer = num_or_throw(val(), key);
            else if (key == "dt_chem") sc.dt_chem = num_or_throw(val(), key);
            else if (key == "hydro_substeps") sc.hydro_substeps = int(num_or_throw(val(), key));
            else if (key == "snapshot_every_days")
                sc.snapshot_every_days = int(num_or_throw(val(), key));
            else if (key == "seed") sc.seed = uint64_t(num_or_throw(val(), key));
            else if (key == "rtol") sc.rtol = num_or_throw(val(), key);
            else if (key == "closed") sc.closed = flag_of(val());
            else if (key == "drainage") sc.enable_drainage = flag_of(val());
            else if (key == "surface_exchange") sc.enable_surface_exchange = flag_of(val());
            else if (key == "inputs") sc.enable_inputs = flag_of(val());
            else if (key == "uptake") sc.enable_uptake = flag_of(val());
            else throw ConfigError("scenario line " + std::to_string(lineno) +
                                   ": unknown key " + key);
        } else if (section == "layers") {
            if (key != "layer")
                throw ConfigError("layers section expects 'layer' lines");
            if (tokens.size() < 9)
                throw ConfigError("layer line " + std::to_string(lineno) +
                                  " needs: top bottom sand silt clay porosity "
                                  "bulk_density ph [qmax...]");
            LayerSpec l;
            l.top = num_or_throw(tokens[1], "top");
            l.bottom = num_or_throw(tokens[2], "bottom");
            l.sand = num_or_throw(tokens[3], "sand");
            l.silt = num_or_throw(tokens[4], "silt");
            l.clay = num_or_throw(tokens[5], "clay");
            l.porosity = num_or_throw(tokens[6], "porosity");
            l.bulk_density = num_or_throw(tokens[7], "bulk_density");
            l.ph = num_or_throw(tokens[8], "ph");
            // qmax entries as name:value pairs
            for (size_t i = 9; i < tokens.size(); ++i) {
                auto colon = tokens[i].find(':');
                if (colon == std::string::npos)
                    throw ConfigError("layer qmax entries are pool:value");
                l.qmax[tokens[i].substr(0, colon)] =
                    num_or_throw(tokens[i].substr(colon + 1), "qmax");
            }
            if (l.top >= l.bottom)
                throw ConfigError("layer line " + std::to_string(lineno) +
                                  ": top must be above bottom");
            sc.layers.push_back(std::move(l));
        } else if (section == "vegetation") {
            if (key == "root_mean_depth")
                sc.veg.root_mean_depth = num_or_throw(val(), key);
            else if (key == "standing")
                sc.veg.standing[val(1)] = num_or_throw(val(2), "standing");
            else throw ConfigError("unknown vegetation key " + key);
        } else if (section == "weather") {
            if (key == "mode") {
                const std::string& m = val();
                if (m == "synthetic") sc.weather_mode = WeatherMode::Synthetic;
                else if (m == "history") sc.weather_mode = WeatherMode::History;
                else if (m == "params") sc.weather_mode = WeatherMode::ParamsFile;
                else throw ConfigError("unknown weather mode " + m);
            } else if (key == "file") sc.weather_path = resolve(val());
            else if (key == "kc") sc.k_c = num_or_throw(val(), key);
            else if (key == "latitude") sc.latitude = num_or_throw(val(), key);
            else if (key == "mean_annual_temp_c")
                sc.mean_annual_temp_c = num_or_throw(val(), key);
            else if (key == "damping_depth") sc.damping_depth = num_or_throw(val(), key);
            else if (key == "p_wd") synth.p_wd = num_or_throw(val(), key);
            else if (key == "p_ww") synth.p_ww = num_or_throw(val(), key);
            else if (key == "gamma_shape") synth.gamma_shape = num_or_throw(val(), key);
            else if (key == "gamma_scale") synth.gamma_scale = num_or_throw(val(), key);
            else if (key == "tmax_mean") synth.tmax_mean = num_or_throw(val(), key);
            else if (key == "tmax_amp") synth.tmax_amp = num_or_throw(val(), key);
            else if (key == "tmin_mean") synth.tmin_mean = num_or_throw(val(), key);
            else if (key == "tmin_amp") synth.tmin_amp = num_or_throw(val(), key);
            else if (key == "t_sd") synth.t_sd = num_or_throw(val(), key);
            else if (key == "wet_t_offset") synth.wet_t_offset = num_or_throw(val(), key);
            else if (key == "t_autocorr") synth.t_autocorr = num_or_throw(val(), key);
            else throw ConfigError("unknown weather key " + key);
        } else if (section == "initial") {
            if (key == "saturation") sc.initial_saturation = num_or_throw(val(), key);
            else if (key == "conc") sc.initial[val(1)] = num_or_throw(val(2), "conc");
            else throw ConfigError("unknown initial key " + key);
        } else if (section == "atmosphere") {
            if (key == "conc") sc.atmosphere[val(1)] = num_or_throw(val(2), "conc");
            else throw ConfigError("unknown atmosphere key " + key);
        } else {
            throw ConfigError("scenario line " + std::to_string(lineno) +
                              ": entry outside a known section");
        }
    }
    sc.synthetic = synth.build();
    if (sc.layers.empty()) {
        LayerSpec l;
        l.top = 0.0;
        l.bottom = sc.depth;
        sc.layers.push_back(l);
    }
    if (sc.window_years > sc.horizon_years)
        throw ConfigError("analysis window exceeds the horizon");
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_scenario(read_text_file(path), dir);
}

Column build_column(const Scenario& sc, const ReactionNetwork& net,
                    ParallelMode parallel) {
    Column col;
    col.net = &net;

    for (const auto& spec : sc.layers) {
        SoilLayer l;
        l.top = spec.top;
        l.bottom = spec.bottom;
        l.sand = spec.sand;
        l.silt = spec.silt;
        l.clay = spec.clay;
        l.bc = texture_to_hydraulics(spec.sand, spec.silt, spec.clay);
        l.porosity = spec.porosity > 0 ? spec.porosity
                                       : texture_porosity(spec.sand, spec.silt, spec.clay);
        l.bulk_density = spec.bulk_density;
        l.ph = spec.ph;
        l.qmax.assign(net.pools.size(), 0.0);
        for (const auto& [pool, value] : spec.qmax) {
            int idx = net.pool_index(pool);
            if (idx >= 0) l.qmax[idx] = value;  // unused pools are harmless
        }
        col.layers.push_back(std::move(l));
    }

    col.grid = make_grid(sc.depth, sc.nodes, col.layers);
    col.veg = sc.veg;
    col.latitude = sc.latitude;
    col.k_c = sc.k_c;
    col.mean_annual_temp_k = 273.15 + sc.mean_annual_temp_c;
    col.damping_depth = sc.damping_depth;
    col.roots = root_weights(sc.veg.root_mean_depth, col.grid);

    const int n = col.grid.n;
    col.water_capacity.resize(n);
    col.water_residual.resize(n);
    for (int i = 0; i < n; ++i) {
        const SoilLayer& l = col.layers[col.grid.layer[i]];
        col.water_capacity[i] = l.porosity * col.grid.dz[i] * 1000.0;
        col.water_residual[i] = l.bc.s_res * col.water_capacity[i];
    }
    col.qmax_amount.assign(net.pools.size() * n, 0.0);
    for (size_t p = 0; p < net.pools.size(); ++p)
        for (int i = 0; i < n; ++i)
            col.qmax_amount[p * n + i] =
                col.layers[col.grid.layer[i]].qmax[p] * col.grid.dz[i] * 1000.0;

    col.atm_gas.assign(net.gases.size(), 0.0);
    for (size_t g = 0; g < net.gases.size(); ++g) {
        auto it = sc.atmosphere.find(net.species[net.gases[g].gas].id);
        if (it != sc.atmosphere.end()) col.atm_gas[g] = it->second;
    }

    col.opts.dt_outer = sc.dt_outer;
    col.opts.dt_chem = sc.dt_chem;
    col.opts.hydro_substeps = sc.hydro_substeps;
    col.opts.rtol = sc.rtol;
    col.opts.parallel = parallel;
    bool closed = sc.closed;
    col.opts.enable_drainage = sc.enable_drainage && !closed;
    col.opts.enable_surface_exchange = sc.enable_surface_exchange && !closed;
    col.opts.enable_inputs = sc.enable_inputs && !closed;
    col.opts.enable_uptake = sc.enable_uptake && !closed;
    return col;
}

ColumnState initial_state(const Scenario& sc, const Column& col) {
    const ReactionNetwork& net = *col.net;
    const int n = col.n_nodes();
    ColumnState st;
    st.n_species = static_cast<int>(net.n_species());
    st.n_nodes = n;
    st.amount.assign(net.n_species() * n, 0.0);
    st.water.resize(n);
    st.temperature.assign(n, col.mean_annual_temp_k);
    st.ledgers.gas_exchange.assign(net.gases.size(), 0.0);

    for (int i = 0; i < n; ++i) {
        double w = sc.initial_saturation * col.water_capacity[i];
        st.water[i] = std::max(w, col.water_residual[i]);
    }

    for (const auto& [id, conc] : sc.initial) {
        int sp = net.species_index(id);
        if (sp < 0) throw ConfigError("initial concentration for unknown species " + id);
        if (conc < 0) throw ConfigError("negative initial concentration for " + id);
        for (int i = 0; i < n; ++i) {
            double basis;
            switch (net.species[sp].phase) {
                case Phase::Gaseous:
                    basis = std::max(col.water_capacity[i] - st.water[i], 0.0);
                    break;
                case Phase::Protected:
                    basis = col.grid.dz[i] * 1000.0;
                    break;
                default:
                    basis = st.water[i];
            }
            st.at(sp, i) = conc * basis;
        }
    }
    return st;
}

std::vector<DailyWeather> scenario_weather(const Scenario& sc, uint64_t seed,
                                           int years) {
    switch (sc.weather_mode) {
        case WeatherMode::Synthetic:
            return generate(sc.synthetic, years, seed);
        case WeatherMode::History: {
            auto history = read_weather_csv(sc.weather_path);
            return generate(fit_generator(history), years, seed);
        }
        case WeatherMode::ParamsFile: {
            auto params = weather_params_from_json(read_text_file(sc.weather_path));
            return generate(params, years, seed);
        }
    }
    throw ConfigError("unknown weather mode");
}

RunResult run_simulation(const Scenario& sc, const ReactionNetwork& net,
                         ParallelMode parallel,
                         const std::vector<DailyWeather>* weather) {
    Column col = build_column(sc, net, parallel);
    ColumnState st = initial_state(sc, col);

    const int horizon_days = sc.horizon_years * kDaysPerYear;
    const int window_start = (sc.horizon_years - sc.window_years) * kDaysPerYear;
    const int steps_per_day =
        std::max(1, static_cast<int>(std::lround(kSecondsPerDay / sc.dt_outer)));
    const double dt = kSecondsPerDay / steps_per_day;

    std::vector<DailyWeather> own_weather;
    if (!weather) {
        own_weather = scenario_weather(sc, sc.seed, sc.horizon_years);
        weather = &own_weather;
    }
    if (weather->empty()) throw ConfigError("empty weather series");

    RunResult out;
    out.grid = col.grid;
    out.horizon_days = horizon_days;
    out.window_start_day = window_start;
    out.window_end_day = horizon_days;

    const size_t cells = net.n_species() * col.n_nodes();
    out.window_mean_amount.assign(cells, 0.0);
    out.window_mean_water.assign(col.n_nodes(), 0.0);
    out.window_mean_sl.assign(col.n_nodes(), 0.0);
    long window_days = 0;
    Ledgers window_ledger_start = st.ledgers;

    auto take_snapshot = [&](int day) {
        Snapshot snap;
        snap.day = day;
        snap.amount = st.amount;
        snap.water = st.water;
        snap.temperature = st.temperature;
        out.snapshots.push_back(std::move(snap));
        LedgerRow row;
        row.day = day;
        row.ledgers = st.ledgers;
        row.total_water = 0;
        for (double w : st.water) row.total_water += w;
        out.ledger_series.push_back(std::move(row));
    };

    take_snapshot(0);
    for (int day = 0; day < horizon_days; ++day) {
        const DailyWeather& forcing = (*weather)[day % weather->size()];
        for (int k = 0; k < steps_per_day; ++k) advance(col, st, forcing, dt);

        if (day + 1 == window_start) window_ledger_start = st.ledgers;
        if (day >= window_start) {
            for (size_t c = 0; c < cells; ++c) out.window_mean_amount[c] += st.amount[c];
            for (int i = 0; i < col.n_nodes(); ++i) {
                out.window_mean_water[i] += st.water[i];
                out.window_mean_sl[i] += saturation(col, st, i);
            }
            ++window_days;
        }
        if ((day + 1) % sc.snapshot_every_days == 0 || day + 1 == horizon_days)
            take_snapshot(day + 1);
    }
    if (window_start == 0) {
        // Window covers the whole run; rates reference the initial ledgers.
        window_ledger_start = Ledgers{};
        window_ledger_start.gas_exchange.assign(net.gases.size(), 0.0);
    }

    if (window_days > 0) {
        for (size_t c = 0; c < cells; ++c) out.window_mean_amount[c] /= window_days;
        for (int i = 0; i < col.n_nodes(); ++i) {
            out.window_mean_water[i] /= window_days;
            out.window_mean_sl[i] /= window_days;
        }
    }

    // ---- Seven screening targets -----------------------------------------
    TargetOutputs t;
    t.window_start_day = window_start;
    t.window_end_day = horizon_days;
    double span_days = std::max<long>(window_days, 1);

    auto gas_rate = [&](const char* id, double kg_per_mol_atom, double atoms) {
        int sp = net.species_index(id);
        if (sp < 0) return 0.0;
        for (size_t g = 0; g < net.gases.size(); ++g)
            if (net.gases[g].gas == sp)
                return (st.ledgers.gas_exchange[g] -
                        window_ledger_start.gas_exchange[g]) /
                       span_days * atoms * kg_per_mol_atom;
        return 0.0;
    };
    t.co2_rate = gas_rate("CO2_g", kKgPerMolC, 1.0);
    t.nh3_rate = gas_rate("NH3_g", kKgPerMolN, 1.0);
    t.n2o_rate = gas_rate("N2O_g", kKgPerMolN, 2.0);
    t.no_rate = gas_rate("NO_g", kKgPerMolN, 1.0);

    const double depth_cap = 0.30;
    for (size_t sp = 0; sp < net.n_species(); ++sp) {
        const Species& s = net.species[sp];
        for (int i = 0; i < col.n_nodes(); ++i) {
            double overlap = std::max(
                0.0, std::min(col.grid.z_bot[i], depth_cap) - col.grid.z_top[i]);
            if (overlap <= 0) continue;
            double frac = overlap / col.grid.dz[i];
            double amount = out.window_mean_amount[sp * col.n_nodes() + i] * frac;
            bool organic = s.phase != Phase::Gaseous && s.carbon > 0 && !s.mineral;
            bool inorg_n = (s.phase == Phase::Aqueous || s.phase == Phase::Protected) &&
                           s.nitrogen > 0 && s.carbon == 0 && !s.inert;
            if (organic) {
                t.c_stock += amount * s.carbon * kKgPerMolC;
                t.n_stock += amount * s.nitrogen * kKgPerMolN;
            }
            if (inorg_n) t.n_inorg_stock += amount * s.nitrogen * kKgPerMolN;
        }
    }
    out.targets = t;
    return out;
}

}  // namespace soilcn
