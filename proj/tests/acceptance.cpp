// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "soilcn/common.hpp"
#include "soilcn/csv.hpp"
#include "soilcn/ensemble.hpp"
#include "soilcn/kinetics.hpp"
#include "soilcn/morris.hpp"
#include "soilcn/network_io.hpp"
#include "soilcn/report.hpp"
#include "soilcn/scenario.hpp"

using namespace soilcn;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_data;

void criterion(int number, const std::string& what, bool pass,
               const std::string& detail = "") {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", number,
                what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt(double v) { return format_double(v); }

ParameterSpace toy_space(int k, int levels) {
    ParameterSpace space;
    space.levels = levels;
    for (int i = 0; i < k; ++i)
        space.specs.push_back({"p" + std::to_string(i), 1.0, 0.5, 1.5, ""});
    return space;
}

EnsembleResult run_toy(const ParameterSpace& space,
                       const std::vector<Trajectory>& trajs,
                       const std::function<double(std::span<const double>)>& f) {
    PointModel model = [&](std::span<const double> x) {
        return std::vector<double>{f(x)};
    };
    return execute_ensemble(space, trajs, {"y"}, model);
}

// ---- criteria ------------------------------------------------------------

void criterion_1_budget() {
    auto t0 = std::chrono::steady_clock::now();
    ReactionNetwork net = load_network(g_data + "/example.net");
    ParameterCatalog cat = catalog_parameters(net);
    ParameterSpace space = make_parameter_space(cat, 11);
    auto trajs = sample_trajectories(space, 10, 1);
    size_t points = 0;
    for (const auto& t : trajs) points += t.points.size();
    double secs = seconds_since(t0);
    criterion(1, "K = 70, n = 10, l = 11 produce exactly 710 evaluation points",
              space.dim() == 70 && points == 710 && secs < 1.0,
              "K=" + std::to_string(space.dim()) + " points=" +
                  std::to_string(points) + " in " + fmt(secs) + " s");
}

void criterion_2_oracle() {
    ParameterSpace space = toy_space(2, 5);
    auto model = [](std::span<const double> x) { return 3.0 * x[0] + x[1]; };

    auto all = enumerate_trajectories(space);
    EnsembleResult full = run_toy(space, all, model);
    EffectSet set_full = elementary_effects(space, all, full, 0);
    double ratio_full = *mu_index(set_full.effects[0]) / *mu_index(set_full.effects[1]);

    auto sampled = sample_trajectories(space, 10, 7);
    EnsembleResult sub = run_toy(space, sampled, model);
    EffectSet set_sub = elementary_effects(space, sampled, sub, 0);
    double ratio_sub = *mu_index(set_sub.effects[0]) / *mu_index(set_sub.effects[1]);

    bool pass = std::abs(ratio_full - 3.0) < 1.0e-9 &&
                std::abs(ratio_sub - 3.0) < 1.0e-9;
    criterion(2, "mu1/mu2 = 3 for y = 3p1 + p2 against brute-force enumeration",
              pass, "enumerated " + std::to_string(all.size()) +
                        " trajectories, ratio=" + fmt(ratio_full));
}

void criterion_3_median() {
    double outlier = *mu_index({1, 1, 1, 1, 1, 1, 1, 1, 1, 100});
    double signflip = *mu_index({2.0, -2.0, 2.0, -2.0});
    criterion(3, "median robustness: nine 1s + one 100 -> 1; {+2,-2,...} -> 2",
              outlier == 1.0 && signflip == 2.0,
              "mu=" + fmt(outlier) + ", " + fmt(signflip));
}

void criterion_4_scale_invariance() {
    ParameterSpace space = toy_space(4, 11);
    auto trajs = sample_trajectories(space, 10, 31);
    auto f = [](std::span<const double> x) {
        return x[0] * x[0] + 3.0 * x[1] + 0.2 * x[2] * x[3] + 0.7;
    };
    EnsembleResult base = run_toy(space, trajs, f);
    EnsembleResult pow2 = run_toy(space, trajs, [&](std::span<const double> x) {
        return 1024.0 * f(x);
    });
    EnsembleResult big = run_toy(space, trajs, [&](std::span<const double> x) {
        return 1.0e6 * f(x);
    });
    EffectSet a = elementary_effects(space, trajs, base, 0);
    EffectSet b = elementary_effects(space, trajs, pow2, 0);
    EffectSet c = elementary_effects(space, trajs, big, 0);

    bool bit_identical = true;
    std::vector<double> mu_a, mu_c;
    for (size_t k = 0; k < space.dim(); ++k) {
        double ma = *mu_index(a.effects[k]);
        double mb = *mu_index(b.effects[k]);
        if (ma != mb) bit_identical = false;
        mu_a.push_back(ma);
        mu_c.push_back(*mu_index(c.effects[k]));
    }
    std::vector<size_t> ra(space.dim()), rc(space.dim());
    std::iota(ra.begin(), ra.end(), 0);
    rc = ra;
    std::sort(ra.begin(), ra.end(), [&](size_t i, size_t j) { return mu_a[i] > mu_a[j]; });
    std::sort(rc.begin(), rc.end(), [&](size_t i, size_t j) { return mu_c[i] > mu_c[j]; });
    criterion(4, "positive scaling leaves mu and rankings identical",
              bit_identical && ra == rc,
              bit_identical ? "bit-identical under exact scaling, ranking stable"
                            : "mu changed under scaling");
}

void criterion_5_reliability() {
    auto make_runs = [](int below, int total) {
        EnsembleResult r;
        r.target_names = {"y"};
        for (int i = 0; i < total; ++i) {
            RunRecord rec;
            rec.trajectory = i;
            rec.step = 0;
            rec.ok = true;
            rec.targets = {i < below ? 0.5e-10 : 1.0};
            r.records.push_back(rec);
        }
        return r;
    };
    bool above = reliability_flag(make_runs(51, 100), 0, 1.0e-10, 0.5).unreliable;
    bool at = reliability_flag(make_runs(50, 100), 0, 1.0e-10, 0.5).unreliable;
    bool all = reliability_flag(make_runs(100, 100), 0, 1.0e-10, 0.5).unreliable;
    criterion(5, "reliability flag trips above 50% below-floor, not at exactly 50%",
              above && !at && all,
              std::string("51%->") + (above ? "flag" : "no") + ", 50%->" +
                  (at ? "flag" : "no"));
}

void criterion_6_conservation() {
    auto t0 = std::chrono::steady_clock::now();
    ReactionNetwork net = load_network(g_data + "/example.net");
    Scenario sc = load_scenario(g_data + "/desk_grass.scn");
    sc.closed = true;
    Column col = build_column(sc, net);
    ColumnState st = initial_state(sc, col);
    auto weather = scenario_weather(sc, sc.seed, 3);

    auto [c0, n0] = element_totals(col, st);
    for (int d = 0; d < 1000; ++d)
        advance(col, st, weather[d % weather.size()], 86400.0);
    auto [c1, n1] = element_totals(col, st);
    double rel_c = std::abs(c1 - st.ledgers.clip_c - c0) / c0;
    double rel_n = std::abs(n1 - st.ledgers.clip_n - n0) / n0;
    double secs = seconds_since(t0);
    criterion(6, "closed column conserves C and N over 1000 outer steps (1e-6)",
              rel_c < 1.0e-6 && rel_n < 1.0e-6 && secs < 60.0,
              "relC=" + fmt(rel_c) + " relN=" + fmt(rel_n) + " in " + fmt(secs) +
                  " s");
}

void criterion_7_kinetics() {
    ReactionNetwork net = [] {
        NetworkDocument doc = parse_network(R"(
[species]
S aqueous C=5 N=1
I aqueous C=0 N=0
B biomass C=5 N=1 x=1

[reaction Grow]
kind monod
rate 2.0e-6 /s
actor B
yield 1.0
monod S 1.0e-4
inhibit I 5.0e-5
stoich S:-1 B:1
)");
        std::vector<Diagnostic> diags;
        return *validate(doc, diags);
    }();
    const Reaction& rx = net.reactions[0];
    std::vector<double> conc(net.n_species(), 0.0);
    conc[net.species_index("B")] = 1.0;
    conc[net.species_index("S")] = 1.0e-4;
    double half = reaction_rate(net, rx, conc, 1.0);
    conc[net.species_index("I")] = 5.0e-5;
    double inhibited = reaction_rate(net, rx, conc, 1.0);

    double kcd = 4.0e-10;
    double quarter = chemo_denit_rate(kcd, 1.0e-4, 3.0e-6, 1.0e-4, 3.0e-6);

    double kp = 3.30e-12, k_unp = 2.0e-8, qmax = 0.05, x_aq = 1.0e-3;
    double x_star = qmax * kp * x_aq / (k_unp + kp * x_aq);
    double flux_at_star = protection_flux(kp, k_unp, qmax, x_aq, x_star);

    double b = k_unp + kp * x_aq;
    double x_p = 0.0, dt = 0.05 / b;
    for (int i = 0; i < 2000; ++i) {
        double k1 = protection_flux(kp, k_unp, qmax, x_aq, x_p);
        double k2 = protection_flux(kp, k_unp, qmax, x_aq, x_p + 0.5 * dt * k1);
        x_p += dt * k2;
    }

    bool pass = std::abs(half - 1.0e-6) < 1.0e-9 * 1.0e-6 &&
                std::abs(inhibited - 0.5e-6) < 1.0e-9 * 0.5e-6 &&
                std::abs(quarter - kcd / 4) < 1.0e-9 * kcd / 4 &&
                std::abs(flux_at_star) < 1.0e-9 * k_unp * x_star &&
                std::abs(x_p - x_star) / x_star < 1.0e-3;
    criterion(7, "kinetics closed forms (1e-9 rel) and Langmuir convergence (0.1%)",
              pass, "half=" + fmt(half) + " cd/4=" + fmt(quarter) +
                        " langmuir_err=" + fmt(std::abs(x_p - x_star) / x_star));
}

void criterion_8_gas_direction() {
    ReactionNetwork net = load_network(g_data + "/example.net");
    const GasPair* co2 = nullptr;
    const GasPair* nh3 = nullptr;
    for (const auto& g : net.gases) {
        if (net.species[g.gas].id == "CO2_g") co2 = &g;
        if (net.species[g.gas].id == "NH3_g") nh3 = &g;
    }
    double total = 1.0e-3, vw = 2.0, vg = 2.0, temp = 288.15;
    auto [aq_c, gas_c] = gas_partition(*co2, total, temp, vw, vg);
    auto [aq_n, gas_n] = gas_partition(*nh3, total, temp, vw, vg);
    double frac_co2 = gas_c * vg / total, frac_nh3 = gas_n * vg / total;
    bool logs = log10_k(*co2, temp) < 0.0 && log10_k(*nh3, temp) > 0.0;
    criterion(8, "CO2 partitions to gas more strongly than NH3",
              logs && frac_co2 > frac_nh3,
              "gas fraction CO2=" + fmt(frac_co2) + " NH3=" + fmt(frac_nh3));
}

void criterion_9_weather() {
    auto t0 = std::chrono::steady_clock::now();
    WeatherGenParams truth;
    for (auto& m : truth.months) {
        m.p_wd = 0.30;
        m.p_ww = 0.50;
        m.gamma_shape = 0.8;
        m.gamma_scale = 3.5;
        m.tmax_mean[0] = m.tmax_mean[1] = 20.0;
        m.tmin_mean[0] = m.tmin_mean[1] = 10.0;
        m.tmax_sd[0] = m.tmax_sd[1] = 3.0;
        m.tmin_sd[0] = m.tmin_sd[1] = 3.0;
    }
    auto history = generate(truth, 2, 17);
    WeatherGenParams fitted = fit_generator(history);
    auto gen = generate(fitted, 200, 18);

    std::array<double, 12> h_wet{}, h_days{}, h_sum{}, g_wet{}, g_days{}, g_sum{};
    for (const auto& d : history) {
        int m = month_of_yday(d.day);
        h_days[m] += 1;
        h_sum[m] += d.precip;
        if (d.precip > 0.1) h_wet[m] += 1;
    }
    for (const auto& d : gen) {
        int m = month_of_yday(d.day);
        g_days[m] += 1;
        g_sum[m] += d.precip;
        if (d.precip > 0.1) g_wet[m] += 1;
    }
    double worst_freq = 0, worst_precip = 0;
    for (int m = 0; m < 12; ++m) {
        worst_freq = std::max(worst_freq, std::abs(g_wet[m] / g_days[m] -
                                                   h_wet[m] / h_days[m]));
        double hm = h_sum[m] / h_days[m];
        if (hm > 0.2)
            worst_precip = std::max(
                worst_precip, std::abs(g_sum[m] / g_days[m] - hm) / hm);
    }

    auto longrun = generate(truth, 1000, 5);
    double mean = 0;
    for (const auto& d : longrun) mean += d.precip;
    mean /= longrun.size();
    double secs = seconds_since(t0);
    criterion(9, "weather equivalence (0.05 freq, 10% precip, 5% of 1.05 mm/day)",
              worst_freq < 0.05 && worst_precip < 0.10 &&
                  std::abs(mean - 1.05) / 1.05 < 0.05 && secs < 30.0,
              "freq_err=" + fmt(worst_freq) + " precip_err=" + fmt(worst_precip) +
                  " longrun_mean=" + fmt(mean) + " in " + fmt(secs) + " s");
}

void criterion_10_et_scaling() {
    WeatherGenParams p;
    for (auto& m : p.months) {
        m.p_wd = 0.3;
        m.p_ww = 0.5;
        m.gamma_shape = 0.8;
        m.gamma_scale = 3.5;
        m.tmax_mean[0] = 24;
        m.tmax_mean[1] = 22;
        m.tmin_mean[0] = 12;
        m.tmin_mean[1] = 11;
    }
    auto days = generate(p, 1, 3);
    bool exact = true;
    for (const auto& d : days) {
        double forest = et_actual(d, -33.8, d.day % 365, 1.0);
        double grass = et_actual(d, -33.8, d.day % 365, 0.8);
        if (grass != 0.8 * forest) exact = false;
    }
    criterion(10, "k_c = 0.8 vs 1.0 gives a bit-exact 0.8 ratio on every day",
              exact);
}

void criterion_11_saturation_ordering() {
    auto t0 = std::chrono::steady_clock::now();
    ReactionNetwork net = load_network(g_data + "/example.net");
    Scenario base = load_scenario(g_data + "/desk_grass.scn");

    // mean daily precip = wet_freq (0.375) x shape x scale
    auto with_scale = [&](double mm_per_day) {
        Scenario sc = base;
        double wet_mean = mm_per_day / 0.375;
        for (auto& m : sc.synthetic.months) m.gamma_scale = wet_mean / m.gamma_shape;
        return sc;
    };

    auto root_zone_sl = [&](const Scenario& sc) {
        RunResult run = run_simulation(sc, net);
        Column col = build_column(sc, net);
        double wsum = 0, s = 0;
        for (int i = 0; i < col.n_nodes(); ++i) {
            double ov = std::max(0.0, std::min(col.grid.z_bot[i], 0.30) -
                                          col.grid.z_top[i]);
            if (ov <= 0) continue;
            s += run.window_mean_sl[i] * ov;
            wsum += ov;
        }
        return s / wsum;
    };

    double sag = root_zone_sl(with_scale(0.80));
    double teg = root_zone_sl(with_scale(1.05));
    double trg = root_zone_sl(with_scale(3.29));
    double secs = seconds_since(t0);
    criterion(11, "root-zone S_l strictly ordered SAG < TEG < TRG (20-year runs)",
              sag < teg && teg < trg && secs < 600.0,
              "S_l = " + fmt(sag) + " / " + fmt(teg) + " / " + fmt(trg) + " in " +
                  fmt(secs) + " s");
}

void criterion_12_determinism() {
    ReactionNetwork net = load_network(g_data + "/example.net");
    Scenario sc = load_scenario(g_data + "/desk_grass.scn");
    sc.horizon_years = 1;
    sc.window_years = 1;
    sc.nodes = 4;
    sc.depth = 0.8;
    sc.seed = 7;

    // simulate twice with the same seed: byte-identical outputs
    fs::create_directories("acc_det");
    Column col = build_column(sc, net);
    for (int round = 0; round < 2; ++round) {
        RunResult run = run_simulation(sc, net);
        std::string dir = "acc_det/sim" + std::to_string(round);
        fs::create_directories(dir);
        write_targets_csv(dir + "/targets.csv", run.targets);
        write_snapshots_csv(dir + "/snapshots.csv", run, net, col);
        write_ledger_csv(dir + "/ledger.csv", run, net);
    }
    bool sim_same =
        read_text_file("acc_det/sim0/targets.csv") ==
            read_text_file("acc_det/sim1/targets.csv") &&
        read_text_file("acc_det/sim0/snapshots.csv") ==
            read_text_file("acc_det/sim1/snapshots.csv") &&
        read_text_file("acc_det/sim0/ledger.csv") ==
            read_text_file("acc_det/sim1/ledger.csv");

    // screening at concurrency 1 vs 8: byte-identical result tables
    ParameterCatalog cat = catalog_parameters(net);
    ParameterCatalog small;
    for (const char* p :
         {"mortality.AER.delta", "reaction.Resp-Msa-AER.k", "param.km_o2"})
        small.entries.push_back(cat.entries[cat.index_of(p)]);
    ParameterSpace space = make_parameter_space(small, 11);
    auto trajs = sample_trajectories(space, 2, 7);
    auto weather = scenario_weather(sc, sc.seed, sc.horizon_years);
    PointModel model = simulator_model(sc, net, space, weather);
    std::vector<std::string> names;
    for (const char* n : TargetOutputs::names()) names.push_back(n);

    for (int conc : {1, 8}) {
        EnsembleOptions opts;
        opts.concurrency = conc;
        EnsembleResult runs = execute_ensemble(space, trajs, names, model, opts);
        SensitivityResult result = sensitivity_indices(space, trajs, runs);
        std::string dir = "acc_det/screen" + std::to_string(conc);
        fs::create_directories(dir);
        write_sensitivity_csv(dir + "/sensitivity.csv", result);
        write_effects_csv(dir + "/effects.csv", space, result);
    }
    bool screen_same =
        read_text_file("acc_det/screen1/sensitivity.csv") ==
            read_text_file("acc_det/screen8/sensitivity.csv") &&
        read_text_file("acc_det/screen1/effects.csv") ==
            read_text_file("acc_det/screen8/effects.csv");
    fs::remove_all("acc_det");
    criterion(12, "fixed seed gives byte-identical outputs at concurrency 1 and 8",
              sim_same && screen_same,
              std::string("simulate ") + (sim_same ? "ok" : "DIFFERS") +
                  ", screen " + (screen_same ? "ok" : "DIFFERS"));
}

void criterion_13_sweep() {
    auto t0 = std::chrono::steady_clock::now();
    ReactionNetwork net = load_network(g_data + "/example.net");
    Scenario sc = load_scenario(g_data + "/desk_grass.scn");

    SweepResult r = sweep_parameter(sc, net, "mortality.AER.delta", 0.4, 3);

    bool values_ok = r.steps.size() == 3 &&
                     std::abs(r.steps[0].value - 0.6e-7) < 1e-15 &&
                     std::abs(r.steps[1].value - 1.0e-7) < 1e-15 &&
                     std::abs(r.steps[2].value - 1.4e-7) < 1e-15;

    // machinery: increment tables and F/AER profiles for every step
    fs::create_directories("acc_sweep");
    write_sweep_csv("acc_sweep/sweep.csv", r);
    Column col = build_column(sc, net);
    bool profiles_ok = true;
    for (size_t i = 0; i < r.steps.size(); ++i) {
        std::string path = "acc_sweep/profiles" + std::to_string(i) + ".csv";
        write_profiles_csv(path, r.steps[i].run, net, col, {"F", "AER", "Lig"});
        CsvTable t = read_csv_file(path);
        if (t.column("F") < 0 || t.column("AER") < 0 ||
            t.rows.size() != size_t(col.n_nodes()))
            profiles_ok = false;
    }
    CsvTable table = read_csv_file("acc_sweep/sweep.csv");
    bool table_ok = table.column("incr_co2_rate") >= 0 &&
                    table.column("c_polymers") >= 0 && table.rows.size() == 3;
    bool ref_zero = true;
    for (int y = 0; y < TargetOutputs::kCount; ++y)
        if (r.steps[r.reference_step].increments[y] != 0.0) ref_zero = false;
    fs::remove_all("acc_sweep");

    double secs = seconds_since(t0);
    bool machinery = values_ok && profiles_ok && table_ok && ref_zero;
    criterion(13, "delta_AER sweep emits increment tables and F/AER profiles",
              machinery, "3 runs in " + fmt(secs) + " s");

    // direction check: a finding, not a test abort
    double co2_low = r.steps[0].targets[0];
    double co2_mid = r.steps[1].targets[0];
    double co2_high = r.steps[2].targets[0];
    if (co2_low > co2_mid && co2_mid > co2_high) {
        std::printf("       finding: CO2 emission decreases monotonically with "
                    "delta_AER (%s > %s > %s)\n",
                    fmt(co2_low).c_str(), fmt(co2_mid).c_str(),
                    fmt(co2_high).c_str());
    } else {
        std::printf("       finding: CO2 emission NOT monotone in delta_AER on "
                    "the bundled network (%s, %s, %s) -- reported as a finding, "
                    "not a failure, since bundled parameters are illustrative\n",
                    fmt(co2_low).c_str(), fmt(co2_mid).c_str(),
                    fmt(co2_high).c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    g_data = argc > 1 ? argv[1] : "data";
    std::printf("acceptance suite (data: %s)\n", g_data.c_str());

    criterion_1_budget();
    criterion_2_oracle();
    criterion_3_median();
    criterion_4_scale_invariance();
    criterion_5_reliability();
    criterion_6_conservation();
    criterion_7_kinetics();
    criterion_8_gas_direction();
    criterion_9_weather();
    criterion_10_et_scaling();
    criterion_11_saturation_ordering();
    criterion_12_determinism();
    criterion_13_sweep();

    if (g_failures == 0) {
        std::printf("all 13 criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
}
