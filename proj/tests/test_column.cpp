#include <doctest.h>

#include <cmath>
#include <numeric>

#include "soilcn/common.hpp"
#include "soilcn/kinetics.hpp"
#include "soilcn/network_io.hpp"
#include "soilcn/scenario.hpp"
#include "test_util.hpp"

using namespace soilcn;

TEST_CASE("texture regression matches the spreadsheet-evaluated goldens") {
    // 52/38/10 sand/silt/clay, evaluated independently from the published
    // regression equations and pinned here.
    BrooksCorey bc = texture_to_hydraulics(0.52, 0.38, 0.10);
    CHECK(bc.lambda == doctest::Approx(0.2222222222222222).epsilon(1e-12));
    CHECK(bc.psi_b == doctest::Approx(0.1580520015284257).epsilon(1e-12));
    CHECK(bc.k_sat == doctest::Approx(5.756138245334665e-06).epsilon(1e-12));
    CHECK(bc.s_res == doctest::Approx(0.07).epsilon(1e-12));
    CHECK(texture_porosity(0.52, 0.38, 0.10) ==
          doctest::Approx(0.42348).epsilon(1e-12));

    // determinism
    BrooksCorey bc2 = texture_to_hydraulics(0.52, 0.38, 0.10);
    CHECK(bc.k_sat == bc2.k_sat);
    CHECK(bc.psi_b == bc2.psi_b);

    // clay-heavier texture conducts less than a sand-heavier one
    BrooksCorey clayey = texture_to_hydraulics(0.10, 0.38, 0.52);
    CHECK(clayey.k_sat < bc.k_sat);
    CHECK(bc.lambda > 0.0);
    CHECK(bc.lambda <= 3.0);

    CHECK_THROWS_AS(texture_to_hydraulics(0.5, 0.5, 0.5), DomainError);
}

TEST_CASE("root weights: normalization, closed form, flat limit") {
    std::vector<SoilLayer> layers(1);
    layers[0].top = 0;
    layers[0].bottom = 3.0;
    Grid grid = make_grid(3.0, 20, layers);

    auto w = root_weights(0.075, grid);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    // top node of a 20-node, 3 m grid with 7.5 cm mean depth
    double expected = (1.0 - std::exp(-0.15 / 0.075)) / (1.0 - std::exp(-3.0 / 0.075));
    CHECK(w[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(w[0] == doctest::Approx(0.8646647167633873).epsilon(1e-9));

    // very large mean depth tends to thickness-proportional weights
    auto flat = root_weights(1.0e6, grid);
    for (double x : flat) CHECK(x == doctest::Approx(1.0 / 20).epsilon(1e-4));

    CHECK_THROWS_AS(root_weights(0.0, grid), DomainError);
}

namespace {

Scenario desk() {
    static Scenario sc = load_scenario(data_path("desk_grass.scn"));
    return sc;
}

ReactionNetwork bundled() { return load_network(data_path("example.net")); }

}  // namespace

TEST_CASE("water balance closes exactly over a simulated year") {
    ReactionNetwork net = bundled();
    Scenario sc = desk();
    Column col = build_column(sc, net);
    ColumnState st = initial_state(sc, col);
    auto weather = scenario_weather(sc, 1, 1);

    double storage0 = std::accumulate(st.water.begin(), st.water.end(), 0.0);
    for (int d = 0; d < 365; ++d) {
        double et = et_actual(weather[d], col.latitude, d % 365, col.k_c);
        water_step(col, st, weather[d].precip / 1000.0, et / 1000.0, 86400.0);
    }
    double storage1 = std::accumulate(st.water.begin(), st.water.end(), 0.0);
    const Ledgers& l = st.ledgers;
    double in = l.infiltration_m * 1000.0;
    double out = (l.et_m + l.drainage_m + l.runoff_m) * 1000.0;
    double residual = std::abs(in - out - (storage1 - storage0));
    double throughput = in + out;
    CHECK(residual < 1.0e-6 * throughput);
}

TEST_CASE("steady rain with no ET drains at the rain rate") {
    ReactionNetwork net = bundled();
    Scenario sc = desk();
    Column col = build_column(sc, net);
    ColumnState st = initial_state(sc, col);

    double drained_before = 0;
    for (int d = 0; d < 4000; ++d) {
        if (d == 3000) drained_before = st.ledgers.drainage_m;
        water_step(col, st, 1.05e-3, 0.0, 86400.0);
    }
    double per_day = (st.ledgers.drainage_m - drained_before) * 1000.0 / 1000.0;
    CHECK(per_day == doctest::Approx(1.05).epsilon(0.01));
}

TEST_CASE("rest state at field capacity without forcing stays put") {
    ReactionNetwork net = bundled();
    Scenario sc = desk();
    sc.initial_saturation = 0.20;  // conductivity is negligible down here
    Column col = build_column(sc, net);
    ColumnState st = initial_state(sc, col);
    auto before = st.water;
    double drain0 = st.ledgers.drainage_m;
    water_step(col, st, 0.0, 0.0, 86400.0);
    for (int i = 0; i < col.n_nodes(); ++i)
        CHECK(st.water[i] == doctest::Approx(before[i]).epsilon(1e-3));
    CHECK(st.ledgers.drainage_m - drain0 < 1e-5);
}

TEST_CASE("transport: zero flux, uniform concentration, downward pulse") {
    ReactionNetwork net = bundled();
    Scenario sc = desk();
    Column col = build_column(sc, net);
    int no3 = net.species_index("NO3");

    SUBCASE("zero fluxes leave concentrations unchanged") {
        ColumnState st = initial_state(sc, col);
        auto before = st.amount;
        WaterFluxPlan plan;
        WaterFluxPlan::Substep sub;
        sub.water_before = st.water;
        sub.inter.assign(col.n_nodes(), 0.0);
        sub.et.assign(col.n_nodes(), 0.0);
        plan.substeps.push_back(sub);
        transport_step(col, st, plan);
        CHECK(st.amount == before);
    }

    SUBCASE("advecting a uniform field keeps it uniform; efflux = flux x conc") {
        ColumnState st = initial_state(sc, col);
        // only NO3- present, at uniform concentration c
        std::fill(st.amount.begin(), st.amount.end(), 0.0);
        double c = 2.0e-4;
        for (int i = 0; i < col.n_nodes(); ++i) st.at(no3, i) = c * st.water[i];

        WaterFluxPlan plan;
        WaterFluxPlan::Substep sub;
        sub.water_before = st.water;
        sub.inter.assign(col.n_nodes(), 0.0);
        sub.et.assign(col.n_nodes(), 0.0);
        double q = 0.5;  // L/m2 between every pair and out the bottom
        for (int i = 0; i < col.n_nodes() - 1; ++i) sub.inter[i] = q;
        sub.drainage = q;
        plan.substeps.push_back(sub);
        double leach0 = st.ledgers.leach_n;
        transport_step(col, st, plan);

        // the interior stays uniform; only water bookkeeping moved moles around
        for (int i = 1; i < col.n_nodes(); ++i) {
            double w = st.water[i];
            CHECK(st.at(no3, i) / w == doctest::Approx(c).epsilon(1e-9));
        }
        CHECK(st.ledgers.leach_n - leach0 == doctest::Approx(q * c).epsilon(1e-9));
    }

    SUBCASE("a surface pulse moves down monotonically") {
        ColumnState st = initial_state(sc, col);
        for (int i = 0; i < col.n_nodes(); ++i) st.at(no3, i) = 0.0;
        st.at(no3, 0) = 1.0e-3;

        auto center_of_mass = [&] {
            double m = 0, zm = 0;
            for (int i = 0; i < col.n_nodes(); ++i) {
                m += st.at(no3, i);
                zm += st.at(no3, i) * col.grid.z_mid[i];
            }
            return zm / m;
        };
        double prev = center_of_mass();
        for (int step = 0; step < 20; ++step) {
            water_step(col, st, 5.0e-3, 0.0, 86400.0);  // 5 mm/day rain
            WaterFluxPlan plan = water_step(col, st, 5.0e-3, 0.0, 86400.0);
            transport_step(col, st, plan);
            double now = center_of_mass();
            CHECK(now >= prev - 1e-12);
            prev = now;
        }
        CHECK(prev > col.grid.z_mid[0]);
    }
}

TEST_CASE("inputs: zero standing pools, stream C:N, fixation shutoff") {
    ReactionNetwork net = bundled();
    Scenario sc = desk();

    SUBCASE("all standing pools zero leaves the state unchanged") {
        Scenario sc0 = sc;
        sc0.veg.standing.clear();
        Column col = build_column(sc0, net);
        ColumnState st = initial_state(sc0, col);
        auto before = st.amount;
        double fix0 = st.ledgers.fix_n;
        apply_inputs(col, st, 86400.0, 0.0);  // f_S = 0 also gates fixation
        CHECK(st.amount == before);
        CHECK(st.ledgers.fix_n == fix0);
    }

    SUBCASE("exudate stream adds N = C/12 on a mass basis") {
        Scenario sc1 = sc;
        sc1.veg.standing.clear();
        sc1.veg.standing["Exud-Root"] = 0.25;
        Column col = build_column(sc1, net);
        ColumnState st = initial_state(sc1, col);
        apply_inputs(col, st, 86400.0, 0.0);
        double c_kg = st.ledgers.input_c * kKgPerMolC;
        double n_kg = st.ledgers.input_n * kKgPerMolN;
        CHECK(c_kg > 0.0);
        CHECK(c_kg / n_kg == doctest::Approx(12.0).epsilon(0.02));
    }

    SUBCASE("leaf litter enters the top node only; C:N = 35") {
        Scenario sc1 = sc;
        sc1.veg.standing.clear();
        sc1.veg.standing["Litter-Leaf"] = 0.5;
        Column col = build_column(sc1, net);
        ColumnState st = initial_state(sc1, col);
        auto before = st.amount;
        apply_inputs(col, st, 86400.0, 0.0);
        double c_kg = st.ledgers.input_c * kKgPerMolC;
        double n_kg = st.ledgers.input_n * kKgPerMolN;
        CHECK(c_kg / n_kg == doctest::Approx(35.0).epsilon(0.02));
        for (size_t sp = 0; sp < net.n_species(); ++sp)
            for (int i = 1; i < col.n_nodes(); ++i)
                CHECK(st.at(static_cast<int>(sp), i) == before[sp * col.n_nodes() + i]);
    }

    SUBCASE("fixation scales with f_S") {
        Column col = build_column(sc, net);
        ColumnState st = initial_state(sc, col);
        double fix0 = st.ledgers.fix_n;
        apply_inputs(col, st, 86400.0, 0.0);
        CHECK(st.ledgers.fix_n == fix0);
        apply_inputs(col, st, 86400.0, 1.0);
        double full = st.ledgers.fix_n - fix0;
        CHECK(full > 0.0);
        apply_inputs(col, st, 86400.0, 0.5);
        CHECK(st.ledgers.fix_n - fix0 - full == doctest::Approx(0.5 * full).epsilon(1e-9));
    }
}

TEST_CASE("closed column conserves C and N through full advance steps") {
    ReactionNetwork net = bundled();
    Scenario sc = desk();
    sc.closed = true;
    Column col = build_column(sc, net);
    ColumnState st = initial_state(sc, col);
    auto weather = scenario_weather(sc, 3, 1);

    auto [c0, n0] = element_totals(col, st);
    for (int d = 0; d < 100; ++d) advance(col, st, weather[d], 86400.0);
    auto [c1, n1] = element_totals(col, st);

    // leaching still leaves via drainage=off, gas exchange off, inputs off;
    // clipping is ledgered
    CHECK(std::abs(c1 - st.ledgers.clip_c - c0) < 1.0e-6 * c0);
    CHECK(std::abs(n1 - st.ledgers.clip_n - n0) < 1.0e-6 * n0);
    for (double a : st.amount) CHECK(a >= 0.0);
}

TEST_CASE("advance with a rate-free network and no forcing changes nothing") {
    ReactionNetwork net = parse_ok(R"(
[network]
name inertpair
format 1

[species]
A aqueous C=1 N=0
B aqueous C=1 N=0
)");
    Scenario sc = desk();
    sc.closed = true;
    sc.initial.clear();
    sc.initial["A"] = 1.0e-4;
    sc.initial["B"] = 2.0e-4;
    sc.initial_saturation = 0.20;  // at rest, nothing conducts
    Column col = build_column(sc, net);
    ColumnState st = initial_state(sc, col);
    DailyWeather dry{0, 0.0, 10.0, 10.0};
    auto water = st.water;
    auto amount = st.amount;
    advance(col, st, dry, 86400.0);
    for (int i = 0; i < col.n_nodes(); ++i)
        CHECK(st.water[i] == doctest::Approx(water[i]).epsilon(1e-6));
    for (size_t c = 0; c < amount.size(); ++c)
        CHECK(st.amount[c] == doctest::Approx(amount[c]).epsilon(1e-9));
}

TEST_CASE("run_simulation: determinism, window, grid refinement") {
    ReactionNetwork net = bundled();
    Scenario sc = desk();
    sc.horizon_years = 1;
    sc.window_years = 1;
    sc.nodes = 6;
    sc.depth = 1.2;

    RunResult a = run_simulation(sc, net);
    RunResult b = run_simulation(sc, net);
    for (int i = 0; i < TargetOutputs::kCount; ++i)
        CHECK(a.targets.value(i) == b.targets.value(i));  // bit identical

    // window equal to horizon averages the full run
    CHECK(a.targets.window_start_day == 0);
    CHECK(a.targets.window_end_day == 365);

    // serial vs OpenMP node loop must agree bitwise
    RunResult c = run_simulation(sc, net, ParallelMode::OpenMP);
    for (int i = 0; i < TargetOutputs::kCount; ++i)
        CHECK(a.targets.value(i) == c.targets.value(i));

    // halving dt_outer moves the 1-year targets by less than 1%
    Scenario half = sc;
    half.dt_outer = 43200.0;
    RunResult d = run_simulation(half, net);
    for (int i = 0; i < TargetOutputs::kCount; ++i) {
        double ya = a.targets.value(i), yd = d.targets.value(i);
        if (std::abs(ya) > 1e-12)
            CHECK(std::abs(yd - ya) / std::abs(ya) < 0.01);
    }
}

TEST_CASE("desk-scale smoke run emits all seven targets") {
    ReactionNetwork net = bundled();
    Scenario sc = desk();
    sc.horizon_years = 2;
    sc.window_years = 1;
    RunResult run = run_simulation(sc, net);
    CHECK(run.targets.c_stock > 0.0);
    CHECK(run.targets.n_stock > 0.0);
    CHECK(run.targets.n_inorg_stock > 0.0);
    CHECK(std::isfinite(run.targets.co2_rate));
    CHECK(std::isfinite(run.targets.nh3_rate));
    CHECK(std::isfinite(run.targets.n2o_rate));
    CHECK(std::isfinite(run.targets.no_rate));
    CHECK(run.snapshots.size() >= 2);
    for (double a : run.window_mean_amount) CHECK(a >= 0.0);
}
