#include "soilcn/column.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "soilcn/common.hpp"
#include "soilcn/kinetics.hpp"

namespace soilcn {

// Continuous pedotransfer regressions in the Clapp-Hornberger
// b-parameterization (percent sand/clay):
//   b     = 2.91 + 0.159 * clay%
//   psi_s = 10^(1.88 - 0.0131 * sand%)            [cm]
//   K_s   = 10^(-0.884 + 0.0153 * sand%)          [inch/hr]
//   phi   = 0.489 - 0.00126 * sand%
BrooksCorey texture_to_hydraulics(double sand, double silt, double clay) {
    if (sand < 0 || silt < 0 || clay < 0 || std::abs(sand + silt + clay - 1.0) > 1.0e-6)
        throw DomainError("texture fractions must be nonnegative and sum to 1");
    double sand_pct = sand * 100.0, clay_pct = clay * 100.0;
    BrooksCorey bc;
    double b = 2.91 + 0.159 * clay_pct;
    bc.lambda = 1.0 / b;
    bc.psi_b = 0.01 * std::pow(10.0, 1.88 - 0.0131 * sand_pct);
    bc.k_sat = std::pow(10.0, -0.884 + 0.0153 * sand_pct) * 0.0254 / 3600.0;
    bc.s_res = 0.05 + 0.002 * clay_pct;
    return bc;
}

double texture_porosity(double sand, double silt, double clay) {
    if (sand < 0 || silt < 0 || clay < 0 || std::abs(sand + silt + clay - 1.0) > 1.0e-6)
        throw DomainError("texture fractions must be nonnegative and sum to 1");
    return 0.489 - 0.00126 * sand * 100.0;
}

double relative_conductivity(const BrooksCorey& bc, double s) {
    double se = (s - bc.s_res) / (1.0 - bc.s_res);
    se = std::clamp(se, 0.0, 1.0);
    return std::pow(se, 3.0 + 2.0 / bc.lambda);
}

Grid make_grid(double depth, int nodes, const std::vector<SoilLayer>& layers) {
    if (nodes < 1 || depth <= 0) throw ConfigError("grid needs nodes >= 1, depth > 0");
    Grid g;
    g.n = nodes;
    double dz = depth / nodes;
    for (int i = 0; i < nodes; ++i) {
        g.z_top.push_back(i * dz);
        g.z_bot.push_back((i + 1) * dz);
        g.z_mid.push_back((i + 0.5) * dz);
        g.dz.push_back(dz);
        int pick = static_cast<int>(layers.size()) - 1;
        for (size_t l = 0; l < layers.size(); ++l)
            if (g.z_mid[i] >= layers[l].top && g.z_mid[i] < layers[l].bottom) {
                pick = static_cast<int>(l);
                break;
            }
        if (pick < 0) throw ConfigError("no soil layer covers the column");
        g.layer.push_back(pick);
    }
    return g;
}

std::vector<double> root_weights(double mean_depth, const Grid& grid) {
    if (mean_depth <= 0) throw DomainError("root mean depth must be positive");
    std::vector<double> w(grid.n);
    double sum = 0;
    for (int i = 0; i < grid.n; ++i) {
        w[i] = std::exp(-grid.z_top[i] / mean_depth) -
               std::exp(-grid.z_bot[i] / mean_depth);
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

double saturation(const Column& col, const ColumnState& st, int node) {
    return st.water[node] / col.water_capacity[node];
}

WaterFluxPlan water_step(Column& col, ColumnState& st, double precip_m_day,
                         double et_m_day, double dt) {
    if (dt <= 0) throw DomainError("water step needs dt > 0");
    if (precip_m_day < 0 || et_m_day < 0) throw DomainError("negative forcing");

    const int n = col.n_nodes();
    WaterFluxPlan plan;
    // hydro_substeps is a per-day cadence so results do not depend on how
    // the day is cut into outer steps
    int substeps = std::max(
        1, static_cast<int>(std::ceil(col.opts.hydro_substeps * dt / 86400.0)));
    double dt_s = dt / substeps;
    double day_frac = dt_s / kSecondsPerDay;

    for (int s = 0; s < substeps; ++s) {
        WaterFluxPlan::Substep sub;
        sub.water_before = st.water;
        sub.inter.assign(n, 0.0);
        sub.et.assign(n, 0.0);
        sub.infiltration = precip_m_day * day_frac * 1000.0;  // [L/m2]

        double et_total = et_m_day * day_frac * 1000.0;
        double inflow = sub.infiltration;
        for (int i = 0; i < n; ++i) {
            double w = st.water[i] + inflow;
            double demand = et_total * col.roots[i];
            double et_i = std::min(demand, std::max(0.0, w - col.water_residual[i]));
            w -= et_i;
            sub.et[i] = et_i;
            const BrooksCorey& bc = col.layer_of(i).bc;
            double s_l = w / col.water_capacity[i];
            double q_cap = bc.k_sat * relative_conductivity(bc, s_l) * dt_s * 1000.0;
            bool bottom = (i == n - 1);
            double q = (bottom && !col.opts.enable_drainage)
                           ? 0.0
                           : std::min(q_cap, std::max(0.0, w - col.water_residual[i]));
            w -= q;
            st.water[i] = w;
            if (bottom) sub.drainage = q;
            else sub.inter[i] = q;
            inflow = q;
        }
        // Saturation excess backs up; node 0 excess leaves as runoff. The
        // displaced water carries no solutes (rejected infiltration).
        double excess = 0.0;
        for (int i = n - 1; i >= 0; --i) {
            st.water[i] += excess;
            excess = std::max(0.0, st.water[i] - col.water_capacity[i]);
            st.water[i] -= excess;
        }
        st.ledgers.runoff_m += excess / 1000.0;
        st.ledgers.infiltration_m += sub.infiltration / 1000.0;
        st.ledgers.drainage_m += sub.drainage / 1000.0;
        for (double e : sub.et) st.ledgers.et_m += e / 1000.0;
        plan.substeps.push_back(std::move(sub));
    }
    return plan;
}

void transport_step(const Column& col, ColumnState& st, const WaterFluxPlan& plan) {
    const int n = col.n_nodes();
    const auto& species = col.net->species;

    for (const auto& sub : plan.substeps) {
        for (size_t sp = 0; sp < species.size(); ++sp) {
            if (species[sp].phase != Phase::Aqueous) continue;
            double* amount = &st.amount[sp * n];
            double carry = 0.0;  // rain carries no solutes
            for (int i = 0; i < n; ++i) {
                double inflow_w = (i == 0) ? sub.infiltration : sub.inter[i - 1];
                double q = (i == n - 1) ? sub.drainage : sub.inter[i];
                amount[i] += carry;
                if (q <= 0.0) {
                    carry = 0.0;
                    continue;
                }
                // Donor water when the outflow leaves: after inflow and ET.
                double w_donor = sub.water_before[i] + inflow_w - sub.et[i];
                if (w_donor <= 0.0) {
                    carry = 0.0;
                    continue;
                }
                double moved = amount[i] * std::min(q / w_donor, 1.0);
                amount[i] -= moved;
                carry = moved;
            }
            // `carry` now leaves through the bottom.
            st.ledgers.leach_c += carry * species[sp].carbon;
            st.ledgers.leach_n += carry * species[sp].nitrogen;
        }
    }
}

void apply_inputs(const Column& col, ColumnState& st, double dt, double f_s_surface) {
    const ReactionNetwork& net = *col.net;
    const int n = col.n_nodes();

    for (int idx : net.litters) {
        const Reaction& rx = net.reactions[idx];
        auto it = col.veg.standing.find(rx.id);
        if (it == col.veg.standing.end() || it->second <= 0.0) continue;
        double flux_c_kg = rx.k * it->second * dt;  // [kg-C/m2] this step
        for (const auto& [sp, frac] : rx.compose) {
            double moles = flux_c_kg * frac / (kKgPerMolC * net.species[sp].carbon);
            if (rx.litter_target == Reaction::LitterTarget::Surface) {
                st.at(sp, 0) += moles;
            } else {
                for (int i = 0; i < n; ++i) st.at(sp, i) += moles * col.roots[i];
            }
            st.ledgers.input_c += moles * net.species[sp].carbon;
            st.ledgers.input_n += moles * net.species[sp].nitrogen;
        }
    }

    if (net.fixation >= 0) {
        const Reaction& rx = net.reactions[net.fixation];
        double f = rx.moisture ? f_s_surface : 1.0;
        double moles = rx.k * f * dt;  // [mol/m2]
        if (moles > 0) {
            for (int i = 0; i < n; ++i) st.at(rx.product, i) += moles * col.roots[i];
            st.ledgers.fix_n += moles * net.species[rx.product].nitrogen;
        }
    }
}

void apply_uptake(const Column& col, ColumnState& st, double dt) {
    const ReactionNetwork& net = *col.net;
    const int n = col.n_nodes();

    for (int idx : net.uptakes) {
        const Reaction& rx = net.reactions[idx];
        const MonodTerm& term = rx.substrates[0];
        for (int i = 0; i < n; ++i) {
            double w = st.water[i];
            if (w <= 0) continue;
            double conc = st.at(term.species, i) / w;
            if (conc <= 0) continue;
            double rate = rx.k * col.roots[i] * conc / (conc + term.value);  // [mol/L/s]
            double extent = rate * dt * w;  // [mol/m2]
            // Explicit step: never draw a species negative.
            for (const auto& [sp, coeff] : rx.stoich)
                if (coeff < 0)
                    extent = std::min(extent, st.at(sp, i) / -coeff);
            if (extent <= 0) continue;
            for (const auto& [sp, coeff] : rx.stoich) {
                st.at(sp, i) += coeff * extent;
                if (coeff > 0 && net.species[sp].phase == Phase::Biomass)
                    st.ledgers.uptake_n += coeff * extent * net.species[sp].nitrogen;
            }
        }
    }
}

void gas_partition_step(const Column& col, ColumnState& st) {
    const ReactionNetwork& net = *col.net;
    const int n = col.n_nodes();

    for (size_t g = 0; g < net.gases.size(); ++g) {
        const GasPair& pair = net.gases[g];
        for (int i = 0; i < n; ++i) {
            double vw = st.water[i];
            double vg = std::max(col.water_capacity[i] - vw, 0.0);
            double total = st.at(pair.gas, i) + st.at(pair.aqueous, i);
            double k = std::pow(10.0, log10_k(pair, st.temperature[i]));
            if (i == 0 && col.opts.enable_surface_exchange) {
                // Surface gas phase is held at the ambient concentration; the
                // aqueous phase equilibrates with it. Difference is exchange.
                double c_atm = col.atm_gas[g];
                double gas_amt = c_atm * vg;
                double aq_amt = k * c_atm * vw;
                st.ledgers.gas_exchange[g] += total - gas_amt - aq_amt;
                st.at(pair.gas, i) = gas_amt;
                st.at(pair.aqueous, i) = aq_amt;
            } else if (vg <= 1.0e-12 || vw <= 0.0) {
                // Saturated (or dry) node: single phase holds everything.
                if (vw > 0) {
                    st.at(pair.aqueous, i) = total;
                    st.at(pair.gas, i) = 0.0;
                }
            } else {
                double c_gas = total / (k * vw + vg);
                double gas_amt = c_gas * vg;
                st.at(pair.gas, i) = gas_amt;
                st.at(pair.aqueous, i) = total - gas_amt;
            }
        }
    }
}

namespace {

struct NodeScratch {
    std::vector<double> conc;
    std::vector<double> f_s;
    std::vector<double> qmax;
};

// Reaction integration for one node over dt; returns false on solver failure.
// Clipped element mass goes to the caller-provided per-node slots (the only
// cross-node output besides the node's own state, keeping the loop race-free).
bool react_node(const Column& col, ColumnState& st, int node, double dt,
                NodeScratch& ws, double& clip_c, double& clip_n) {
    const ReactionNetwork& net = *col.net;
    const size_t ns = net.n_species();
    double w = st.water[node];
    if (w <= 0) return true;

    double s_l = std::clamp(saturation(col, st, node), 0.0, 1.0);
    ws.f_s.resize(net.stress.size());
    for (size_t p = 0; p < net.stress.size(); ++p)
        ws.f_s[p] = moisture_stress(net.stress[p], s_l);
    ws.qmax.resize(net.pools.size());
    for (size_t p = 0; p < net.pools.size(); ++p)
        ws.qmax[p] = col.qmax_amount[p * col.n_nodes() + node] / w;

    ws.conc.resize(ns);
    for (size_t sp = 0; sp < ns; ++sp)
        ws.conc[sp] = net.species[sp].phase == Phase::Gaseous
                          ? 0.0
                          : st.at(static_cast<int>(sp), node) / w;

    NodeEnv env;
    env.h_conc = std::pow(10.0, -col.layer_of(node).ph);
    env.f_s = ws.f_s;
    env.qmax = ws.qmax;

    // Retry with halved horizons down to the configured floor.
    double chunk = dt;
    double done = 0.0;
    while (done < dt) {
        double step = std::min(chunk, dt - done);
        IntegrateResult r = integrate_node(net, env, ws.conc, step, col.opts.rtol);
        if (!r.ok) {
            if (chunk <= col.opts.dt_outer_floor) return false;
            chunk *= 0.5;
            continue;
        }
        clip_c += r.clipped_c * w;
        clip_n += r.clipped_n * w;
        done += step;
    }

    for (size_t sp = 0; sp < ns; ++sp)
        if (net.species[sp].phase != Phase::Gaseous)
            st.at(static_cast<int>(sp), node) = ws.conc[sp] * w;
    return true;
}

void dump_state(const Column& col, const ColumnState& st, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) return;
    std::fprintf(f, "node,water_l_m2");
    for (const auto& sp : col.net->species) std::fprintf(f, ",%s", sp.id.c_str());
    std::fprintf(f, "\n");
    for (int i = 0; i < col.n_nodes(); ++i) {
        std::fprintf(f, "%d,%s", i, format_double(st.water[i]).c_str());
        for (size_t sp = 0; sp < col.net->n_species(); ++sp)
            std::fprintf(f, ",%s",
                         format_double(st.at(static_cast<int>(sp), i)).c_str());
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

}  // namespace

void advance(Column& col, ColumnState& st, const DailyWeather& day, double dt_outer) {
    const ReactionNetwork& net = *col.net;
    const int n = col.n_nodes();

    // Surface temperature anomaly damped with depth.
    double t_surf = 273.15 + 0.5 * (day.t_min + day.t_max);
    for (int i = 0; i < n; ++i)
        st.temperature[i] = col.mean_annual_temp_k +
                            (t_surf - col.mean_annual_temp_k) *
                                std::exp(-col.grid.z_mid[i] / col.damping_depth);

    int doy = day.day % kDaysPerYear;
    double et_mm = et_actual(day, col.latitude, doy, col.k_c);

    // The whole operator split cycles on the fixed chemistry cadence, so
    // results do not depend on how the forcing day is cut into outer steps.
    int n_cycles = std::max(1, static_cast<int>(std::ceil(dt_outer / col.opts.dt_chem)));
    double dt_c = dt_outer / n_cycles;

    for (int cycle = 0; cycle < n_cycles; ++cycle) {
        WaterFluxPlan plan = water_step(col, st, day.precip / 1000.0, et_mm / 1000.0,
                                        dt_c);
        transport_step(col, st, plan);

        double s0 = std::clamp(saturation(col, st, 0), 0.0, 1.0);
        double f_s_surface = moisture_stress(net.stress[0], s0);
        if (col.opts.enable_inputs) apply_inputs(col, st, dt_c, f_s_surface);
        if (col.opts.enable_uptake) apply_uptake(col, st, dt_c);

        // The per-node reaction kernel is independent across nodes. Both
        // paths write per-node clip sums into slots and merge them in node
        // order, so serial and OpenMP results are bitwise identical.
        std::vector<double> clip_c(n, 0.0), clip_n(n, 0.0);
        std::vector<char> node_failed(n, 0);
        auto run_node = [&](int i, NodeScratch& ws) {
            if (!react_node(col, st, i, dt_c, ws, clip_c[i], clip_n[i]))
                node_failed[i] = 1;
        };

        if (col.opts.parallel == ParallelMode::OpenMP) {
#ifdef _OPENMP
#pragma omp parallel
            {
                NodeScratch ws;
#pragma omp for schedule(dynamic)
                for (int i = 0; i < n; ++i) run_node(i, ws);
            }
#else
            NodeScratch ws;
            for (int i = 0; i < n; ++i) run_node(i, ws);
#endif
        } else {
            NodeScratch ws;
            for (int i = 0; i < n; ++i) run_node(i, ws);
        }

        bool failed = false;
        for (int i = 0; i < n; ++i) {
            st.ledgers.clip_c += clip_c[i];
            st.ledgers.clip_n += clip_n[i];
            if (node_failed[i]) failed = true;
        }
        if (failed) {
            dump_state(col, st, "soilcn_state_dump.csv");
            throw DomainError(
                "reaction integration failed below the dt floor; state dumped "
                "to soilcn_state_dump.csv");
        }

        gas_partition_step(col, st);
    }
}

std::pair<double, double> element_totals(const Column& col, const ColumnState& st) {
    double c = 0, n = 0;
    const auto& species = col.net->species;
    for (size_t sp = 0; sp < species.size(); ++sp)
        for (int i = 0; i < col.n_nodes(); ++i) {
            c += st.at(static_cast<int>(sp), i) * species[sp].carbon;
            n += st.at(static_cast<int>(sp), i) * species[sp].nitrogen;
        }
    return {c, n};
}

}  // namespace soilcn
