#include "soilcn/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "soilcn/common.hpp"

namespace soilcn {

namespace {

// Smooth availability cutoff for consumed species that carry no Monod
// factor of their own; keeps the assembled RHS from drawing pools negative.
constexpr double kAvailEps = 1.0e-8;  // [mol/L]

// Monod/inhibition product without input validation; callers keep the state
// in the nonnegative orthant.
double rate_unchecked(const ReactionNetwork&, const Reaction& rx,
                      std::span<const double> conc, double f_s) {
    double r = rx.k * f_s;
    if (rx.actor >= 0) {
        r *= conc[rx.actor] / rx.yield;
    }
    for (const auto& t : rx.substrates) {
        double x = conc[t.species];
        r *= x / (x + t.value);
    }
    for (const auto& t : rx.inhibitors) {
        double x = conc[t.species];
        r *= t.value / (t.value + x);
    }
    return r;
}

double assembled_rate(const ReactionNetwork& net, const Reaction& rx,
                      std::span<const double> conc, double f_s) {
    double r = rate_unchecked(net, rx, conc, f_s);
    for (int sp : rx.availability) {
        double x = conc[sp];
        r *= x / (x + kAvailEps);
    }
    return r;
}

double f_s_of(const ReactionNetwork& net, const Reaction& rx, const NodeEnv& env) {
    if (!rx.moisture || env.f_s.empty()) return 1.0;
    int profile = 0;
    if (rx.actor >= 0 && net.species[rx.actor].stress >= 0)
        profile = net.species[rx.actor].stress;
    return env.f_s[profile];
}

}  // namespace

double reaction_rate(const ReactionNetwork& net, const Reaction& rx,
                     std::span<const double> conc, double f_s) {
    if (f_s < 0.0 || f_s > 1.0) throw DomainError("f_S outside [0,1]");
    if (rx.actor >= 0 && conc[rx.actor] < 0.0)
        throw DomainError("negative biomass concentration");
    for (const auto& t : rx.substrates)
        if (conc[t.species] < 0.0)
            throw DomainError("negative substrate concentration: " + net.species[t.species].id);
    for (const auto& t : rx.inhibitors)
        if (conc[t.species] < 0.0)
            throw DomainError("negative inhibitor concentration: " + net.species[t.species].id);
    return rate_unchecked(net, rx, conc, f_s);
}

double biomass_derivative(const MortalityLaw& law,
                          std::span<const std::pair<double, double>> contributions,
                          double biomass) {
    if (biomass < 0.0) throw DomainError("negative biomass");
    double d = -law.delta * biomass;
    for (const auto& [yield, rate] : contributions) {
        if (rate < 0.0) throw DomainError("negative reaction rate");
        d += yield * rate;
    }
    return d;
}

double chemo_denit_rate(double k_cd, double km_no2, double km_h,
                        double no2, double h) {
    if (no2 < 0.0 || h < 0.0) throw DomainError("negative concentration");
    return k_cd * (no2 / (no2 + km_no2)) * (h / (h + km_h));
}

double protection_flux(double kp, double k_unp, double q_max,
                       double x_aq, double x_p) {
    if (x_aq < 0.0 || x_p < 0.0) throw DomainError("negative concentration");
    if (x_p > q_max) throw DomainError("protected amount exceeds capacity");
    return kp * (q_max - x_p) * x_aq - k_unp * x_p;
}

double log10_k(const GasPair& gas, double temperature_k) {
    double dt = temperature_k - 298.15;
    return gas.logk[0] + gas.logk[1] * dt + gas.logk[2] * dt * dt;
}

std::pair<double, double> gas_partition(const GasPair& gas, double total_moles,
                                        double temperature_k, double water_volume_l,
                                        double gas_volume_l) {
    if (water_volume_l <= 0.0 || gas_volume_l <= 0.0)
        throw DomainError("nonpositive phase volume");
    if (total_moles < 0.0) throw DomainError("negative total moles");
    double k = std::pow(10.0, log10_k(gas, temperature_k));
    double c_gas = total_moles / (k * water_volume_l + gas_volume_l);
    // Close the balance on the aqueous side so moles conserve exactly.
    double c_aq = (total_moles - c_gas * gas_volume_l) / water_volume_l;
    return {c_aq, c_gas};
}

double moisture_stress(const StressProfile& p, double s_l) {
    if (s_l < 0.0 || s_l > 1.0) throw DomainError("saturation outside [0,1]");
    double f = 0.0;
    if (p.form == StressProfile::Form::Increasing) {
        if (s_l <= p.s_min) return 0.0;
        if (s_l >= p.s_opt) return 1.0;
        f = std::pow((s_l - p.s_min) / (p.s_opt - p.s_min), p.a);
    } else {
        if (s_l <= p.s_min || s_l >= p.s_max) return 0.0;
        if (s_l < p.s_opt)
            f = std::pow((s_l - p.s_min) / (p.s_opt - p.s_min), p.a);
        else if (s_l > p.s_opt)
            f = std::pow((p.s_max - s_l) / (p.s_max - p.s_opt), p.b);
        else
            f = 1.0;
    }
    return std::clamp(f, 0.0, 1.0);
}

void node_rhs(const ReactionNetwork& net, const NodeEnv& env,
              std::span<const double> conc, std::span<double> dcdt) {
    std::fill(dcdt.begin(), dcdt.end(), 0.0);

    for (int idx : net.kinetic) {
        const Reaction& rx = net.reactions[idx];
        double rate = 0.0;
        switch (rx.kind) {
            case ReactionKind::Monod:
                rate = assembled_rate(net, rx, conc, f_s_of(net, rx, env));
                break;
            case ReactionKind::ChemoDenit:
                rate = chemo_denit_rate(rx.k, rx.km_no2, rx.km_h,
                                        std::max(conc[rx.substrate], 0.0),
                                        env.h_conc);
                break;
            case ReactionKind::FirstOrder:
                rate = rx.k * conc[rx.substrate];
                break;
            default:
                break;
        }
        for (const auto& [sp, coeff] : rx.stoich) dcdt[sp] += coeff * rate;
    }

    // Langmuir protection; shared pools net out the already-protected load.
    for (const auto& pair : net.pairs) {
        double remaining = env.qmax.empty() ? 0.0 : env.qmax[pair.pool];
        for (const auto& other : net.pairs)
            if (other.pool == pair.pool) remaining -= conc[other.protected_sp];
        double flux = pair.kp * remaining * conc[pair.aqueous]
                      - pair.k_unp * conc[pair.protected_sp];
        dcdt[pair.protected_sp] += flux;
        dcdt[pair.aqueous] -= flux;
    }

    // Mortality routes necromass C by mass fraction into receiving pools.
    for (const auto& law : net.mortality) {
        double b = conc[law.species];
        double died = law.delta * b;  // mol biomass / L / s
        dcdt[law.species] -= died;
        double c_release = died * net.species[law.species].carbon;
        for (const auto& [sp, frac] : law.partition)
            dcdt[sp] += c_release * frac / net.species[sp].carbon;
    }
}

void node_rhs_jvp(const ReactionNetwork& net, const NodeEnv& env,
                  std::span<const double> conc, std::span<const double> v,
                  std::span<double> jv) {
    std::fill(jv.begin(), jv.end(), 0.0);

    struct Factor {
        int species;
        double value;   // factor value
        double deriv;   // d(factor)/d[species]
    };
    std::vector<Factor> factors;

    for (int idx : net.kinetic) {
        const Reaction& rx = net.reactions[idx];
        double drate = 0.0;
        if (rx.kind == ReactionKind::Monod) {
            double base = rx.k * f_s_of(net, rx, env);
            factors.clear();
            if (rx.actor >= 0)
                factors.push_back({rx.actor, conc[rx.actor] / rx.yield, 1.0 / rx.yield});
            for (const auto& t : rx.substrates) {
                double x = conc[t.species];
                double s = x + t.value;
                factors.push_back({t.species, x / s, t.value / (s * s)});
            }
            for (const auto& t : rx.inhibitors) {
                double x = conc[t.species];
                double s = t.value + x;
                factors.push_back({t.species, t.value / s, -t.value / (s * s)});
            }
            for (int sp : rx.availability) {
                double x = conc[sp];
                double s = x + kAvailEps;
                factors.push_back({sp, x / s, kAvailEps / (s * s)});
            }
            for (size_t f = 0; f < factors.size(); ++f) {
                double partial = base * factors[f].deriv;
                for (size_t g = 0; g < factors.size(); ++g)
                    if (g != f) partial *= factors[g].value;
                drate += partial * v[factors[f].species];
            }
        } else if (rx.kind == ReactionKind::ChemoDenit) {
            int sp = rx.substrate;
            double x = std::max(conc[sp], 0.0);
            double s = x + rx.km_no2;
            double hfac = env.h_conc / (env.h_conc + rx.km_h);
            drate = rx.k * hfac * rx.km_no2 / (s * s) * v[sp];
        } else if (rx.kind == ReactionKind::FirstOrder) {
            drate = rx.k * v[rx.substrate];
        }
        for (const auto& [sp, coeff] : rx.stoich) jv[sp] += coeff * drate;
    }

    for (const auto& pair : net.pairs) {
        double remaining = env.qmax.empty() ? 0.0 : env.qmax[pair.pool];
        double dremaining = 0.0;
        for (const auto& other : net.pairs)
            if (other.pool == pair.pool) {
                remaining -= conc[other.protected_sp];
                dremaining -= v[other.protected_sp];
            }
        double dflux = pair.kp * (dremaining * conc[pair.aqueous]
                                  + remaining * v[pair.aqueous])
                       - pair.k_unp * v[pair.protected_sp];
        jv[pair.protected_sp] += dflux;
        jv[pair.aqueous] -= dflux;
    }

    for (const auto& law : net.mortality) {
        double ddied = law.delta * v[law.species];
        jv[law.species] -= ddied;
        double dc_release = ddied * net.species[law.species].carbon;
        for (const auto& [sp, frac] : law.partition)
            jv[sp] += dc_release * frac / net.species[sp].carbon;
    }
}

IntegrateResult integrate_node(const ReactionNetwork& net, const NodeEnv& env,
                               std::span<double> conc, double dt,
                               double rtol, double atol) {
    IntegrateResult res;
    const size_t n = conc.size();
    std::vector<double> k1(n), k2(n), y_euler(n), y_heun(n), stage(n);

    auto clip = [&](std::span<double> y) {
        for (size_t i = 0; i < n; ++i) {
            if (y[i] < 0.0) {
                res.clipped_c += -y[i] * net.species[i].carbon;
                res.clipped_n += -y[i] * net.species[i].nitrogen;
                y[i] = 0.0;
            }
        }
    };

    double t = 0.0;
    double h = dt;
    const double h_min = dt * 1.0e-12;
    while (t < dt) {
        h = std::min(h, dt - t);
        node_rhs(net, env, conc, k1);
        for (size_t i = 0; i < n; ++i) {
            y_euler[i] = conc[i] + h * k1[i];
            stage[i] = std::max(y_euler[i], 0.0);
        }
        node_rhs(net, env, stage, k2);
        double err = 0.0;
        for (size_t i = 0; i < n; ++i) {
            y_heun[i] = conc[i] + 0.5 * h * (k1[i] + k2[i]);
            double scale = atol + rtol * std::max(std::abs(conc[i]), std::abs(y_heun[i]));
            err = std::max(err, std::abs(y_heun[i] - y_euler[i]) / scale);
        }
        ++res.steps;
        if (err <= 1.0 || h <= h_min) {
            if (err > 1.0 && h <= h_min) {
                res.ok = false;
                return res;
            }
            std::copy(y_heun.begin(), y_heun.end(), conc.begin());
            clip(conc);
            t += h;
        }
        double grow = err > 0.0 ? 0.9 / std::sqrt(err) : 4.0;
        h *= std::clamp(grow, 0.2, 4.0);
        if (h < h_min) h = h_min;
    }
    return res;
}

}  // namespace soilcn
