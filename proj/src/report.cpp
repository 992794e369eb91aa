#include "soilcn/report.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "soilcn/common.hpp"
#include "soilcn/csv.hpp"

namespace soilcn {

bool is_organic_species(const Species& s) {
    return s.phase != Phase::Gaseous && s.carbon > 0 && !s.mineral;
}

bool has_protection_pair(const ReactionNetwork& net, int species) {
    for (const auto& p : net.pairs)
        if (p.aqueous == species || p.protected_sp == species) return true;
    return false;
}

namespace {

// Fraction of node i lying above `depth`.
double overlap_fraction(const Grid& g, int i, double depth) {
    double ov = std::max(0.0, std::min(g.z_bot[i], depth) - g.z_top[i]);
    return ov / g.dz[i];
}

struct StockSums {
    double c_organic = 0, n_organic = 0, n_inorganic = 0;
};

StockSums stock_sums(std::span<const double> amount, const ReactionNetwork& net,
                     const Column& col, double depth) {
    StockSums s;
    const int n = col.n_nodes();
    for (size_t sp = 0; sp < net.n_species(); ++sp) {
        const Species& spec = net.species[sp];
        bool organic = is_organic_species(spec);
        bool inorg_n = (spec.phase == Phase::Aqueous || spec.phase == Phase::Protected) &&
                       spec.nitrogen > 0 && spec.carbon == 0 && !spec.inert;
        if (!organic && !inorg_n) continue;
        for (int i = 0; i < n; ++i) {
            double a = amount[sp * n + i] * overlap_fraction(col.grid, i, depth);
            if (organic) {
                s.c_organic += a * spec.carbon * kKgPerMolC;
                s.n_organic += a * spec.nitrogen * kKgPerMolN;
            }
            if (inorg_n) s.n_inorganic += a * spec.nitrogen * kKgPerMolN;
        }
    }
    return s;
}

const Ledgers* ledger_at(const RunResult& run, int day) {
    for (const auto& row : run.ledger_series)
        if (row.day == day) return &row.ledgers;
    return nullptr;
}

}  // namespace

TargetOutputs extract_targets(const RunResult& run, const ReactionNetwork& net,
                              const Column& col, int window_start_day,
                              int window_end_day, double integration_depth) {
    if (window_start_day < 0 || window_end_day > run.horizon_days ||
        window_start_day >= window_end_day)
        throw DomainError("analysis window outside the recorded span");

    TargetOutputs t;
    t.window_start_day = window_start_day;
    t.window_end_day = window_end_day;

    // Rates from ledger increments; the window bounds must land on recorded
    // ledger rows (snapshot cadence).
    const Ledgers* l0 = ledger_at(run, window_start_day);
    const Ledgers* l1 = ledger_at(run, window_end_day);
    if (!l0 || !l1)
        throw DomainError("window bounds do not align with recorded ledger rows");
    double days = window_end_day - window_start_day;

    auto gas_rate = [&](const char* id, double kg_per_mol_atom, double atoms) {
        int sp = net.species_index(id);
        if (sp < 0) return 0.0;
        for (size_t g = 0; g < net.gases.size(); ++g)
            if (net.gases[g].gas == sp)
                return (l1->gas_exchange[g] - l0->gas_exchange[g]) / days * atoms *
                       kg_per_mol_atom;
        return 0.0;
    };
    t.co2_rate = gas_rate("CO2_g", kKgPerMolC, 1.0);
    t.nh3_rate = gas_rate("NH3_g", kKgPerMolN, 1.0);
    t.n2o_rate = gas_rate("N2O_g", kKgPerMolN, 2.0);
    t.no_rate = gas_rate("NO_g", kKgPerMolN, 1.0);

    // Stocks averaged over the snapshots inside the window.
    int used = 0;
    StockSums acc;
    for (const auto& snap : run.snapshots) {
        if (snap.day <= window_start_day || snap.day > window_end_day) continue;
        StockSums s = stock_sums(snap.amount, net, col, integration_depth);
        acc.c_organic += s.c_organic;
        acc.n_organic += s.n_organic;
        acc.n_inorganic += s.n_inorganic;
        ++used;
    }
    if (used == 0) throw DomainError("no snapshots inside the analysis window");
    t.c_stock = acc.c_organic / used;
    t.n_stock = acc.n_organic / used;
    t.n_inorg_stock = acc.n_inorganic / used;
    return t;
}

CPartition c_partition(const RunResult& run, const ReactionNetwork& net,
                       const Column& col, double integration_depth) {
    CPartition p;
    const int n = col.n_nodes();
    for (size_t sp = 0; sp < net.n_species(); ++sp) {
        const Species& spec = net.species[sp];
        if (!is_organic_species(spec) || spec.phase == Phase::Biomass) continue;
        double kg_c = 0;
        for (int i = 0; i < n; ++i)
            kg_c += run.window_mean_amount[sp * n + i] *
                    overlap_fraction(col.grid, i, integration_depth) * spec.carbon *
                    kKgPerMolC;
        if (spec.phase == Phase::Protected) p.protected_monomers += kg_c;
        else if (has_protection_pair(net, static_cast<int>(sp)))
            p.aqueous_monomers += kg_c;
        else p.polymers += kg_c;
    }
    return p;
}

PoolPartition pool_partition(const RunResult& run, const ReactionNetwork& net,
                             const Column& col, double integration_depth) {
    PoolPartition out;
    CPartition part = c_partition(run, net, col, integration_depth);
    double total = part.polymers + part.aqueous_monomers + part.protected_monomers;
    if (total > 0) {
        out.frac_polymers = part.polymers / total;
        out.frac_aqueous_monomers = part.aqueous_monomers / total;
        out.frac_protected_monomers = part.protected_monomers / total;
    }

    const int n = col.n_nodes();
    // Soil mass in the reported zone [kg/m2].
    double soil_kg = 0;
    for (int i = 0; i < n; ++i)
        soil_kg += col.layer_of(i).bulk_density * col.grid.dz[i] * 1000.0 *
                   overlap_fraction(col.grid, i, integration_depth);

    for (size_t sp = 0; sp < net.n_species(); ++sp) {
        const Species& spec = net.species[sp];
        if (spec.phase != Phase::Aqueous || !is_organic_species(spec) ||
            !has_protection_pair(net, static_cast<int>(sp)))
            continue;
        double g_c = 0;
        for (int i = 0; i < n; ++i)
            g_c += run.window_mean_amount[sp * n + i] *
                   overlap_fraction(col.grid, i, integration_depth) * spec.carbon *
                   12.0;
        out.aqueous_density.emplace_back(spec.id, soil_kg > 0 ? g_c / soil_kg : 0.0);
    }

    // Polymer split over Lig/HCl/Cls by reporting convention.
    double poly_total = 0;
    std::vector<std::pair<std::string, double>> poly;
    for (const char* id : {"Lig", "HCl", "Cls"}) {
        int sp = net.species_index(id);
        if (sp < 0) continue;
        double kg_c = 0;
        for (int i = 0; i < n; ++i)
            kg_c += run.window_mean_amount[size_t(sp) * n + i] *
                    overlap_fraction(col.grid, i, integration_depth) *
                    net.species[sp].carbon * kKgPerMolC;
        poly.emplace_back(id, kg_c);
        poly_total += kg_c;
    }
    for (auto& [id, kg] : poly)
        out.polymer_wc.emplace_back(id, poly_total > 0 ? 100.0 * kg / poly_total : 0.0);
    return out;
}

void write_snapshots_csv(const std::string& path, const RunResult& run,
                         const ReactionNetwork& net, const Column& col) {
    CsvTable t;
    t.header = {"day", "node", "depth_m", "s_l", "temp_k"};
    for (const auto& sp : net.species) t.header.push_back(sp.id);
    const int n = col.n_nodes();
    for (const auto& snap : run.snapshots) {
        for (int i = 0; i < n; ++i) {
            std::vector<std::string> row;
            row.push_back(std::to_string(snap.day));
            row.push_back(std::to_string(i));
            row.push_back(format_double(col.grid.z_mid[i]));
            double s_l = snap.water[i] / col.water_capacity[i];
            row.push_back(format_double(s_l));
            row.push_back(format_double(snap.temperature[i]));
            for (size_t sp = 0; sp < net.n_species(); ++sp) {
                double basis;
                switch (net.species[sp].phase) {
                    case Phase::Gaseous:
                        basis = std::max(col.water_capacity[i] - snap.water[i], 1.0e-30);
                        break;
                    case Phase::Protected:
                        basis = col.grid.dz[i] * 1000.0;
                        break;
                    default:
                        basis = snap.water[i];
                }
                row.push_back(format_double(snap.amount[sp * n + i] / basis));
            }
            t.add_row(std::move(row));
        }
    }
    write_csv_file(path, t);
}

void write_ledger_csv(const std::string& path, const RunResult& run,
                      const ReactionNetwork& net) {
    CsvTable t;
    t.header = {"day",         "total_water", "infiltration_m", "runoff_m",
                "et_m",        "drainage_m",  "leach_c",        "leach_n",
                "input_c",     "input_n",     "fix_n",          "uptake_n",
                "clip_c",      "clip_n"};
    for (const auto& g : net.gases)
        t.header.push_back("ex_" + net.species[g.gas].id);
    for (const auto& row : run.ledger_series) {
        const Ledgers& l = row.ledgers;
        std::vector<std::string> cells = {
            std::to_string(row.day),      format_double(row.total_water),
            format_double(l.infiltration_m), format_double(l.runoff_m),
            format_double(l.et_m),        format_double(l.drainage_m),
            format_double(l.leach_c),     format_double(l.leach_n),
            format_double(l.input_c),     format_double(l.input_n),
            format_double(l.fix_n),       format_double(l.uptake_n),
            format_double(l.clip_c),      format_double(l.clip_n)};
        for (double g : l.gas_exchange) cells.push_back(format_double(g));
        t.add_row(std::move(cells));
    }
    write_csv_file(path, t);
}

void write_targets_csv(const std::string& path, const TargetOutputs& t) {
    CsvTable table;
    table.header = {"target", "value", "window_start_day", "window_end_day"};
    for (int i = 0; i < TargetOutputs::kCount; ++i)
        table.add_row({TargetOutputs::names()[i], format_double(t.value(i)),
                       std::to_string(t.window_start_day),
                       std::to_string(t.window_end_day)});
    write_csv_file(path, table);
}

void write_profiles_csv(const std::string& path, const RunResult& run,
                        const ReactionNetwork& net, const Column& col,
                        const std::vector<std::string>& species_ids) {
    CsvTable t;
    t.header = {"node", "depth_m", "mean_s_l"};
    std::vector<int> picks;
    for (const auto& id : species_ids) {
        int sp = net.species_index(id);
        if (sp < 0) throw ConfigError("profile for unknown species " + id);
        picks.push_back(sp);
        t.header.push_back(id);
    }
    const int n = col.n_nodes();
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> row = {std::to_string(i),
                                        format_double(col.grid.z_mid[i]),
                                        format_double(run.window_mean_sl[i])};
        for (int sp : picks) {
            double w = run.window_mean_water[i];
            double basis;
            switch (net.species[sp].phase) {
                case Phase::Gaseous:
                    basis = std::max(col.water_capacity[i] - w, 1.0e-30);
                    break;
                case Phase::Protected:
                    basis = col.grid.dz[i] * 1000.0;
                    break;
                default:
                    basis = std::max(w, 1.0e-30);
            }
            row.push_back(format_double(run.window_mean_amount[size_t(sp) * n + i] / basis));
        }
        t.add_row(std::move(row));
    }
    write_csv_file(path, t);
}

void write_partition_csv(const std::string& path, const PoolPartition& p) {
    CsvTable t;
    t.header = {"kind", "name", "value"};
    t.add_row({"fraction", "polymers", format_double(p.frac_polymers)});
    t.add_row({"fraction", "protected_monomers", format_double(p.frac_protected_monomers)});
    t.add_row({"fraction", "aqueous_monomers", format_double(p.frac_aqueous_monomers)});
    for (const auto& [id, v] : p.aqueous_density)
        t.add_row({"aqueous_gc_per_kg", id, format_double(v)});
    for (const auto& [id, v] : p.polymer_wc)
        t.add_row({"polymer_wc_pct", id, format_double(v)});
    write_csv_file(path, t);
}

}  // namespace soilcn
