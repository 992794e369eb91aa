#include "soilcn/morris.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "soilcn/common.hpp"
#include "soilcn/csv.hpp"

namespace soilcn {

double ParameterSpace::denormalize(int k, double x) const {
    const Spec& s = specs[k];
    return s.lower + x * (s.upper - s.lower);
}

ParameterSpace make_parameter_space(const ParameterCatalog& catalog, int levels,
                                    double span) {
    if (levels < 2) throw ConfigError("parameter space needs at least 2 levels");
    if (span <= 0 || span >= 1) throw ConfigError("span must lie in (0,1)");
    ParameterSpace space;
    space.levels = levels;
    for (const auto& e : catalog.entries) {
        if (e.reference == 0.0) continue;  // zero reference spans no interval
        ParameterSpace::Spec s;
        s.path = e.path;
        s.reference = e.reference;
        s.group = e.group;
        double lo = e.reference * (1.0 - span);
        double hi = e.reference * (1.0 + span);
        s.lower = std::min(lo, hi);
        s.upper = std::max(lo, hi);
        space.specs.push_back(std::move(s));
    }
    return space;
}

std::vector<Trajectory> sample_trajectories(const ParameterSpace& space, int n,
                                            uint64_t seed) {
    if (n < 1) throw ConfigError("need at least one trajectory");
    const int k = static_cast<int>(space.dim());
    const int l = space.levels;
    const double delta = space.delta();
    std::mt19937_64 rng(seed ^ 0x517cc1b727220a95ull);

    std::vector<Trajectory> out;
    out.reserve(n);
    for (int t = 0; t < n; ++t) {
        Trajectory traj;
        std::vector<int> level(k);
        std::vector<double> point(k);
        for (int i = 0; i < k; ++i) {
            level[i] = static_cast<int>(rng() % l);
            point[i] = level[i] * delta;
        }
        std::vector<int> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);

        traj.points.push_back(point);
        for (int s = 0; s < k; ++s) {
            int p = order[s];
            int sign;
            if (level[p] == 0) sign = +1;
            else if (level[p] == l - 1) sign = -1;
            else sign = (rng() & 1) ? +1 : -1;
            point[p] = (level[p] + sign) * delta;
            traj.points.push_back(point);
            traj.moved.push_back(p);
            traj.signs.push_back(sign);
        }
        std::string why;
        if (!trajectory_is_legal(space, traj, &why))
            throw ConfigError("sampled an illegal trajectory: " + why);
        out.push_back(std::move(traj));
    }
    return out;
}

bool trajectory_is_legal(const ParameterSpace& space, const Trajectory& t,
                         std::string* why) {
    const int k = static_cast<int>(space.dim());
    const double delta = space.delta();
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (static_cast<int>(t.points.size()) != k + 1) return fail("needs K+1 points");
    if (static_cast<int>(t.moved.size()) != k || static_cast<int>(t.signs.size()) != k)
        return fail("needs K moves");
    std::vector<int> seen(k, 0);
    for (int s = 0; s < k; ++s) {
        int changed = -1;
        for (int i = 0; i < k; ++i) {
            double d = t.points[s + 1][i] - t.points[s][i];
            if (std::abs(d) > 1.0e-12) {
                if (changed >= 0) return fail("two coordinates changed in one step");
                changed = i;
                if (std::abs(std::abs(d) - delta) > 1.0e-12)
                    return fail("step is not exactly delta");
                if ((d > 0 ? +1 : -1) != t.signs[s]) return fail("sign mismatch");
            }
        }
        if (changed != t.moved[s]) return fail("moved index mismatch");
        ++seen[changed];
    }
    for (int i = 0; i < k; ++i)
        if (seen[i] != 1) return fail("a parameter did not move exactly once");
    for (const auto& p : t.points)
        for (double x : p) {
            if (x < -1.0e-12 || x > 1.0 + 1.0e-12) return fail("point off the cube");
            double lv = x / delta;
            if (std::abs(lv - std::round(lv)) > 1.0e-9) return fail("point off grid");
        }
    return true;
}

std::vector<Trajectory> enumerate_trajectories(const ParameterSpace& space) {
    const int k = static_cast<int>(space.dim());
    const int l = space.levels;
    const double delta = space.delta();
    std::vector<Trajectory> out;

    std::vector<int> origin(k, 0);
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);

    auto emit_signs = [&](const std::vector<int>& levels,
                          const std::vector<int>& ord) {
        // Each step has 1 or 2 admissible signs; enumerate all combinations.
        std::vector<std::vector<int>> choices(k);
        for (int s = 0; s < k; ++s) {
            int lv = levels[ord[s]];
            if (lv == 0) choices[s] = {+1};
            else if (lv == l - 1) choices[s] = {-1};
            else choices[s] = {+1, -1};
        }
        std::vector<int> pick(k, 0);
        while (true) {
            Trajectory traj;
            std::vector<double> point(k);
            for (int i = 0; i < k; ++i) point[i] = levels[i] * delta;
            traj.points.push_back(point);
            for (int s = 0; s < k; ++s) {
                int p = ord[s];
                int sign = choices[s][pick[s]];
                point[p] += sign * delta;
                traj.points.push_back(point);
                traj.moved.push_back(p);
                traj.signs.push_back(sign);
            }
            out.push_back(std::move(traj));
            int s = k - 1;
            while (s >= 0 && ++pick[s] >= static_cast<int>(choices[s].size()))
                pick[s--] = 0;
            if (s < 0) break;
        }
    };

    // Odometer over origins x permutations of the move order.
    while (true) {
        std::sort(order.begin(), order.end());
        do {
            emit_signs(origin, order);
        } while (std::next_permutation(order.begin(), order.end()));
        int i = k - 1;
        while (i >= 0 && ++origin[i] >= l) origin[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

const RunRecord& EnsembleResult::record(int traj, int step) const {
    for (const auto& r : records)
        if (r.trajectory == traj && r.step == step) return r;
    throw ConfigError("missing run record");
}

EffectSet elementary_effects(const ParameterSpace& space,
                             const std::vector<Trajectory>& trajectories,
                             const EnsembleResult& runs, int target_index) {
    EffectSet set;
    set.target = runs.target_names[target_index];
    const int k = static_cast<int>(space.dim());
    set.effects.resize(k);
    set.raw_differences.resize(k);

    // sigma over every successful evaluation of the whole ensemble
    double sum = 0, sum2 = 0;
    long count = 0;
    for (const auto& r : runs.records) {
        if (!r.ok) continue;
        double y = r.targets[target_index];
        sum += y;
        sum2 += y * y;
        ++count;
    }
    if (count == 0) {
        set.sigma_defined = false;
        return set;
    }
    double mean = sum / count;
    double var = std::max(sum2 / count - mean * mean, 0.0);
    set.sigma = std::sqrt(var);
    set.sigma_defined = set.sigma > 0.0;

    const double delta = space.delta();
    // Record layout is (trajectory, step)-keyed; index directly.
    auto rec = [&](int t, int s) -> const RunRecord& {
        return runs.records[size_t(t) * (k + 1) + s];
    };
    for (size_t t = 0; t < trajectories.size(); ++t) {
        const Trajectory& traj = trajectories[t];
        for (int s = 0; s < k; ++s) {
            const RunRecord& a = rec(static_cast<int>(t), s);
            const RunRecord& b = rec(static_cast<int>(t), s + 1);
            if (!a.ok || !b.ok) continue;  // failed run voids this effect only
            double slope = (b.targets[target_index] - a.targets[target_index]) /
                           (delta * traj.signs[s]);
            set.raw_differences[traj.moved[s]].push_back(slope);
            if (set.sigma_defined)
                set.effects[traj.moved[s]].push_back(slope / set.sigma);
        }
    }
    return set;
}

std::optional<double> mu_index(const std::vector<double>& effects) {
    if (effects.empty()) return std::nullopt;
    std::vector<double> mags;
    mags.reserve(effects.size());
    for (double e : effects) mags.push_back(std::abs(e));
    std::sort(mags.begin(), mags.end());
    size_t n = mags.size();
    if (n % 2 == 1) return mags[n / 2];
    return 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
}

ReliabilityFlag reliability_flag(const EnsembleResult& runs, int target_index,
                                 double floor, double fraction) {
    if (floor < 0) throw DomainError("floor must be >= 0");
    if (fraction <= 0 || fraction > 1) throw DomainError("fraction must be in (0,1]");
    ReliabilityFlag flag;
    for (const auto& r : runs.records) {
        if (!r.ok) continue;
        ++flag.total;
        if (std::abs(r.targets[target_index]) < floor) ++flag.below;
    }
    flag.unreliable =
        flag.total > 0 && double(flag.below) > fraction * double(flag.total);
    if (flag.unreliable) {
        std::ostringstream ss;
        ss << "|y| < " << format_double(floor) << " in " << flag.below << "/"
           << flag.total << " points";
        flag.reason = ss.str();
    }
    return flag;
}

SensitivityResult sensitivity_indices(const ParameterSpace& space,
                                      const std::vector<Trajectory>& trajectories,
                                      const EnsembleResult& runs,
                                      double floor, double fraction) {
    SensitivityResult out;
    const int n_targets = static_cast<int>(runs.target_names.size());
    for (int y = 0; y < n_targets; ++y) {
        out.effects.push_back(elementary_effects(space, trajectories, runs, y));
        out.flags.push_back(reliability_flag(runs, y, floor, fraction));
    }
    for (size_t k = 0; k < space.dim(); ++k) {
        for (int y = 0; y < n_targets; ++y) {
            SensitivityCell cell;
            cell.parameter = space.specs[k].path;
            cell.group = space.specs[k].group;
            cell.target = runs.target_names[y];
            cell.sigma_undefined = !out.effects[y].sigma_defined;
            cell.target_unreliable = out.flags[y].unreliable;
            const auto& effs = out.effects[y].effects[k];
            cell.n_effective = static_cast<int>(effs.size());
            if (!cell.sigma_undefined) cell.mu = mu_index(effs);
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

void write_sensitivity_csv(const std::string& path, const SensitivityResult& r) {
    CsvTable t;
    t.header = {"parameter", "group", "target", "mu", "n_effective", "flags"};
    for (const auto& c : r.cells) {
        std::string flags;
        if (c.sigma_undefined) flags = "sigma_undefined";
        if (c.target_unreliable) flags += flags.empty() ? "unreliable" : "+unreliable";
        if (flags.empty()) flags = "ok";
        t.add_row({c.parameter, c.group, c.target,
                   c.mu ? format_double(*c.mu) : "", std::to_string(c.n_effective),
                   flags});
    }
    write_csv_file(path, t);
}

void write_effects_csv(const std::string& path, const ParameterSpace& space,
                       const SensitivityResult& r) {
    CsvTable t;
    t.header = {"parameter", "target", "sample", "ee", "raw_slope"};
    for (const auto& set : r.effects) {
        for (size_t k = 0; k < space.dim(); ++k) {
            const auto& raw = set.raw_differences[k];
            for (size_t i = 0; i < raw.size(); ++i) {
                std::string ee = set.sigma_defined
                                     ? format_double(set.effects[k][i])
                                     : "";
                t.add_row({space.specs[k].path, set.target,
                           std::to_string(i), ee, format_double(raw[i])});
            }
        }
    }
    write_csv_file(path, t);
}

}  // namespace soilcn
