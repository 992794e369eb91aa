#ifndef SOILCN_MORRIS_HPP
#define SOILCN_MORRIS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "soilcn/network_io.hpp"

namespace soilcn {

// Normalized K-dimensional parameter hypercube with l grid levels per axis.
// Each axis maps [0,1] onto [lower, upper] = reference * [1-span, 1+span].
struct ParameterSpace {
    struct Spec {
        std::string path;
        double reference = 0.0;
        double lower = 0.0;
        double upper = 0.0;
        std::string group;
    };
    std::vector<Spec> specs;
    int levels = 11;

    size_t dim() const { return specs.size(); }
    double delta() const { return 1.0 / (levels - 1); }
    // Physical value of coordinate x in [0,1] on axis k.
    double denormalize(int k, double x) const;
};

// +-50% uniform intervals around the catalog references. Entries whose
// reference is zero cannot span an interval and are skipped.
ParameterSpace make_parameter_space(const ParameterCatalog& catalog, int levels = 11,
                                    double span = 0.5);

// A one-at-a-time path of K+1 points: consecutive points differ in exactly
// one coordinate by exactly delta, every parameter moves exactly once.
struct Trajectory {
    std::vector<std::vector<double>> points;  // K+1 x K, on-grid
    std::vector<int> moved;                   // parameter index per step
    std::vector<int> signs;                   // +1 / -1 per step
};

std::vector<Trajectory> sample_trajectories(const ParameterSpace& space, int n,
                                            uint64_t seed);

// Structural legality check used by tests and by the sampler's postcondition.
bool trajectory_is_legal(const ParameterSpace& space, const Trajectory& t,
                         std::string* why = nullptr);

// Exhaustive enumeration of every legal trajectory (all origins, orders and
// admissible sign choices). Brute-force reference for small K and l.
std::vector<Trajectory> enumerate_trajectories(const ParameterSpace& space);

// One model evaluation at a trajectory point.
struct RunRecord {
    int trajectory = -1;
    int step = -1;  // 0..K, index of the point within the trajectory
    bool ok = false;
    std::vector<double> targets;  // one value per target
    std::string error;
};

struct EnsembleResult {
    std::vector<std::string> target_names;
    std::vector<RunRecord> records;  // ordered by (trajectory, step)
    int n_trajectories = 0;
    int executed = 0;  // evaluated this call (not restored from the ledger)

    const RunRecord& record(int traj, int step) const;
};

// Elementary effects for one target over one ensemble:
//   EE = (y(p + delta*e_k) - y(p)) / (signed delta) * 1/sigma_y
// sigma_y is the standard deviation of the target over all ensemble points.
struct EffectSet {
    std::string target;
    double sigma = 0.0;
    bool sigma_defined = true;  // false when sigma == 0
    // per parameter: EE samples (one per trajectory where both runs succeeded)
    std::vector<std::vector<double>> effects;
    // raw unnormalized finite differences, same shape
    std::vector<std::vector<double>> raw_differences;
};

EffectSet elementary_effects(const ParameterSpace& space,
                             const std::vector<Trajectory>& trajectories,
                             const EnsembleResult& runs, int target_index);

// mu = median(|EE|); even counts average the two central order statistics.
// Empty input yields nullopt.
std::optional<double> mu_index(const std::vector<double>& effects);

struct ReliabilityFlag {
    bool unreliable = false;
    int below = 0;
    int total = 0;
    std::string reason;
};

// Flags a target when |y| < floor in strictly more than `fraction` of all
// evaluation points.
ReliabilityFlag reliability_flag(const EnsembleResult& runs, int target_index,
                                 double floor = 1.0e-10, double fraction = 0.5);

struct SensitivityCell {
    std::string parameter;
    std::string group;
    std::string target;
    std::optional<double> mu;
    int n_effective = 0;
    bool sigma_undefined = false;
    bool target_unreliable = false;
};

struct SensitivityResult {
    std::vector<SensitivityCell> cells;  // parameter-major, target-minor
    std::vector<EffectSet> effects;      // per target
    std::vector<ReliabilityFlag> flags;  // per target
};

SensitivityResult sensitivity_indices(const ParameterSpace& space,
                                      const std::vector<Trajectory>& trajectories,
                                      const EnsembleResult& runs,
                                      double floor = 1.0e-10, double fraction = 0.5);

void write_sensitivity_csv(const std::string& path, const SensitivityResult& r);
void write_effects_csv(const std::string& path, const ParameterSpace& space,
                       const SensitivityResult& r);

}  // namespace soilcn

#endif
