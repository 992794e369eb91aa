#ifndef SOILCN_REPORT_HPP
#define SOILCN_REPORT_HPP

#include <string>
#include <vector>

#include "soilcn/network.hpp"
#include "soilcn/scenario.hpp"
#include "soilcn/targets.hpp"

namespace soilcn {

// Recomputes targets from a recorded run: rates from ledger increments over
// the window, stocks from snapshot states inside the window (top
// `integration_depth` meters). Throws DomainError when the window lies
// outside the recorded span.
TargetOutputs extract_targets(const RunResult& run, const ReactionNetwork& net,
                              const Column& col, int window_start_day,
                              int window_end_day, double integration_depth = 0.30);

PoolPartition pool_partition(const RunResult& run, const ReactionNetwork& net,
                             const Column& col, double integration_depth = 0.30);

// SOM C split in absolute terms [kg-C/m2] over the integration depth.
// Polymers are aqueous organic species without a protection partner;
// monomers are the protected pairs' aqueous and protected sides.
struct CPartition {
    double polymers = 0.0;
    double aqueous_monomers = 0.0;
    double protected_monomers = 0.0;
};

CPartition c_partition(const RunResult& run, const ReactionNetwork& net,
                       const Column& col, double integration_depth = 0.30);

bool is_organic_species(const Species& s);
bool has_protection_pair(const ReactionNetwork& net, int species);

// CSV writers for the simulate outputs. Every emitted CSV round-trips
// through the readers in csv.hpp.
void write_snapshots_csv(const std::string& path, const RunResult& run,
                         const ReactionNetwork& net, const Column& col);
void write_ledger_csv(const std::string& path, const RunResult& run,
                      const ReactionNetwork& net);
void write_targets_csv(const std::string& path, const TargetOutputs& t);
void write_profiles_csv(const std::string& path, const RunResult& run,
                        const ReactionNetwork& net, const Column& col,
                        const std::vector<std::string>& species_ids);
void write_partition_csv(const std::string& path, const PoolPartition& p);

}  // namespace soilcn

#endif
