#ifndef SOILCN_COMMON_HPP
#define SOILCN_COMMON_HPP

#include <stdexcept>
#include <string>

namespace soilcn {

// Thrown for invalid run-time inputs (negative concentrations, bad volumes, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Thrown for invalid configuration (unresolved species, bad files, unknown paths, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Molar masses used at the reporting boundary [kg/mol].
inline constexpr double kKgPerMolC = 0.012;
inline constexpr double kKgPerMolN = 0.014;

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr int kDaysPerYear = 365;

// Fixed-precision float formatting shared by every CSV writer so that
// fixed-seed outputs are byte-stable across runs and thread counts.
std::string format_double(double v);

}  // namespace soilcn

#endif
