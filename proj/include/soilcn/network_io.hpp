#ifndef SOILCN_NETWORK_IO_HPP
#define SOILCN_NETWORK_IO_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "soilcn/network.hpp"

namespace soilcn {

enum class Severity { Warning, Error };

struct Diagnostic {
    int line = 0;
    int col = 0;
    Severity severity = Severity::Error;
    std::string message;
};

std::string format_diagnostic(const std::string& file, const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& ds);

// Raw syntactic record: one key/value entry with source position.
struct Entry {
    int line = 0;
    int col = 0;
    std::string key;
    std::string rest;
};

struct SectionDecl {
    int line = 0;
    std::string section;  // "species", "params", "stress", "reaction", "mortality"
    std::string arg;      // reaction/mortality/stress identifier
    std::vector<Entry> entries;
};

// Parse tree of a network file. Parsing is total: syntax problems become
// diagnostics, never aborts.
struct NetworkDocument {
    int format_version = 1;
    std::string name;
    std::vector<SectionDecl> species_decls;
    std::vector<SectionDecl> param_decls;
    std::vector<SectionDecl> stress_decls;
    std::vector<SectionDecl> reaction_decls;
    std::vector<SectionDecl> mortality_decls;
    std::vector<Diagnostic> diagnostics;
};

NetworkDocument parse_network(const std::string& text);

// Semantic validation. Reports every violation it can find in one pass:
// dangling references, element imbalance, nonpositive constants, partition
// sums, duplicate identifiers. Returns the immutable network on success.
std::optional<ReactionNetwork> validate(const NetworkDocument& doc,
                                        std::vector<Diagnostic>& diagnostics);

// Convenience: parse + validate a file on disk, throwing ConfigError with
// the formatted diagnostics on failure.
ReactionNetwork load_network(const std::string& path);

// Canonical text form; reparsing yields a semantically equal network.
std::string serialize(const ReactionNetwork& net);

// ---- Parameter catalog -------------------------------------------------

struct CatalogEntry {
    std::string path;   // e.g. "reaction.Resp-Msa-AER.k", "param.km_o2"
    double reference = 0.0;
    std::string unit;
    std::string group;  // screening group label for reporting
};

struct ParameterCatalog {
    std::vector<CatalogEntry> entries;
    size_t size() const { return entries.size(); }
    int index_of(const std::string& path) const;
};

// Enumerates every screenable kinetic constant in document order.
ParameterCatalog catalog_parameters(const ReactionNetwork& net);

// Returns a copy of `net` with the given catalog paths set to new values.
// Unknown paths and sign violations throw ConfigError; the input network is
// never modified.
ReactionNetwork apply_parameters(const ReactionNetwork& net,
                                 const std::vector<std::pair<std::string, double>>& assignment);

}  // namespace soilcn

#endif
