#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "soilcn/common.hpp"
#include "soilcn/csv.hpp"
#include "soilcn/network_io.hpp"

namespace soilcn {

std::string format_diagnostic(const std::string& file, const Diagnostic& d) {
    std::ostringstream ss;
    ss << file << ":" << d.line << ":" << d.col << ": "
       << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.message;
    return ss.str();
}

bool has_errors(const std::vector<Diagnostic>& ds) {
    return std::any_of(ds.begin(), ds.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace {

// Whitespace tokenizer honoring double-quoted strings.
std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    bool in_quote = false, have = false;
    for (char c : s) {
        if (in_quote) {
            if (c == '"') in_quote = false;
            else cur += c;
            have = true;
        } else if (c == '"') {
            in_quote = true;
            have = true;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            if (have) out.push_back(cur);
            cur.clear();
            have = false;
        } else {
            cur += c;
            have = true;
        }
    }
    if (have) out.push_back(cur);
    return out;
}

std::string strip_comment(const std::string& line) {
    bool in_quote = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quote = !in_quote;
        else if (line[i] == '#' && !in_quote) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& tok, double& out) {
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end && *end == '\0' && end != tok.c_str();
}

// Unit factors to canonical units (mol/L, s, K, m2).
bool unit_factor(const std::string& unit, double& factor) {
    static const std::map<std::string, double> table = {
        {"/s", 1.0},          {"1/s", 1.0},
        {"/d", 1.0 / 86400.0}, {"/day", 1.0 / 86400.0},
        {"/yr", 1.0 / (86400.0 * 365.0)},
        {"mol/L", 1.0},       {"mmol/L", 1.0e-3},
        {"umol/L", 1.0e-6},   {"mol/m3", 1.0e-3},
        {"L/mol/s", 1.0},
        {"mol/L/s", 1.0},     {"mol/L/d", 1.0 / 86400.0},
        {"mol/m2/s", 1.0},    {"mol/m2/d", 1.0 / 86400.0},
        {"-", 1.0},
    };
    auto it = table.find(unit);
    if (it == table.end()) return false;
    factor = it->second;
    return true;
}

}  // namespace

NetworkDocument parse_network(const std::string& text) {
    NetworkDocument doc;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    SectionDecl* current = nullptr;

    auto open_section = [&](const std::string& header, int line) {
        auto tokens = tokenize(header);
        SectionDecl decl;
        decl.line = line;
        decl.section = tokens.empty() ? "" : tokens[0];
        if (tokens.size() > 1) decl.arg = tokens[1];
        if (tokens.size() > 2)
            doc.diagnostics.push_back({line, 1, Severity::Warning,
                                       "extra tokens in section header ignored"});
        if (decl.section == "species") {
            doc.species_decls.push_back(decl);
            current = &doc.species_decls.back();
        } else if (decl.section == "params") {
            doc.param_decls.push_back(decl);
            current = &doc.param_decls.back();
        } else if (decl.section == "stress") {
            doc.stress_decls.push_back(decl);
            current = &doc.stress_decls.back();
        } else if (decl.section == "reaction") {
            doc.reaction_decls.push_back(decl);
            current = &doc.reaction_decls.back();
        } else if (decl.section == "mortality") {
            doc.mortality_decls.push_back(decl);
            current = &doc.mortality_decls.back();
        } else if (decl.section == "network") {
            current = nullptr;  // handled via the network pseudo-entries below
            doc.species_decls.push_back(decl);  // placeholder so entries attach
            doc.species_decls.back().section = "network";
            current = &doc.species_decls.back();
        } else {
            doc.diagnostics.push_back({line, 1, Severity::Warning,
                                       "unknown section '" + decl.section + "' ignored"});
            current = nullptr;
        }
    };

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                doc.diagnostics.push_back({lineno, 1, Severity::Error,
                                           "unterminated section header"});
                current = nullptr;
                continue;
            }
            open_section(trim(line.substr(1, line.size() - 2)), lineno);
            continue;
        }
        size_t sp = line.find_first_of(" \t");
        Entry e;
        e.line = lineno;
        e.col = 1;
        e.key = sp == std::string::npos ? line : line.substr(0, sp);
        e.rest = sp == std::string::npos ? "" : trim(line.substr(sp + 1));
        if (!current) {
            doc.diagnostics.push_back({lineno, 1, Severity::Error,
                                       "entry outside any section"});
            continue;
        }
        current->entries.push_back(std::move(e));
    }

    // Pull the [network] pseudo-section out of species_decls.
    for (auto it = doc.species_decls.begin(); it != doc.species_decls.end();) {
        if (it->section == "network") {
            for (const auto& e : it->entries) {
                if (e.key == "format") {
                    double v;
                    if (parse_number(e.rest, v)) doc.format_version = static_cast<int>(v);
                    else
                        doc.diagnostics.push_back({e.line, e.col, Severity::Error,
                                                   "bad format version"});
                } else if (e.key == "name") {
                    auto t = tokenize(e.rest);
                    if (!t.empty()) doc.name = t[0];
                } else {
                    doc.diagnostics.push_back({e.line, e.col, Severity::Warning,
                                               "unknown key '" + e.key + "'"});
                }
            }
            it = doc.species_decls.erase(it);
        } else {
            ++it;
        }
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct Validator {
    const NetworkDocument& doc;
    std::vector<Diagnostic>& diags;
    ReactionNetwork net;

    void error(int line, const std::string& msg) {
        diags.push_back({line, 1, Severity::Error, msg});
    }
    void warn(int line, const std::string& msg) {
        diags.push_back({line, 1, Severity::Warning, msg});
    }

    int species_or_error(const std::string& id, int line) {
        int idx = net.species_index(id);
        if (idx < 0) error(line, "unresolved species '" + id + "'");
        return idx;
    }

    // value followed by unit, or @shared reference
    bool read_value(const std::string& rest, int line, double& value, int& shared,
                    std::string* unit_out = nullptr) {
        auto tokens = tokenize(rest);
        shared = -1;
        if (tokens.empty()) {
            error(line, "missing value");
            return false;
        }
        if (tokens[0].size() > 1 && tokens[0][0] == '@') {
            std::string name = tokens[0].substr(1);
            shared = net.param_index(name);
            if (shared < 0) {
                error(line, "unknown shared parameter '@" + name + "'");
                return false;
            }
            value = net.params[shared].value;
            return true;
        }
        if (!parse_number(tokens[0], value)) {
            error(line, "bad number '" + tokens[0] + "'");
            return false;
        }
        if (tokens.size() > 1) {
            double f;
            if (!unit_factor(tokens[1], f)) {
                error(line, "unknown unit '" + tokens[1] + "'");
                return false;
            }
            value *= f;
            if (unit_out) *unit_out = tokens[1];
        }
        return true;
    }

    std::vector<std::pair<int, double>> read_pairs(const std::string& rest, int line) {
        std::vector<std::pair<int, double>> out;
        for (const auto& tok : tokenize(rest)) {
            size_t colon = tok.find(':');
            if (colon == std::string::npos) {
                error(line, "expected species:coefficient, got '" + tok + "'");
                continue;
            }
            std::string id = tok.substr(0, colon);
            double coeff;
            if (!parse_number(tok.substr(colon + 1), coeff)) {
                error(line, "bad coefficient in '" + tok + "'");
                continue;
            }
            int sp = species_or_error(id, line);
            if (sp >= 0) out.emplace_back(sp, coeff);
        }
        return out;
    }

    void check_element_balance(const Reaction& rx, int line) {
        double res_c = 0, res_n = 0, scale_c = 0, scale_n = 0;
        for (const auto& [sp, coeff] : rx.stoich) {
            res_c += coeff * net.species[sp].carbon;
            res_n += coeff * net.species[sp].nitrogen;
            scale_c += std::abs(coeff) * net.species[sp].carbon;
            scale_n += std::abs(coeff) * net.species[sp].nitrogen;
        }
        if (scale_c > 0 && std::abs(res_c) > 1.0e-9 * scale_c)
            error(line, "reaction '" + rx.id + "' C imbalance, residual " +
                            format_double(res_c) + " atoms");
        if (scale_n > 0 && std::abs(res_n) > 1.0e-9 * scale_n)
            error(line, "reaction '" + rx.id + "' N imbalance, residual " +
                            format_double(res_n) + " atoms");
    }

    void build_stress() {
        for (const auto& decl : doc.stress_decls) {
            StressProfile p;
            p.name = decl.arg;
            if (p.name.empty()) {
                error(decl.line, "stress profile needs a name");
                continue;
            }
            if (net.stress_index(p.name) >= 0) {
                error(decl.line, "duplicate stress profile '" + p.name + "'");
                continue;
            }
            for (const auto& e : decl.entries) {
                double v;
                if (e.key == "form") {
                    if (e.rest == "hump") p.form = StressProfile::Form::Hump;
                    else if (e.rest == "increasing") p.form = StressProfile::Form::Increasing;
                    else error(e.line, "unknown stress form '" + e.rest + "'");
                } else if (e.key == "smin" && parse_number(e.rest, v)) p.s_min = v;
                else if (e.key == "sopt" && parse_number(e.rest, v)) p.s_opt = v;
                else if (e.key == "smax" && parse_number(e.rest, v)) p.s_max = v;
                else if (e.key == "a" && parse_number(e.rest, v)) p.a = v;
                else if (e.key == "b" && parse_number(e.rest, v)) p.b = v;
                else warn(e.line, "unknown key '" + e.key + "'");
            }
            if (!(p.s_min < p.s_opt && p.s_opt <= p.s_max) || p.s_min < 0 || p.s_max > 1)
                error(decl.line, "stress profile '" + p.name +
                                     "' needs 0 <= smin < sopt <= smax <= 1");
            if (p.form == StressProfile::Form::Hump && p.s_opt >= p.s_max)
                error(decl.line, "hump stress profile needs sopt < smax");
            net.stress.push_back(p);
        }
        if (net.stress.empty()) {
            StressProfile p;
            p.name = "aerobic";
            net.stress.push_back(p);
        }
    }

    void build_params() {
        for (const auto& decl : doc.param_decls) {
            for (const auto& e : decl.entries) {
                SharedParam p;
                p.name = e.key;
                p.line = e.line;
                auto tokens = tokenize(e.rest);
                if (tokens.empty() || !parse_number(tokens[0], p.value)) {
                    error(e.line, "parameter '" + p.name + "' needs a numeric value");
                    continue;
                }
                size_t next = 1;
                if (tokens.size() > 1 && tokens[1].rfind("group=", 0) != 0) {
                    double f;
                    if (!unit_factor(tokens[1], f)) {
                        error(e.line, "unknown unit '" + tokens[1] + "'");
                        continue;
                    }
                    p.value *= f;
                    p.unit = tokens[1];
                    next = 2;
                }
                for (; next < tokens.size(); ++next)
                    if (tokens[next].rfind("group=", 0) == 0)
                        p.group = tokens[next].substr(6);
                if (net.param_index(p.name) >= 0) {
                    error(e.line, "duplicate parameter '" + p.name + "'");
                    continue;
                }
                if (p.value <= 0)
                    error(e.line, "parameter '" + p.name + "' must be positive");
                net.params.push_back(p);
            }
        }
    }

    void build_species() {
        for (const auto& decl : doc.species_decls) {
            for (const auto& e : decl.entries) {
                Species s;
                s.id = e.key;
                bool ok = true;
                std::string stress_name;
                auto tokens = tokenize(e.rest);
                if (tokens.empty()) {
                    error(e.line, "species '" + s.id + "' needs a phase");
                    continue;
                }
                const std::string& ph = tokens[0];
                if (ph == "aqueous") s.phase = Phase::Aqueous;
                else if (ph == "gaseous") s.phase = Phase::Gaseous;
                else if (ph == "protected") s.phase = Phase::Protected;
                else if (ph == "biomass") s.phase = Phase::Biomass;
                else {
                    error(e.line, "unknown phase '" + ph + "'");
                    ok = false;
                }
                for (size_t i = 1; i < tokens.size(); ++i) {
                    const std::string& t = tokens[i];
                    size_t eq = t.find('=');
                    if (eq == std::string::npos) {
                        warn(e.line, "ignored token '" + t + "'");
                        continue;
                    }
                    std::string key = t.substr(0, eq), val = t.substr(eq + 1);
                    double v;
                    if (key == "C" && parse_number(val, v)) s.carbon = v;
                    else if (key == "N" && parse_number(val, v)) s.nitrogen = v;
                    else if (key == "x" && parse_number(val, v)) s.x = v;
                    else if (key == "name") s.name = val;
                    else if (key == "stress") stress_name = val;
                    else if (key == "mineral") s.mineral = (val == "1" || val == "yes");
                    else if (key == "inert") s.inert = (val == "1" || val == "yes");
                    else warn(e.line, "unknown attribute '" + key + "'");
                }
                if (s.carbon < 0 || s.nitrogen < 0) {
                    error(e.line, "species '" + s.id + "' needs C >= 0 and N >= 0");
                    ok = false;
                }
                if (s.phase == Phase::Biomass) {
                    if (std::abs(s.carbon - 5.0 * s.x) > 1.0e-9 ||
                        std::abs(s.nitrogen - 1.0) > 1.0e-9) {
                        error(e.line, "biomass species '" + s.id +
                                          "' must satisfy C = 5x and N = 1");
                        ok = false;
                    }
                    s.stress = 0;
                    if (!stress_name.empty()) {
                        s.stress = net.stress_index(stress_name);
                        if (s.stress < 0) {
                            error(e.line, "unknown stress profile '" + stress_name + "'");
                            s.stress = 0;
                        }
                    }
                } else if (!stress_name.empty()) {
                    warn(e.line, "stress profile on non-biomass species ignored");
                }
                if (net.species_map.count(s.id)) {
                    error(e.line, "duplicate species '" + s.id + "'");
                    ok = false;
                }
                if (ok) {
                    net.species_map[s.id] = static_cast<int>(net.species.size());
                    net.species.push_back(s);
                }
            }
        }
    }

    int pool_of(const std::string& name) {
        int idx = net.pool_index(name);
        if (idx >= 0) return idx;
        net.pools.push_back(name);
        return static_cast<int>(net.pools.size()) - 1;
    }

    void build_reaction(const SectionDecl& decl) {
        Reaction rx;
        rx.id = decl.arg;
        rx.line = decl.line;
        if (rx.id.empty()) {
            error(decl.line, "reaction needs an identifier");
            return;
        }
        for (const auto& other : net.reactions)
            if (other.id == rx.id) {
                error(decl.line, "duplicate reaction '" + rx.id + "'");
                return;
            }

        bool kind_seen = false;
        for (const auto& e : decl.entries) {
            if (e.key == "kind") {
                kind_seen = true;
                if (e.rest == "monod") rx.kind = ReactionKind::Monod;
                else if (e.rest == "uptake") rx.kind = ReactionKind::Uptake;
                else if (e.rest == "fixation") rx.kind = ReactionKind::Fixation;
                else if (e.rest == "chemo_denit") rx.kind = ReactionKind::ChemoDenit;
                else if (e.rest == "first_order") rx.kind = ReactionKind::FirstOrder;
                else if (e.rest == "protect") rx.kind = ReactionKind::Protect;
                else if (e.rest == "unprotect") rx.kind = ReactionKind::Unprotect;
                else if (e.rest == "gas") rx.kind = ReactionKind::Gas;
                else if (e.rest == "litter") rx.kind = ReactionKind::Litter;
                else error(e.line, "unknown reaction kind '" + e.rest + "'");
            }
        }
        if (!kind_seen) error(decl.line, "reaction '" + rx.id + "' needs a kind");

        for (const auto& e : decl.entries) {
            if (e.key == "kind") continue;
            if (e.key == "rate") {
                read_value(e.rest, e.line, rx.k, rx.k_shared, &rx.k_unit);
            } else if (e.key == "actor") {
                rx.actor = species_or_error(e.rest, e.line);
            } else if (e.key == "yield") {
                if (!parse_number(e.rest, rx.yield))
                    error(e.line, "bad yield '" + e.rest + "'");
            } else if (e.key == "monod" || e.key == "inhibit") {
                auto tokens = tokenize(e.rest);
                if (tokens.empty()) {
                    error(e.line, "missing species");
                    continue;
                }
                MonodTerm term;
                term.species = species_or_error(tokens[0], e.line);
                std::string rest =
                    tokens.size() > 1 ? e.rest.substr(e.rest.find(tokens[0]) + tokens[0].size())
                                      : "";
                if (!read_value(trim(rest), e.line, term.value, term.shared)) continue;
                if (term.species < 0) continue;
                (e.key == "monod" ? rx.substrates : rx.inhibitors).push_back(term);
            } else if (e.key == "stoich") {
                auto pairs = read_pairs(e.rest, e.line);
                rx.stoich.insert(rx.stoich.end(), pairs.begin(), pairs.end());
            } else if (e.key == "moisture") {
                rx.moisture = (e.rest == "on" || e.rest == "true" || e.rest == "1");
            } else if (e.key == "group") {
                auto t = tokenize(e.rest);
                if (!t.empty()) rx.group = t[0];
            } else if (e.key == "km_no2") {
                int dummy;
                read_value(e.rest, e.line, rx.km_no2, dummy);
            } else if (e.key == "km_h") {
                int dummy;
                read_value(e.rest, e.line, rx.km_h, dummy);
            } else if (e.key == "substrate") {
                rx.substrate = species_or_error(e.rest, e.line);
            } else if (e.key == "aqueous") {
                rx.aqueous = species_or_error(e.rest, e.line);
            } else if (e.key == "protected") {
                rx.protected_sp = species_or_error(e.rest, e.line);
            } else if (e.key == "capacity") {
                rx.capacity_pool = pool_of(e.rest);
            } else if (e.key == "gas") {
                rx.gas_sp = species_or_error(e.rest, e.line);
            } else if (e.key == "partner") {
                rx.aq_partner = species_or_error(e.rest, e.line);
            } else if (e.key == "logk") {
                auto tokens = tokenize(e.rest);
                for (size_t i = 0; i < 3 && i < tokens.size(); ++i) {
                    if (!parse_number(tokens[i], rx.logk[i]))
                        error(e.line, "bad logK coefficient '" + tokens[i] + "'");
                }
            } else if (e.key == "target") {
                if (e.rest == "surface") rx.litter_target = Reaction::LitterTarget::Surface;
                else if (e.rest == "roots") rx.litter_target = Reaction::LitterTarget::Roots;
                else error(e.line, "litter target must be surface or roots");
            } else if (e.key == "cn") {
                if (!parse_number(e.rest, rx.cn)) error(e.line, "bad C:N '" + e.rest + "'");
            } else if (e.key == "compose") {
                auto pairs = read_pairs(e.rest, e.line);
                rx.compose.insert(rx.compose.end(), pairs.begin(), pairs.end());
            } else if (e.key == "product") {
                rx.product = species_or_error(e.rest, e.line);
            } else {
                warn(e.line, "unknown key '" + e.key + "'");
            }
        }
        check_reaction_semantics(rx, decl.line);
        net.reactions.push_back(std::move(rx));
    }

    void check_reaction_semantics(const Reaction& rx, int line) {
        auto require_positive_rate = [&] {
            if (rx.k <= 0) error(line, "reaction '" + rx.id + "' needs a positive rate");
        };
        for (const auto& t : rx.substrates)
            if (t.value <= 0)
                error(line, "reaction '" + rx.id + "' K_M must be positive");
        for (const auto& t : rx.inhibitors)
            if (t.value <= 0)
                error(line, "reaction '" + rx.id + "' K_I must be positive");

        switch (rx.kind) {
            case ReactionKind::Monod: {
                require_positive_rate();
                if (rx.substrates.empty())
                    error(line, "monod reaction '" + rx.id + "' needs a substrate");
                if (rx.actor >= 0) {
                    if (net.species[rx.actor].phase != Phase::Biomass)
                        error(line, "actor of '" + rx.id + "' must be biomass");
                    if (rx.yield <= 0)
                        error(line, "reaction '" + rx.id + "' with actor needs yield > 0");
                    bool found = false;
                    for (const auto& [sp, coeff] : rx.stoich)
                        if (sp == rx.actor) {
                            found = true;
                            if (std::abs(coeff - rx.yield) > 1.0e-9 * rx.yield)
                                error(line, "actor coefficient of '" + rx.id +
                                                "' must equal the yield");
                        }
                    if (!found)
                        error(line, "stoichiometry of '" + rx.id +
                                        "' must include the actor");
                } else if (rx.yield != 0) {
                    error(line, "yield without actor in '" + rx.id + "'");
                }
                check_element_balance(rx, line);
                break;
            }
            case ReactionKind::Uptake:
                require_positive_rate();
                if (rx.actor >= 0) error(line, "uptake '" + rx.id + "' is actor-less");
                if (rx.substrates.size() != 1)
                    error(line, "uptake '" + rx.id + "' needs exactly one monod term");
                check_element_balance(rx, line);
                break;
            case ReactionKind::Fixation:
                require_positive_rate();
                if (rx.product < 0)
                    error(line, "fixation '" + rx.id + "' needs a product");
                else if (net.species[rx.product].nitrogen <= 0)
                    error(line, "fixation product must carry nitrogen");
                break;
            case ReactionKind::ChemoDenit:
                require_positive_rate();
                if (rx.km_no2 <= 0 || rx.km_h <= 0)
                    error(line, "chemo_denit '" + rx.id +
                                    "' needs positive km_no2 and km_h");
                if (rx.substrate < 0)
                    error(line, "chemo_denit '" + rx.id + "' needs a substrate");
                check_element_balance(rx, line);
                break;
            case ReactionKind::FirstOrder:
                require_positive_rate();
                if (rx.substrate < 0)
                    error(line, "first_order '" + rx.id + "' needs a substrate");
                check_element_balance(rx, line);
                break;
            case ReactionKind::Protect:
            case ReactionKind::Unprotect: {
                if (rx.k < 0) error(line, "negative rate in '" + rx.id + "'");
                if (rx.aqueous < 0 || rx.protected_sp < 0) {
                    error(line, "'" + rx.id + "' needs aqueous and protected species");
                    break;
                }
                const Species& aq = net.species[rx.aqueous];
                const Species& pr = net.species[rx.protected_sp];
                if (aq.phase != Phase::Aqueous)
                    error(line, "'" + rx.id + "': " + aq.id + " is not aqueous");
                if (pr.phase != Phase::Protected)
                    error(line, "'" + rx.id + "': " + pr.id + " is not protected");
                if (std::abs(aq.carbon - pr.carbon) > 1.0e-9 ||
                    std::abs(aq.nitrogen - pr.nitrogen) > 1.0e-9)
                    error(line, "'" + rx.id +
                                    "': aqueous and protected species must have "
                                    "identical element composition");
                if (rx.kind == ReactionKind::Protect && rx.capacity_pool < 0)
                    error(line, "protect '" + rx.id + "' needs a capacity pool");
                break;
            }
            case ReactionKind::Gas: {
                if (rx.gas_sp < 0 || rx.aq_partner < 0) {
                    error(line, "gas '" + rx.id + "' needs gas and partner species");
                    break;
                }
                const Species& g = net.species[rx.gas_sp];
                const Species& a = net.species[rx.aq_partner];
                if (g.phase != Phase::Gaseous)
                    error(line, "'" + rx.id + "': " + g.id + " is not gaseous");
                if (a.phase != Phase::Aqueous)
                    error(line, "'" + rx.id + "': " + a.id + " is not aqueous");
                if (std::abs(g.carbon - a.carbon) > 1.0e-9 ||
                    std::abs(g.nitrogen - a.nitrogen) > 1.0e-9)
                    error(line, "'" + rx.id + "': phases must share composition");
                for (double c : rx.logk)
                    if (!std::isfinite(c))
                        error(line, "'" + rx.id + "': logK coefficients must be finite");
                break;
            }
            case ReactionKind::Litter: {
                require_positive_rate();
                if (rx.cn <= 0) error(line, "litter '" + rx.id + "' needs cn > 0");
                if (rx.compose.empty()) {
                    error(line, "litter '" + rx.id + "' needs a composition");
                    break;
                }
                double sum = 0, n_per_c = 0;
                bool comp_ok = true;
                for (const auto& [sp, frac] : rx.compose) {
                    sum += frac;
                    if (net.species[sp].carbon <= 0) {
                        error(line, "litter pool '" + net.species[sp].id +
                                        "' must contain carbon");
                        comp_ok = false;
                        continue;
                    }
                    n_per_c += frac * net.species[sp].nitrogen / net.species[sp].carbon;
                }
                if (std::abs(sum - 1.0) > 1.0e-9)
                    error(line, "litter '" + rx.id + "' composition sums to " +
                                    format_double(sum));
                if (comp_ok && rx.cn > 0) {
                    // mass C:N implied by the composition
                    double cn_actual = n_per_c > 0
                                           ? kKgPerMolC / (kKgPerMolN * n_per_c)
                                           : std::numeric_limits<double>::infinity();
                    if (!(std::abs(cn_actual - rx.cn) <= 0.02 * rx.cn))
                        error(line, "litter '" + rx.id + "' declares C:N " +
                                        format_double(rx.cn) + " but composition gives " +
                                        format_double(cn_actual));
                }
                break;
            }
        }
    }

    void build_mortality(const SectionDecl& decl) {
        MortalityLaw law;
        law.group_id = decl.arg;
        law.line = decl.line;
        if (law.group_id.empty()) {
            error(decl.line, "mortality needs a biomass group");
            return;
        }
        for (const auto& other : net.mortality)
            if (other.group_id == law.group_id) {
                error(decl.line, "duplicate mortality for '" + law.group_id + "'");
                return;
            }
        law.species = species_or_error(law.group_id, decl.line);
        for (const auto& e : decl.entries) {
            if (e.key == "delta") {
                int dummy;
                read_value(e.rest, e.line, law.delta, dummy);
            } else if (e.key == "partition") {
                auto pairs = read_pairs(e.rest, e.line);
                law.partition.insert(law.partition.end(), pairs.begin(), pairs.end());
            } else if (e.key == "group") {
                auto t = tokenize(e.rest);
                if (!t.empty()) law.group = t[0];
            } else {
                warn(e.line, "unknown key '" + e.key + "'");
            }
        }
        if (law.delta < 0) error(decl.line, "mortality rate must be >= 0");
        if (law.species >= 0) {
            const Species& b = net.species[law.species];
            if (b.phase != Phase::Biomass)
                error(decl.line, "'" + law.group_id + "' is not a biomass species");
            double sum = 0, n_routed = 0;
            bool comp_ok = b.carbon > 0;
            if (!comp_ok)
                error(decl.line, "mortality group must contain carbon");
            for (const auto& [sp, frac] : law.partition) {
                sum += frac;
                if (net.species[sp].carbon <= 0) {
                    error(decl.line, "necromass pool '" + net.species[sp].id +
                                         "' must contain carbon");
                    comp_ok = false;
                    continue;
                }
                n_routed += frac * b.carbon * net.species[sp].nitrogen /
                            net.species[sp].carbon;
            }
            if (std::abs(sum - 1.0) > 1.0e-9)
                error(decl.line, "necromass partition of '" + law.group_id +
                                     "' sums to " + format_double(sum));
            if (comp_ok && std::abs(n_routed - b.nitrogen) >
                               1.0e-9 * std::max(b.nitrogen, 1.0))
                error(decl.line, "necromass partition of '" + law.group_id +
                                     "' does not conserve N (routes " +
                                     format_double(n_routed) + " of " +
                                     format_double(b.nitrogen) + ")");
        }
        net.mortality.push_back(std::move(law));
    }

    void check_pairs() {
        struct Seen { int protect_line = 0, unprotect_line = 0; };
        std::map<std::pair<int, int>, Seen> seen;
        for (const auto& rx : net.reactions) {
            if (rx.kind != ReactionKind::Protect && rx.kind != ReactionKind::Unprotect)
                continue;
            if (rx.aqueous < 0 || rx.protected_sp < 0) continue;
            auto& s = seen[{rx.aqueous, rx.protected_sp}];
            if (rx.kind == ReactionKind::Protect) {
                if (s.protect_line)
                    error(rx.line, "duplicate protect declaration for " +
                                       net.species[rx.aqueous].id);
                s.protect_line = rx.line;
            } else {
                if (s.unprotect_line)
                    error(rx.line, "duplicate unprotect declaration for " +
                                       net.species[rx.aqueous].id);
                s.unprotect_line = rx.line;
            }
        }
        for (const auto& [key, s] : seen) {
            if (!s.protect_line)
                error(s.unprotect_line, "unprotect without protect for " +
                                            net.species[key.first].id);
            if (!s.unprotect_line)
                error(s.protect_line, "protect without unprotect for " +
                                          net.species[key.first].id);
        }
    }

    std::optional<ReactionNetwork> run() {
        net.name = doc.name;
        net.format_version = doc.format_version;
        build_stress();
        build_species();
        build_params();
        for (const auto& decl : doc.reaction_decls) build_reaction(decl);
        for (const auto& decl : doc.mortality_decls) build_mortality(decl);
        check_pairs();
        if (has_errors(diags)) return std::nullopt;
        net.compile();
        return std::move(net);
    }
};

}  // namespace

std::optional<ReactionNetwork> validate(const NetworkDocument& doc,
                                        std::vector<Diagnostic>& diagnostics) {
    for (const auto& d : doc.diagnostics) diagnostics.push_back(d);
    Validator v{doc, diagnostics, {}};
    return v.run();
}

ReactionNetwork load_network(const std::string& path) {
    NetworkDocument doc = parse_network(read_text_file(path));
    std::vector<Diagnostic> diags;
    auto net = validate(doc, diags);
    if (!net) {
        std::string msg;
        for (const auto& d : diags) msg += format_diagnostic(path, d) + "\n";
        throw ConfigError("invalid network file:\n" + msg);
    }
    return std::move(*net);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void write_value(std::ostringstream& out, const std::string& key, double value,
                 int shared, const ReactionNetwork& net) {
    out << key << " ";
    if (shared >= 0) out << "@" << net.params[shared].name;
    else out << format_double(value);
    out << "\n";
}

}  // namespace

std::string serialize(const ReactionNetwork& net) {
    std::ostringstream out;
    out << "[network]\n";
    if (!net.name.empty()) out << "name " << net.name << "\n";
    out << "format " << net.format_version << "\n";

    for (const auto& p : net.stress) {
        out << "\n[stress " << p.name << "]\n";
        out << "form " << (p.form == StressProfile::Form::Hump ? "hump" : "increasing")
            << "\n";
        out << "smin " << format_double(p.s_min) << "\n";
        out << "sopt " << format_double(p.s_opt) << "\n";
        if (p.form == StressProfile::Form::Hump)
            out << "smax " << format_double(p.s_max) << "\n";
        out << "a " << format_double(p.a) << "\n";
        if (p.form == StressProfile::Form::Hump)
            out << "b " << format_double(p.b) << "\n";
    }

    out << "\n[species]\n";
    for (const auto& s : net.species) {
        out << s.id << " " << phase_name(s.phase) << " C=" << format_double(s.carbon)
            << " N=" << format_double(s.nitrogen);
        if (s.phase == Phase::Biomass) {
            out << " x=" << format_double(s.x);
            if (s.stress >= 0) out << " stress=" << net.stress[s.stress].name;
        }
        if (s.mineral) out << " mineral=1";
        if (s.inert) out << " inert=1";
        if (!s.name.empty()) out << " name=\"" << s.name << "\"";
        out << "\n";
    }

    if (!net.params.empty()) {
        out << "\n[params]\n";
        for (const auto& p : net.params) {
            out << p.name << " " << format_double(p.value);
            if (!p.unit.empty()) out << " " << p.unit;
            if (!p.group.empty()) out << " group=\"" << p.group << "\"";
            out << "\n";
        }
    }

    for (const auto& rx : net.reactions) {
        out << "\n[reaction " << rx.id << "]\n";
        out << "kind " << reaction_kind_name(rx.kind) << "\n";
        if (rx.kind != ReactionKind::Gas)
            write_value(out, "rate", rx.k, rx.k_shared, net);
        if (rx.actor >= 0) {
            out << "actor " << net.species[rx.actor].id << "\n";
            out << "yield " << format_double(rx.yield) << "\n";
        }
        for (const auto& t : rx.substrates) {
            out << "monod " << net.species[t.species].id << " ";
            if (t.shared >= 0) out << "@" << net.params[t.shared].name;
            else out << format_double(t.value);
            out << "\n";
        }
        for (const auto& t : rx.inhibitors) {
            out << "inhibit " << net.species[t.species].id << " ";
            if (t.shared >= 0) out << "@" << net.params[t.shared].name;
            else out << format_double(t.value);
            out << "\n";
        }
        if (!rx.stoich.empty()) {
            out << "stoich";
            for (const auto& [sp, coeff] : rx.stoich)
                out << " " << net.species[sp].id << ":" << format_double(coeff);
            out << "\n";
        }
        if (rx.moisture) out << "moisture on\n";
        if (rx.kind == ReactionKind::ChemoDenit) {
            out << "km_no2 " << format_double(rx.km_no2) << "\n";
            out << "km_h " << format_double(rx.km_h) << "\n";
        }
        if (rx.substrate >= 0)
            out << "substrate " << net.species[rx.substrate].id << "\n";
        if (rx.aqueous >= 0) out << "aqueous " << net.species[rx.aqueous].id << "\n";
        if (rx.protected_sp >= 0)
            out << "protected " << net.species[rx.protected_sp].id << "\n";
        if (rx.capacity_pool >= 0)
            out << "capacity " << net.pools[rx.capacity_pool] << "\n";
        if (rx.kind == ReactionKind::Gas) {
            out << "gas " << net.species[rx.gas_sp].id << "\n";
            out << "partner " << net.species[rx.aq_partner].id << "\n";
            out << "logk " << format_double(rx.logk[0]) << " "
                << format_double(rx.logk[1]) << " " << format_double(rx.logk[2])
                << "\n";
        }
        if (rx.kind == ReactionKind::Litter) {
            out << "target "
                << (rx.litter_target == Reaction::LitterTarget::Surface ? "surface"
                                                                        : "roots")
                << "\n";
            out << "cn " << format_double(rx.cn) << "\n";
            out << "compose";
            for (const auto& [sp, frac] : rx.compose)
                out << " " << net.species[sp].id << ":" << format_double(frac);
            out << "\n";
        }
        if (rx.product >= 0) out << "product " << net.species[rx.product].id << "\n";
        if (!rx.group.empty()) out << "group \"" << rx.group << "\"\n";
    }

    for (const auto& law : net.mortality) {
        out << "\n[mortality " << law.group_id << "]\n";
        out << "delta " << format_double(law.delta) << "\n";
        out << "partition";
        for (const auto& [sp, frac] : law.partition)
            out << " " << net.species[sp].id << ":" << format_double(frac);
        out << "\n";
        if (!law.group.empty()) out << "group \"" << law.group << "\"\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Parameter catalog

int ParameterCatalog::index_of(const std::string& path) const {
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].path == path) return static_cast<int>(i);
    return -1;
}

namespace {

std::string default_group(const std::string& declared, const std::string& path) {
    return declared.empty() ? path : declared;
}

const char* rate_unit(ReactionKind kind) {
    switch (kind) {
        case ReactionKind::Monod:
        case ReactionKind::FirstOrder:
        case ReactionKind::Unprotect:
        case ReactionKind::Litter:
            return "/s";
        case ReactionKind::Uptake:
        case ReactionKind::ChemoDenit:
            return "mol/L/s";
        case ReactionKind::Fixation:
            return "mol/m2/s";
        case ReactionKind::Protect:
            return "L/mol/s";
        default:
            return "-";
    }
}

}  // namespace

ParameterCatalog catalog_parameters(const ReactionNetwork& net) {
    ParameterCatalog cat;
    auto add = [&](const std::string& path, double ref, const std::string& unit,
                   const std::string& group) {
        cat.entries.push_back({path, ref, unit, default_group(group, path)});
    };

    for (const auto& p : net.params)
        add("param." + p.name, p.value, p.unit.empty() ? "-" : p.unit, p.group);

    for (const auto& rx : net.reactions) {
        const std::string base = "reaction." + rx.id + ".";
        if (rx.kind == ReactionKind::Gas) {
            add(base + "logk0", rx.logk[0], "-", rx.group);
            continue;
        }
        if (rx.k_shared < 0) add(base + "k", rx.k, rate_unit(rx.kind), rx.group);
        for (const auto& t : rx.substrates)
            if (t.shared < 0)
                add(base + "km." + net.species[t.species].id, t.value, "mol/L", rx.group);
        for (const auto& t : rx.inhibitors)
            if (t.shared < 0)
                add(base + "ki." + net.species[t.species].id, t.value, "mol/L", rx.group);
        if (rx.kind == ReactionKind::ChemoDenit) {
            add(base + "km_no2", rx.km_no2, "mol/L", rx.group);
            add(base + "km_h", rx.km_h, "mol/L", rx.group);
        }
    }

    for (const auto& law : net.mortality)
        add("mortality." + law.group_id + ".delta", law.delta, "/s", law.group);

    return cat;
}

ReactionNetwork apply_parameters(const ReactionNetwork& net,
                                 const std::vector<std::pair<std::string, double>>& assignment) {
    ReactionNetwork out = net;
    for (const auto& [path, value] : assignment) {
        auto dot = path.find('.');
        std::string head = path.substr(0, dot == std::string::npos ? path.size() : dot);
        std::string rest = dot == std::string::npos ? "" : path.substr(dot + 1);
        bool ok = false;
        bool allow_any_sign = false;
        bool allow_zero = false;

        if (head == "param") {
            int idx = out.param_index(rest);
            if (idx >= 0) {
                out.params[idx].value = value;
                ok = true;
            }
        } else if (head == "mortality") {
            auto dot2 = rest.find('.');
            if (dot2 != std::string::npos && rest.substr(dot2 + 1) == "delta") {
                std::string group = rest.substr(0, dot2);
                for (auto& law : out.mortality)
                    if (law.group_id == group) {
                        law.delta = value;
                        ok = true;
                        allow_zero = true;
                    }
            }
        } else if (head == "reaction") {
            auto dot2 = rest.find('.');
            if (dot2 != std::string::npos) {
                std::string id = rest.substr(0, dot2);
                std::string field = rest.substr(dot2 + 1);
                for (auto& rx : out.reactions) {
                    if (rx.id != id) continue;
                    if (field == "k" && rx.k_shared < 0 &&
                        rx.kind != ReactionKind::Gas) {
                        rx.k = value;
                        ok = true;
                    } else if (field == "logk0" && rx.kind == ReactionKind::Gas) {
                        rx.logk[0] = value;
                        ok = true;
                        allow_any_sign = true;
                    } else if (field == "km_no2") {
                        rx.km_no2 = value;
                        ok = true;
                    } else if (field == "km_h") {
                        rx.km_h = value;
                        ok = true;
                    } else if (field.rfind("km.", 0) == 0 || field.rfind("ki.", 0) == 0) {
                        int sp = out.species_index(field.substr(3));
                        auto& terms =
                            field[1] == 'm' ? rx.substrates : rx.inhibitors;
                        for (auto& t : terms)
                            if (t.species == sp && t.shared < 0) {
                                t.value = value;
                                ok = true;
                            }
                    }
                }
            }
        }
        if (!ok) throw ConfigError("unknown parameter path '" + path + "'");
        if (!allow_any_sign && (value < 0 || (!allow_zero && value <= 0)))
            throw ConfigError("parameter '" + path + "' must be positive, got " +
                              format_double(value));
    }
    out.compile();
    return out;
}

}  // namespace soilcn
