#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "tg/admissibility.hpp"

namespace tgcli {

using json = nlohmann::json;
using tg::cplx;

/// Reads one JSON object key by key. Every error names the JSON pointer of the
/// offending value; finish() rejects keys that were never read.
class ObjectReader {
public:
    ObjectReader(const json& value, std::string pointer);

    bool has(const std::string& key) const;
    const json& at(const std::string& key);
    std::string child(const std::string& key) const { return pointer_ + "/" + key; }

    double number(const std::string& key);
    double number_or(const std::string& key, double fallback);
    int integer_or(const std::string& key, int fallback);
    bool boolean_or(const std::string& key, bool fallback);
    std::string string_or(const std::string& key, const std::string& fallback);
    cplx point(const std::string& key);
    std::vector<cplx> points(const std::string& key);

    void finish() const;

private:
    const json& value_;
    std::string pointer_;
    std::set<std::string> seen_;
};

[[noreturn]] void config_error(const std::string& pointer, const std::string& what);

double as_number(const json& v, const std::string& pointer);
int as_integer(const json& v, const std::string& pointer);
cplx as_point(const json& v, const std::string& pointer);

json load_json(const std::filesystem::path& file);

/// {"omega1": [re, im], "omega2": [re, im]} or {"tau": [re, im]} with omega1 = 1.
tg::LatticeBasis parse_basis(const json& v, const std::string& pointer);

tg::SingularQuadratureSettings parse_quadrature(const json& v, const std::string& pointer);

struct PairedSetup {
    cplx p1;
    int translate = 1;
};
PairedSetup parse_paired(const json& v, const std::string& pointer);

/// Configuration of d2func and verify.
struct RunConfig {
    std::optional<tg::LatticeBasis> basis;
    tg::VortexConfig vortices;
    tg::BlowupConfig blowup;
    tg::SingularQuadratureSettings quadrature;
    tg::WeightDenominator weights = tg::WeightDenominator::per_point;
    std::optional<PairedSetup> paired;  // verify only: run the paired-vortex study instead
};
RunConfig parse_run_config(const json& v, bool allow_paired);

/// Modulus list: {"moduli": [[re, im], ...]} or {"path": {"from": [re, im], "to": [re, im], "count": n}}.
/// Each entry is tau with omega1 = 1.
std::vector<cplx> parse_moduli(ObjectReader& reader);

struct SweepSpec {
    std::vector<cplx> moduli;
    int grid = 128;
    bool d_functional = true;
    std::vector<PairedSetup> paired;
    tg::SingularQuadratureSettings quadrature;
};
SweepSpec parse_sweep(const json& v);

struct TauPathSpec {
    std::vector<cplx> moduli;
    int grid = 128;
};
TauPathSpec parse_tau_path(const json& v);

}  // namespace tgcli
