#include "config.hpp"

#include <fstream>
#include <sstream>

#include "tg/error.hpp"

namespace tgcli {

void config_error(const std::string& pointer, const std::string& what) {
    throw tg::ConfigError((pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

ObjectReader::ObjectReader(const json& value, std::string pointer) : value_(value), pointer_(std::move(pointer)) {
    if (!value_.is_object()) {
        config_error(pointer_, "expected an object");
    }
}

bool ObjectReader::has(const std::string& key) const { return value_.contains(key); }

const json& ObjectReader::at(const std::string& key) {
    if (!value_.contains(key)) {
        config_error(child(key), "missing required key");
    }
    seen_.insert(key);
    return value_.at(key);
}

double ObjectReader::number(const std::string& key) { return as_number(at(key), child(key)); }

double ObjectReader::number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
}

int ObjectReader::integer_or(const std::string& key, int fallback) {
    return has(key) ? as_integer(at(key), child(key)) : fallback;
}

bool ObjectReader::boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) config_error(child(key), "expected true or false");
    return v.get<bool>();
}

std::string ObjectReader::string_or(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) config_error(child(key), "expected a string");
    return v.get<std::string>();
}

cplx ObjectReader::point(const std::string& key) { return as_point(at(key), child(key)); }

std::vector<cplx> ObjectReader::points(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) config_error(child(key), "expected an array of [re, im] points");
    std::vector<cplx> out;
    for (std::size_t n = 0; n < v.size(); ++n) {
        out.push_back(as_point(v[n], child(key) + "/" + std::to_string(n)));
    }
    return out;
}

void ObjectReader::finish() const {
    for (const auto& [key, _] : value_.items()) {
        if (!seen_.count(key)) {
            config_error(child(key), "unknown key");
        }
    }
}

double as_number(const json& v, const std::string& pointer) {
    if (!v.is_number()) config_error(pointer, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_error(pointer, "expected a finite number");
    return x;
}

int as_integer(const json& v, const std::string& pointer) {
    if (!v.is_number_integer()) config_error(pointer, "expected an integer");
    return v.get<int>();
}

cplx as_point(const json& v, const std::string& pointer) {
    if (!v.is_array() || v.size() != 2) config_error(pointer, "expected [re, im]");
    return {as_number(v[0], pointer + "/0"), as_number(v[1], pointer + "/1")};
}

json load_json(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw tg::ConfigError("cannot open " + file.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw tg::ConfigError(file.string() + ": " + e.what());
    }
}

tg::LatticeBasis parse_basis(const json& v, const std::string& pointer) {
    ObjectReader r(v, pointer);
    cplx w1 = 1.0;
    cplx w2;
    if (r.has("tau")) {
        if (r.has("omega1") || r.has("omega2")) config_error(pointer, "give either tau or omega1/omega2, not both");
        w2 = r.point("tau");
    } else {
        w1 = r.point("omega1");
        w2 = r.point("omega2");
    }
    r.finish();
    try {
        return tg::LatticeBasis(w1, w2);
    } catch (const tg::Error& e) {
        config_error(pointer, e.what());
    }
}

tg::SingularQuadratureSettings parse_quadrature(const json& v, const std::string& pointer) {
    ObjectReader r(v, pointer);
    tg::SingularQuadratureSettings s;
    if (r.has("delta_sequence")) {
        const json& d = r.at("delta_sequence");
        if (!d.is_array()) config_error(r.child("delta_sequence"), "expected an array of radii");
        for (std::size_t n = 0; n < d.size(); ++n) {
            s.delta_sequence.push_back(as_number(d[n], r.child("delta_sequence") + "/" + std::to_string(n)));
        }
    }
    s.angular_nodes = r.integer_or("angular_nodes", s.angular_nodes);
    s.radial_nodes = r.integer_or("radial_nodes", s.radial_nodes);
    s.outer_nodes = r.integer_or("outer_nodes", s.outer_nodes);
    s.outer_panels = r.integer_or("outer_panels", s.outer_panels);
    s.outer_cutoff = r.number_or("outer_cutoff", s.outer_cutoff);
    s.patch_tolerance = r.number_or("patch_tolerance", s.patch_tolerance);
    s.refine_check = r.boolean_or("refine_check", s.refine_check);
    r.finish();
    try {
        s.validate();
    } catch (const tg::ConfigError& e) {
        config_error(pointer, e.what());
    }
    return s;
}

PairedSetup parse_paired(const json& v, const std::string& pointer) {
    ObjectReader r(v, pointer);
    PairedSetup p;
    p.p1 = r.has("p1") ? r.point("p1") : cplx{};
    p.translate = r.integer_or("translate", 1);
    if (p.translate < 1 || p.translate > 3) config_error(r.child("translate"), "expected 1, 2 or 3");
    r.finish();
    return p;
}

namespace {

std::vector<tg::TorusPoint> torus_points(const std::vector<cplx>& zs, const tg::LatticeBasis& basis) {
    std::vector<tg::TorusPoint> out;
    for (cplx z : zs) out.push_back(tg::reduce_to_fundamental(z, basis));
    return out;
}

tg::PartitionSpec parse_partition(const json& v, const std::string& pointer) {
    ObjectReader r(v, pointer);
    tg::PartitionSpec spec;
    spec.delta = r.number("delta");
    const json& cells = r.at("cells");
    const std::string cp = r.child("cells");
    if (!cells.is_array()) config_error(cp, "expected an array of cells");
    for (std::size_t n = 0; n < cells.size(); ++n) {
        ObjectReader c(cells[n], cp + "/" + std::to_string(n));
        tg::PartitionCell cell;
        cell.q_index = as_integer(c.at("q_index"), c.child("q_index"));
        const json& patches = c.at("cell");
        if (!patches.is_array()) config_error(c.child("cell"), "expected an array of patches");
        for (std::size_t m = 0; m < patches.size(); ++m) {
            ObjectReader pr(patches[m], c.child("cell") + "/" + std::to_string(m));
            const cplx s = pr.point("s");
            const cplx t = pr.point("t");
            cell.patches.push_back({s.real(), s.imag(), t.real(), t.imag()});
            pr.finish();
        }
        c.finish();
        spec.cells.push_back(std::move(cell));
    }
    r.finish();
    return spec;
}

}  // namespace

RunConfig parse_run_config(const json& v, bool allow_paired) {
    ObjectReader r(v, "");
    RunConfig cfg;
    const tg::LatticeBasis basis = parse_basis(r.at("basis"), "/basis");
    cfg.basis = basis;
    if (r.has("quadrature")) cfg.quadrature = parse_quadrature(r.at("quadrature"), "/quadrature");
    const std::string weights = r.string_or("weights", "per_point");
    if (weights == "per_point") {
        cfg.weights = tg::WeightDenominator::per_point;
    } else if (weights == "first_point") {
        cfg.weights = tg::WeightDenominator::first_point;
    } else {
        config_error("/weights", "expected \"per_point\" or \"first_point\"");
    }

    if (allow_paired && r.has("paired_vortices")) {
        if (r.has("vortices") || r.has("blowup")) {
            config_error("/paired_vortices", "cannot be combined with vortices or blowup");
        }
        cfg.paired = parse_paired(r.at("paired_vortices"), "/paired_vortices");
        r.finish();
        return cfg;
    }

    {
        ObjectReader vr(r.at("vortices"), "/vortices");
        cfg.vortices.p1 = torus_points(vr.points("p1"), basis);
        cfg.vortices.p2 = torus_points(vr.points("p2"), basis);
        vr.finish();
    }
    {
        ObjectReader br(r.at("blowup"), "/blowup");
        cfg.blowup.q = torus_points(br.points("q"), basis);
        if (cfg.blowup.q.empty()) config_error("/blowup/q", "at least one blow-up point is required");
        if (br.has("masses")) {
            const json& m = br.at("masses");
            if (!m.is_array()) config_error("/blowup/masses", "expected an array of [m1, m2]");
            for (std::size_t n = 0; n < m.size(); ++n) {
                const cplx pair = as_point(m[n], "/blowup/masses/" + std::to_string(n));
                cfg.blowup.masses.push_back({pair.real(), pair.imag()});
            }
        }
        if (br.has("partition")) {
            cfg.blowup.partition = parse_partition(br.at("partition"), "/blowup/partition");
        } else if (cfg.blowup.k() == 1) {
            double clearance = 0.5 * std::abs(basis.reduced1());
            for (int c = 1; c <= 2; ++c) {
                for (const tg::TorusPoint& p : cfg.vortices.points(c)) {
                    clearance = std::min(clearance, tg::torus_distance(cfg.blowup.q[0], p, basis));
                }
            }
            cfg.blowup.partition = tg::PartitionSpec::whole_torus(0.25 * clearance);
        } else {
            config_error("/blowup/partition", "a partition is required when there is more than one blow-up point");
        }
        br.finish();
    }
    r.finish();
    try {
        tg::validate(cfg.blowup, cfg.vortices, basis);
    } catch (const tg::ConfigError& e) {
        config_error("/blowup", e.what());
    }
    return cfg;
}

std::vector<cplx> parse_moduli(ObjectReader& r) {
    if (r.has("moduli") == r.has("path")) {
        config_error("", "give exactly one of moduli or path");
    }
    if (r.has("moduli")) {
        return r.points("moduli");
    }
    ObjectReader p(r.at("path"), "/path");
    const cplx from = p.point("from");
    const cplx to = p.point("to");
    const int count = p.integer_or("count", 0);
    if (count < 0) config_error("/path/count", "expected a non-negative integer");
    p.finish();
    std::vector<cplx> out;
    for (int n = 0; n < count; ++n) {
        const double s = count == 1 ? 0.0 : static_cast<double>(n) / (count - 1);
        out.push_back(from + s * (to - from));
    }
    return out;
}

SweepSpec parse_sweep(const json& v) {
    ObjectReader r(v, "");
    SweepSpec spec;
    spec.moduli = parse_moduli(r);
    spec.grid = r.integer_or("grid", spec.grid);
    if (spec.grid < 8) config_error("/grid", "expected at least 8");
    spec.d_functional = r.boolean_or("d_functional", spec.d_functional);
    if (r.has("paired_vortices")) {
        const json& p = r.at("paired_vortices");
        if (!p.is_array()) config_error("/paired_vortices", "expected an array of setups");
        for (std::size_t n = 0; n < p.size(); ++n) {
            spec.paired.push_back(parse_paired(p[n], "/paired_vortices/" + std::to_string(n)));
        }
    }
    if (r.has("quadrature")) spec.quadrature = parse_quadrature(r.at("quadrature"), "/quadrature");
    r.finish();
    return spec;
}

TauPathSpec parse_tau_path(const json& v) {
    ObjectReader r(v, "");
    TauPathSpec spec;
    spec.moduli = parse_moduli(r);
    spec.grid = r.integer_or("grid", spec.grid);
    if (spec.grid < 8) config_error("/grid", "expected at least 8");
    r.finish();
    return spec;
}

}  // namespace tgcli
