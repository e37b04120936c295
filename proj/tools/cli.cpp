#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "digest.hpp"
#include "tg/error.hpp"
#include "tg/liouville.hpp"
#include "tg/version.hpp"

namespace tgcli {
namespace {

namespace fs = std::filesystem;

struct Globals {
    int threads = 0;
    std::string out_dir;
    std::string cache_dir = ".torusgreen";
    std::uint64_t seed = 0;
};

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }
json to_json(const tg::Vec2& v) { return json::array({v.x, v.y}); }
json to_json(const tg::Sym2& h) { return json::array({h.xx, h.xy, h.yy}); }

cplx parse_point_flag(const std::string& text, const std::string& flag) {
    std::istringstream in(text);
    double re = 0.0;
    double im = 0.0;
    char comma = 0;
    if (!(in >> re >> comma >> im) || comma != ',' || !(in >> std::ws).eof()) {
        throw tg::ConfigError(flag + ": expected re,im but got '" + text + "'");
    }
    return {re, im};
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw tg::ConfigError("cannot write " + path.string());
    f << content;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

class Session {
public:
    Session(const Globals& g, std::ostream& out) : g_(g), out_(out) {}

    // Result record: printed, and written to <out>/<name>.json when --out is set.
    void emit(const std::string& command, const json& input, const json& outputs, const std::string& name) {
        json record;
        record["command"] = command;
        record["input"] = input;
        record["input_digest"] = sha256_hex(input.dump());
        record["tool_version"] = tg::tool_version;
        record["timestamp"] = utc_timestamp();
        record["outputs"] = outputs;
        const std::string text = record.dump(2) + "\n";
        out_ << text;
        if (!g_.out_dir.empty()) write_file(fs::path(g_.out_dir) / (name + ".json"), text);
    }

    // A CSV table goes to <out>/<name>.csv with --out and to the output stream otherwise.
    std::string table(const std::string& name, const std::string& csv) {
        if (g_.out_dir.empty()) {
            out_ << csv;
            return "";
        }
        const fs::path path = fs::path(g_.out_dir) / (name + ".csv");
        write_file(path, csv);
        return path.string();
    }

    const Globals& globals() const { return g_; }

private:
    const Globals& g_;
    std::ostream& out_;
};

tg::SingularQuadratureSettings quadrature_from(const std::string& path) {
    if (path.empty()) return {};
    return parse_quadrature(load_json(path), "");
}

json census_json(const tg::CriticalCensus& c, const tg::LatticeBasis& basis) {
    json pts = json::array();
    for (const tg::CriticalPoint& p : c.points) {
        pts.push_back({{"point", to_json(p.point.z)},
                       {"kind", tg::to_string(p.kind)},
                       {"morse", tg::to_string(p.morse)},
                       {"gradient_norm", p.gradient_norm},
                       {"hessian", to_json(p.hessian)},
                       {"four_torsion", tg::is_four_torsion(p.point.z, basis, 10.0 * basis.point_tolerance())}});
    }
    json out{{"count", c.count}, {"points", pts}};
    out["extra"] = c.extra() ? to_json(c.extra()->point.z) : json(nullptr);
    out["diagnostics"] = {{"seeds", c.seeds},
                          {"accepted", c.accepted},
                          {"left_cell", c.left_cell},
                          {"not_converged", c.not_converged},
                          {"winding", {{"grid_n", c.oracle.grid_n},
                                       {"nonzero_cells", c.oracle.nonzero_cells},
                                       {"index_sum", c.oracle.index_sum}}}};
    return out;
}

json report_json(const tg::AdmissibilityReport& rep) {
    json d = json::array();
    for (const auto& v : rep.d_values) {
        d.push_back({{"label", v.label}, {"point", to_json(v.point)}, {"value", v.value}, {"error", v.error}});
    }
    json cond2 = json::array();
    for (std::size_t j = 0; j < rep.cond2.size(); ++j) {
        cond2.push_back({{"j", j}, {"grad_g1", to_json(rep.cond2[j][0])}, {"grad_g2", to_json(rep.cond2[j][1])}});
    }
    json out{{"census_count", rep.census_count},
             {"d_values", d},
             {"cond1", rep.cond1},
             {"cond2", cond2},
             {"cond2_max", rep.cond2_max},
             {"tolerance", tg::condition_tolerance}};
    out["d2"] = rep.d2 ? json{{"value", rep.d2->value}, {"error", rep.d2->error}} : json(nullptr);
    out["cond3_sign"] = rep.cond3_sign ? json(tg::to_string(*rep.cond3_sign)) : json(nullptr);
    out["pass"] = {{"cond1", rep.cond1_pass}, {"cond2", rep.cond2_pass}, {"cond3", rep.cond3_pass},
                   {"verdict", rep.verdict_pass}};
    out["warnings"] = rep.warnings;
    return out;
}

json mass_json(const tg::MassPair& m) {
    return {{"M1", m.m1},
            {"M2", m.m2},
            {"I1", m.i1},
            {"I2", m.i2},
            {"identity_residual", m.identity_residual()},
            {"flux_integral_gap", m.flux_integral_gap},
            {"mass_defect_residuals", tg::mass_defect_identity(m.m1, m.m2)}};
}

// Rows in parallel with serial kernels inside; the table is assembled in row order.
template <class Row>
std::vector<std::string> parallel_rows(std::size_t n, Row&& row) {
    return tg::map_indices<std::string>(tg::Exec::parallel, n, row);
}

std::string csv_escape(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += (c == '\n' ? ' ' : c);
    }
    return out + "\"";
}

std::string census_sweep_csv(const TauPathSpec& spec) {
    std::string csv = "tau_re,tau_im,count,extra_re,extra_im,error\n";
    const auto rows = parallel_rows(spec.moduli.size(), [&](std::size_t n) {
        const cplx tau = spec.moduli[n];
        std::string line = fmt(tau.real()) + "," + fmt(tau.imag()) + ",";
        try {
            const tg::GreenFunction green{tg::LatticeBasis(1.0, tau)};
            tg::CensusOptions o;
            o.grid_n = spec.grid;
            o.exec = tg::Exec::serial;
            const tg::CriticalCensus c = tg::find_critical_points(green, o);
            line += std::to_string(c.count) + ",";
            if (const tg::CriticalPoint* e = c.extra()) {
                line += fmt(e->point.z.real()) + "," + fmt(e->point.z.imag()) + ",";
            } else {
                line += ",,";
            }
        } catch (const std::exception& e) {
            line += ",,," + csv_escape(e.what());
        }
        return line + "\n";
    });
    for (const std::string& r : rows) csv += r;
    return csv;
}

std::string sweep_csv(const SweepSpec& spec) {
    std::vector<std::string> header{"tau_re", "tau_im", "count"};
    if (spec.d_functional) {
        for (const char* name : {"d_half_period_1", "d_half_period_2", "d_half_period_3", "d_extra_1", "d_extra_2"}) {
            header.push_back(name);
            header.push_back(std::string(name) + "_error");
        }
    }
    for (std::size_t s = 0; s < spec.paired.size(); ++s) {
        const std::string p = "pair" + std::to_string(s + 1);
        for (const char* name : {"_candidates", "_d2_min", "_d2_min_error", "_verdict_fail_all", "_extra_excluded"}) {
            header.push_back(p + name);
        }
    }
    header.push_back("error");
    std::string csv;
    for (std::size_t n = 0; n < header.size(); ++n) csv += (n ? "," : "") + header[n];
    csv += "\n";

    tg::SingularQuadratureSettings q = spec.quadrature;
    q.exec = tg::Exec::serial;
    const auto rows = parallel_rows(spec.moduli.size(), [&](std::size_t n) {
        const cplx tau = spec.moduli[n];
        std::vector<std::string> cells{fmt(tau.real()), fmt(tau.imag())};
        std::string error;
        try {
            const tg::GreenFunction green{tg::LatticeBasis(1.0, tau)};
            tg::CensusOptions o;
            o.grid_n = spec.grid;
            o.exec = tg::Exec::serial;
            const tg::CriticalCensus c = tg::find_critical_points(green, o);
            cells.push_back(std::to_string(c.count));
            if (spec.d_functional) {
                std::vector<std::string> dcells(10);
                int hp = 0;
                int ex = 0;
                for (const tg::CriticalPoint& p : c.points) {
                    const tg::DFunctionalResult d = tg::d_functional(p.point.z, green, q);
                    const int slot = p.kind == tg::PointKind::half_period ? hp++ : 3 + ex++;
                    dcells[static_cast<std::size_t>(2 * slot)] = fmt(d.value);
                    dcells[static_cast<std::size_t>(2 * slot + 1)] = fmt(d.error);
                }
                cells.insert(cells.end(), dcells.begin(), dcells.end());
            }
            for (const PairedSetup& setup : spec.paired) {
                const tg::PairedVortexStudy st = tg::paired_vortex_study(green, setup.p1, setup.translate, q);
                double best = std::numeric_limits<double>::infinity();
                double best_err = 0.0;
                bool all_fail = true;
                for (const auto& cand : st.candidates) {
                    all_fail = all_fail && !cand.report.verdict_pass;
                    if (cand.report.d2 && cand.report.d2->value < best) {
                        best = cand.report.d2->value;
                        best_err = cand.report.d2->error;
                    }
                }
                cells.push_back(std::to_string(st.candidates.size()));
                cells.push_back(std::isfinite(best) ? fmt(best) : "");
                cells.push_back(std::isfinite(best) ? fmt(best_err) : "");
                cells.push_back(all_fail ? "true" : "false");
                cells.push_back(st.extra_pair_excluded ? "true" : "false");
            }
        } catch (const std::exception& e) {
            error = e.what();
        }
        cells.resize(header.size() - 1);
        std::string line;
        for (const std::string& cell : cells) line += cell + ",";
        return line + (error.empty() ? "" : csv_escape(error)) + "\n";
    });
    for (const std::string& r : rows) csv += r;
    return csv;
}

std::string kind_for(int code) { return code == 2 ? "config" : code == 3 ? "numerical" : "internal"; }

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const tg::ConfigError*>(&e) || dynamic_cast<const tg::InvalidBasis*>(&e)) return 2;
    if (dynamic_cast<const tg::InternalError*>(&e)) return 4;
    if (dynamic_cast<const tg::Error*>(&e)) return 3;
    return 4;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Green's function, critical points and blow-up admissibility on flat tori", "torusgreen"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--threads", g.threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", g.out_dir, "directory for JSON results and CSV tables");
    app.add_option("--cache", g.cache_dir, "directory of the per-basis constant cache");
    app.add_option("--seed", g.seed, "seed of Monte-Carlo checks");

    std::function<void(Session&)> action;

    // green eval
    auto* green = app.add_subcommand("green", "Green's function evaluation");
    green->require_subcommand(1);
    auto* green_eval = green->add_subcommand("eval", "value, gradient and Hessian at a point");
    std::string basis_path;
    std::string point_text;
    std::string backend = "theta";
    green_eval->add_option("--basis", basis_path, "basis JSON")->required();
    green_eval->add_option("--point", point_text, "re,im")->required();
    green_eval->add_option("--backend", backend)->check(CLI::IsMember({"theta", "ewald"}));
    green_eval->callback([&] {
        action = [&](Session& s) {
            const json raw = load_json(basis_path);
            const tg::LatticeBasis basis = parse_basis(raw, "");
            const cplx z = parse_point_flag(point_text, "--point");
            const tg::GreenFunction gf(basis);
            const tg::GreenEvaluation ev = gf.evaluate(z);
            const double value = backend == "ewald" ? gf.ewald_value(z) : ev.value;
            s.emit("green eval", {{"basis", raw}, {"point", to_json(z)}, {"backend", backend}},
                   {{"value", value},
                    {"gradient", to_json(ev.gradient)},
                    {"hessian", to_json(ev.hessian)},
                    {"derivative_backend", "theta"}},
                   "green_eval");
        };
    });

    // census, census sweep
    auto* census = app.add_subcommand("census", "critical points of G");
    int grid = 128;
    double tol = 1e-10;
    census->add_option("--basis", basis_path, "basis JSON");
    census->add_option("--grid", grid)->check(CLI::Range(8, 4096));
    census->add_option("--tol", tol)->check(CLI::PositiveNumber);
    auto* census_sweep = census->add_subcommand("sweep", "census along a modulus path (CSV)");
    std::string tau_path;
    census_sweep->add_option("--tau-path", tau_path, "modulus path JSON")->required();
    census_sweep->callback([&] {
        action = [&](Session& s) {
            const json raw = load_json(tau_path);
            const TauPathSpec spec = parse_tau_path(raw);
            const std::string path = s.table("census_sweep", census_sweep_csv(spec));
            if (!path.empty()) s.emit("census sweep", raw, {{"rows", spec.moduli.size()}, {"csv", path}}, "census_sweep");
        };
    });
    census->callback([&] {
        if (action) return;  // the sweep subcommand already chose
        if (basis_path.empty()) throw CLI::RequiredError("--basis");
        action = [&](Session& s) {
            const json raw = load_json(basis_path);
            const tg::LatticeBasis basis = parse_basis(raw, "");
            tg::CensusOptions o;
            o.grid_n = grid;
            o.newton_tol = tol;
            const tg::CriticalCensus c = tg::find_critical_points(tg::GreenFunction(basis), o);
            s.emit("census", {{"basis", raw}, {"grid", grid}, {"tol", tol}}, census_json(c, basis), "census");
        };
    });

    // dfunc
    auto* dfunc = app.add_subcommand("dfunc", "regularized functional D at a point");
    std::string quad_path;
    std::string rings_csv;
    std::size_t mc_samples = 0;
    dfunc->add_option("--basis", basis_path, "basis JSON")->required();
    dfunc->add_option("--point", point_text, "re,im")->required();
    dfunc->add_option("--quadrature", quad_path, "quadrature settings JSON");
    dfunc->add_option("--rings-csv", rings_csv, "write per-ring contributions to this CSV");
    dfunc->add_option("--monte-carlo", mc_samples, "also estimate the exterior integral with this many samples");
    dfunc->callback([&] {
        action = [&](Session& s) {
            const json raw = load_json(basis_path);
            const tg::LatticeBasis basis = parse_basis(raw, "");
            const cplx z = parse_point_flag(point_text, "--point");
            const tg::SingularQuadratureSettings q = quadrature_from(quad_path);
            const tg::GreenFunction gf(basis);
            const tg::DFunctionalResult d = tg::d_functional(z, gf, q);
            json outputs{{"value", d.value},
                         {"error", d.error},
                         {"bracket", d.bracket},
                         {"bracket_error", d.bracket_error},
                         {"exponent_gradient", d.exponent_gradient},
                         {"ball_radius", d.ball_radius},
                         {"warnings", d.warnings}};
            json input{{"basis", raw}, {"point", to_json(z)}};
            if (!quad_path.empty()) input["quadrature"] = load_json(quad_path);
            if (mc_samples > 0) {
                const tg::ExteriorIntegral ex = tg::exterior_integral(z, basis, q);
                const tg::MonteCarloEstimate mc =
                    tg::exterior_integral_monte_carlo(z, basis, mc_samples, s.globals().seed);
                outputs["exterior"] = {{"tail_route", ex.tail_route},
                                       {"complement_route", ex.complement_route},
                                       {"monte_carlo", mc.mean},
                                       {"monte_carlo_error", mc.standard_error}};
                input["monte_carlo"] = {{"samples", mc_samples}, {"seed", s.globals().seed}};
            }
            if (!rings_csv.empty()) {
                std::string csv = "r_inner,r_outer,value\n";
                for (const auto& r : d.rings) csv += fmt(r.r_inner) + "," + fmt(r.r_outer) + "," + fmt(r.value) + "\n";
                write_file(rings_csv, csv);
            }
            s.emit("dfunc", input, outputs, "dfunc");
        };
    });

    // d2func
    auto* d2func = app.add_subcommand("d2func", "regularized functional D^2 of a blow-up configuration");
    std::string config_path;
    bool literal = false;
    d2func->add_option("--config", config_path, "run configuration JSON")->required();
    d2func->add_flag("--literal-weights", literal, "divide by e^{u0(q_1)} for every j");
    d2func->callback([&] {
        action = [&](Session& s) {
            const json raw = load_json(config_path);
            RunConfig cfg = parse_run_config(raw, false);
            if (literal) cfg.weights = tg::WeightDenominator::first_point;
            const tg::D2Result r =
                tg::d2_functional(cfg.blowup, cfg.vortices, tg::GreenFunction(*cfg.basis), cfg.quadrature, cfg.weights);
            json terms = json::array();
            for (const tg::D2Term& t : r.terms) {
                terms.push_back({{"j", t.j}, {"component", t.component}, {"weight", t.weight},
                                 {"bracket", t.bracket}, {"error", t.error}});
            }
            s.emit("d2func", {{"config", raw}, {"literal_weights", literal}},
                   {{"value", r.value},
                    {"error", r.error},
                    {"weights", cfg.weights == tg::WeightDenominator::per_point ? "per_point" : "first_point"},
                    {"terms", terms},
                    {"warnings", r.warnings}},
                   "d2func");
        };
    });

    // verify
    auto* verify = app.add_subcommand("verify", "necessary conditions for a blow-up configuration");
    verify->add_option("--config", config_path, "run configuration JSON")->required();
    verify->callback([&] {
        action = [&](Session& s) {
            const json raw = load_json(config_path);
            const RunConfig cfg = parse_run_config(raw, true);
            const tg::GreenFunction gf(*cfg.basis);
            json outputs;
            if (cfg.paired) {
                const tg::PairedVortexStudy st =
                    tg::paired_vortex_study(gf, cfg.paired->p1, cfg.paired->translate, cfg.quadrature);
                json cands = json::array();
                for (const auto& c : st.candidates) {
                    cands.push_back({{"offset", to_json(c.offset)},
                                     {"q", to_json(c.q)},
                                     {"offset_is_extra", c.offset_is_extra},
                                     {"report", report_json(c.report)}});
                }
                outputs = {{"p1", to_json(st.p1)},
                           {"p2", to_json(st.p2)},
                           {"translate", st.translate},
                           {"census_count", st.census.count},
                           {"candidates", cands},
                           {"extra_four_torsion", st.extra_four_torsion},
                           {"extra_pair_excluded", st.extra_pair_excluded}};
            } else {
                outputs = report_json(tg::necessary_conditions_report(cfg.blowup, cfg.vortices, gf, cfg.quadrature));
            }
            s.emit("verify", raw, outputs, "verify");
        };
    });

    // liouville shoot, liouville equal-mass
    auto* liouville = app.add_subcommand("liouville", "radial Liouville system");
    liouville->require_subcommand(1);
    double c1 = 1.0, c2 = 1.0, a1 = 0.0, a2 = 0.0, rmax = 1e4;
    std::string profile_csv;
    auto* shoot = liouville->add_subcommand("shoot", "integrate from r = 0 and report masses");
    auto* equal = liouville->add_subcommand("equal-mass", "find a2 with M1 = M2");
    for (auto* sub : {shoot, equal}) {
        sub->add_option("--c1", c1)->required();
        sub->add_option("--c2", c2)->required();
        sub->add_option("--a1", a1)->required();
        sub->add_option("--rmax", rmax);
        sub->add_option("--profile-csv", profile_csv, "write the sampled profile to this CSV");
    }
    shoot->add_option("--a2", a2)->required();
    const auto dump_profile = [&](const tg::RadialProfile& p) {
        if (profile_csv.empty()) return;
        std::string csv = "r,v1,v2,dv1,dv2,mass1,mass2\n";
        for (std::size_t n = 0; n < p.size(); ++n) {
            csv += fmt(p.r[n]) + "," + fmt(p.v1[n]) + "," + fmt(p.v2[n]) + "," + fmt(p.dv1[n]) + "," +
                   fmt(p.dv2[n]) + "," + fmt(p.mass1[n]) + "," + fmt(p.mass2[n]) + "\n";
        }
        write_file(profile_csv, csv);
    };
    shoot->callback([&] {
        action = [&](Session& s) {
            tg::ShootOptions o;
            o.r_max = rmax;
            const tg::RadialProfile p = tg::shoot(c1, c2, a1, a2, o);
            dump_profile(p);
            if (!tg::finite_mass(p)) {
                throw tg::ResolutionError("not a finite-mass solution: one flux stays below 4 pi up to r_max");
            }
            s.emit("liouville shoot", {{"c1", c1}, {"c2", c2}, {"a1", a1}, {"a2", a2}, {"rmax", rmax}},
                   mass_json(tg::masses(p)), "liouville_shoot");
        };
    });
    equal->callback([&] {
        action = [&](Session& s) {
            tg::ShootOptions o;
            o.r_max = rmax;
            const tg::EqualMassSolution sol = tg::solve_equal_masses(c1, c2, a1, o);
            dump_profile(sol.profile);
            json outputs = mass_json(sol.masses);
            outputs["a2"] = sol.a2;
            outputs["bracket"] = sol.bracket;
            outputs["shots"] = sol.shots;
            s.emit("liouville equal-mass", {{"c1", c1}, {"c2", c2}, {"a1", a1}, {"rmax", rmax}}, outputs,
                   "liouville_equal_mass");
        };
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "census, D and paired-vortex D^2 along a modulus path (CSV)");
    std::string spec_path;
    sweep->add_option("--spec", spec_path, "sweep specification JSON")->required();
    sweep->callback([&] {
        action = [&](Session& s) {
            const json raw = load_json(spec_path);
            const SweepSpec spec = parse_sweep(raw);
            const std::string path = s.table("sweep", sweep_csv(spec));
            if (!path.empty()) s.emit("sweep", raw, {{"rows", spec.moduli.size()}, {"csv", path}}, "sweep");
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error [config]: " << e.what() << "\n";
        return 2;
    }

    try {
        if (g.threads > 0) tg::set_num_threads(g.threads);
        const fs::path cache_file = fs::path(g.cache_dir) / "constants.json";
        tg::ConstantCache& cache = tg::ConstantCache::global();
        if (fs::exists(cache_file)) cache.load(cache_file);
        Session session(g, out);
        action(session);
        fs::create_directories(g.cache_dir);
        cache.save(cache_file);
        return 0;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        err << "error [" << kind_for(code) << "]: " << e.what() << "\n";
        return code;
    }
}

}  // namespace tgcli
