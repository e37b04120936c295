// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "tg/admissibility.hpp"
#include "tg/liouville.hpp"

using tg::cplx;
using tg::GreenFunction;
using tg::LatticeBasis;

namespace {

constexpr double pi = std::numbers::pi;
const std::string source_dir = TG_SOURCE_DIR;

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<tg::TorusPoint> pts(std::initializer_list<cplx> zs) {
    std::vector<tg::TorusPoint> out;
    for (cplx z : zs) out.push_back({z});
    return out;
}

const std::vector<LatticeBasis>& five_tori() {
    static const std::vector<LatticeBasis> tori{
        LatticeBasis(1.0, cplx(0, 1)),     LatticeBasis(1.0, cplx(0, 2)),   LatticeBasis(1.0, cplx(0, 0.6)),
        LatticeBasis(1.0, cplx(0.5, 0.9)), LatticeBasis(1.0, cplx(0.5, 0.3)),
    };
    return tori;
}

Verdict backend_agreement() {
    double worst = 0.0;
    for (const LatticeBasis& b : five_tori()) {
        GreenFunction g(b);
        for (int i = 0; i < 32; ++i) {
            for (int j = 0; j < 32; ++j) {
                const cplx x = b.from_fractional(i / 32.0, j / 32.0);
                if (tg::torus_distance(x, 0.0, b) < 1e-3) continue;
                worst = std::max(worst, std::abs(g.value(x) - g.value(x, tg::Backend::ewald)));
            }
        }
    }
    return {worst < 1e-10, fmt("max |theta - ewald| = %.2e on 32x32 grids over 5 tori (tol 1e-10)", worst)};
}

Verdict laplacian() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-3;
    double worst = 0.0;
    for (const LatticeBasis& b : five_tori()) {
        GreenFunction g(b);
        for (int n = 0; n < 100;) {
            const cplx x = b.from_fractional(u(rng), u(rng));
            if (tg::torus_distance(x, 0.0, b) < 0.1) continue;
            ++n;
            // fourth-order central differences along both axes
            double lap = -60.0 * g.value(x);
            for (cplx e : {cplx(h, 0), cplx(0, h)}) {
                lap += 16.0 * (g.value(x + e) + g.value(x - e)) - (g.value(x + 2.0 * e) + g.value(x - 2.0 * e));
            }
            lap /= 12.0 * h * h;
            worst = std::max(worst, std::abs(lap - 1.0 / b.area()));
        }
    }
    return {worst < 1e-5, fmt("max |FD Laplacian - 1/|Omega|| = %.2e at 500 points, fourth-order stencil, h = 1e-3 (tol 1e-5)", worst)};
}

std::vector<double> rhombic_heights() {
    std::vector<double> b;
    for (int n = 0; n < 40; ++n) b.push_back(0.05 + 0.95 * n / 39.0);
    return b;
}

tg::CriticalCensus census_at(const LatticeBasis& basis, int grid) {
    tg::CensusOptions o;
    o.grid_n = grid;
    return tg::find_critical_points(GreenFunction(basis), o);
}

Verdict census_counts() {
    bool ok = true;
    std::string bad;
    for (cplx tau : {cplx(0, 1), cplx(0, 2), cplx(0, 0.6)}) {
        const LatticeBasis b(1.0, tau);
        const auto c = census_at(b, 128);
        bool halves = c.count == 3;
        for (const auto& hp : tg::half_periods(b)) {
            bool found = false;
            for (const auto& p : c.points) found = found || tg::same_point(p.point.z, hp.z, b);
            halves = halves && found;
        }
        if (!halves) {
            ok = false;
            bad += fmt(" tau=%gi:%d", tau.imag(), c.count);
        }
    }
    int threes = 0, fives = 0, unstable = 0, other = 0;
    for (double h : rhombic_heights()) {
        const LatticeBasis b(1.0, cplx(0.5, h));
        int n128 = -1, n256 = -1;
        try {
            n128 = census_at(b, 128).count;
            n256 = census_at(b, 256).count;
        } catch (const std::exception& e) {
            bad += fmt(" b=%.3f:%s", h, e.what());
        }
        if (n128 != n256) ++unstable;
        if (n128 == 3) ++threes;
        else if (n128 == 5) ++fives;
        else ++other;
    }
    ok = ok && threes > 0 && fives > 0 && unstable == 0 && other == 0;
    return {ok, fmt("rectangular/square counts 3; rhombic sweep: %d three-counts, %d five-counts, %d other, "
                    "%d changed under grid doubling%s",
                    threes, fives, other, unstable, bad.c_str())};
}

Verdict d_signs() {
    int tori = 0, bad = 0;
    double worst_ratio = 0.0;
    std::string notes;
    for (double h : rhombic_heights()) {
        const GreenFunction g(LatticeBasis(1.0, cplx(0.5, h)));
        tg::CensusOptions o;
        const auto c = tg::find_critical_points(g, o);
        if (c.count != 5) continue;
        ++tori;
        double max_hp = 0.0;
        bool hp_positive = true;
        std::vector<tg::DFunctionalResult> extras;
        for (const auto& p : c.points) {
            const auto d = tg::d_functional(p.point.z, g);
            if (p.kind == tg::PointKind::half_period) {
                hp_positive = hp_positive && d.value > 0.0;
                max_hp = std::max(max_hp, d.value);
            } else {
                extras.push_back(d);
            }
        }
        bool extra_ok = true;
        for (const auto& d : extras) {
            const double bound = std::max(1e-3 * max_hp, 3.0 * d.error);
            extra_ok = extra_ok && std::abs(d.value) < bound;
            worst_ratio = std::max(worst_ratio, std::abs(d.value) / bound);
        }
        if (!hp_positive || !extra_ok) {
            ++bad;
            notes += fmt(" b=%.3f", h);
        }
    }
    return {tori > 0 && bad == 0,
            fmt("%d five-count tori: D(half periods) > 0 and |D(extra)| within bound on all but %d "
                "(largest |D(extra)|/bound = %.2f)%s",
                tori, bad, worst_ratio, notes.c_str())};
}

Verdict paired_study() {
    const std::vector<cplx> taus{cplx(0, 1), cplx(0, 2), cplx(0.5, std::sqrt(3.0) / 2), cplx(0.5, 0.9), cplx(0.5, 0.15)};
    int studies = 0, candidates = 0, failures = 0;
    double worst_cond2 = 0.0, min_d2 = std::numeric_limits<double>::infinity();
    std::string notes;
    for (cplx tau : taus) {
        const GreenFunction g(LatticeBasis(1.0, tau));
        for (int k = 1; k <= 3; ++k) {
            const auto st = tg::paired_vortex_study(g, cplx(0.0, 0.0), k);
            ++studies;
            bool ok = st.extra_pair_excluded;
            for (bool ft : st.extra_four_torsion) ok = ok && !ft;
            for (const auto& cand : st.candidates) {
                ++candidates;
                worst_cond2 = std::max(worst_cond2, cand.report.cond2_max);
                const bool d2_pos = cand.report.d2 && cand.report.d2->value > 0.0 &&
                                    cand.report.cond3_sign == tg::SignBand::positive;
                if (cand.report.d2) min_d2 = std::min(min_d2, cand.report.d2->value);
                ok = ok && cand.report.cond2_max < 1e-8 && d2_pos && !cand.report.verdict_pass;
            }
            if (st.candidates.empty()) ok = false;
            if (!ok) {
                ++failures;
                notes += fmt(" tau=%g%+gi,k=%d", tau.real(), tau.imag(), k);
            }
        }
    }
    return {failures == 0, fmt("%d studies, %d candidates: max cond2 = %.1e (tol 1e-8), min D2 = %.3e, all verdicts "
                               "fail, no extra-pair or four-torsion candidates; %d failing studies%s",
                               studies, candidates, worst_cond2, min_d2, failures, notes.c_str())};
}

tg::PartitionSpec two_cells(double cut) {
    tg::PartitionSpec p;
    p.delta = 0.1;
    p.cells.push_back({{{0.0, cut, 0.0, 1.0}, {cut + 0.5, 1.0, 0.0, 1.0}}, 0});
    p.cells.push_back({{{cut, cut + 0.5, 0.0, 1.0}}, 1});
    return p;
}

Verdict d2_consistency() {
    const std::vector<cplx> taus{cplx(0, 1), cplx(0, 2), cplx(0.5, std::sqrt(3.0) / 2), cplx(0.5, 0.9), cplx(0.2, 1.3)};
    const std::vector<std::array<int, 2>> pairs{{0, 1}, {2, 0}};
    int agree = 0, total = 0;
    double worst = 0.0;
    const cplx anchor(0.137, 0.071);
    for (cplx tau : taus) {
        const LatticeBasis b(1.0, tau);
        const GreenFunction g(b);
        const auto hp = tg::half_periods(b);
        for (const auto& [a, c] : pairs) {
            const cplx p1 = anchor;
            const cplx q = p1 + hp[a].z;
            const cplx p2 = q - hp[c].z;
            const tg::VortexConfig v{pts({p1, p1}), pts({p2, p2})};
            const tg::BlowupConfig bu{pts({q}), {}, tg::PartitionSpec::whole_torus(0.1)};
            const auto general = tg::d2_functional(bu, v, g);
            const auto closed = tg::d2_two_vortex_closed(q, p1, p2, g);
            const double diff = std::abs(general.value - closed.value);
            const double tol = general.error + closed.error;
            worst = std::max(worst, diff / std::max(tol, 1e-300));
            ++total;
            if (diff <= tol) ++agree;
        }
    }
    const GreenFunction g(LatticeBasis(1.0, cplx(0.5, 0.9)));
    const tg::VortexConfig v{pts({0.0, 0.0, 0.5, 0.5}), pts({0.0, 0.0, 0.5, 0.5})};
    tg::BlowupConfig bu{pts({cplx(0.25, 0.45), cplx(0.75, 0.45)}), {}, two_cells(0.25)};
    const auto first = tg::d2_functional(bu, v, g);
    bu.partition = two_cells(0.32);
    const auto second = tg::d2_functional(bu, v, g);
    const double pdiff = std::abs(first.value - second.value);
    const bool part_ok = pdiff <= first.error + second.error;
    return {agree == total && part_ok,
            fmt("k=1: %d/%d configurations agree (largest diff/combined error = %.2f); k=2 partitions: %.12f vs %.12f, "
                "diff %.1e, combined error %.1e",
                agree, total, worst, first.value, second.value, pdiff, first.error + second.error)};
}

Verdict liouville_masses() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> cdist(0.1, 10.0), adist(-3.0, 1.0);
    std::vector<tg::ShotParameters> shots;
    int rejected = 0;
    while (shots.size() < 50) {
        const tg::ShotParameters s{cdist(rng), cdist(rng), adist(rng), adist(rng)};
        if (tg::finite_mass(tg::shoot(s.c1, s.c2, s.a1, s.a2))) {
            shots.push_back(s);
        } else {
            ++rejected;
        }
    }
    const auto m = tg::shoot_masses(shots);
    double worst = 0.0;
    for (const auto& pair : m) worst = std::max(worst, std::abs(pair.identity_residual()));

    const auto p = tg::shoot(1.0, 1.0, 0.0, 0.0);
    double sup = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double exact = -2.0 * std::log1p(p.r[i] * p.r[i] / 8.0);
        sup = std::max({sup, std::abs(p.v1[i] - exact), std::abs(p.v2[i] - exact)});
    }
    const auto sym = tg::masses(p);
    const double mass_err = std::max(std::abs(sym.m1 - 8 * pi), std::abs(sym.m2 - 8 * pi));
    return {worst < 1e-7 && sup < 1e-8 && mass_err < 1e-6,
            fmt("50 finite-mass shots (%d infinite-mass draws rejected): max |1/M1 + 1/M2 - 1/4pi| = %.1e (tol 1e-7); "
                "symmetric shot sup error %.1e (tol 1e-8), |M - 8pi| = %.1e (tol 1e-6)",
                rejected, worst, sup, mass_err)};
}

Verdict pohozaev() {
    struct Setup {
        LatticeBasis basis;
        tg::VortexConfig vortices;
        std::vector<tg::TorusPoint> q;
    };
    const std::vector<Setup> setups{
        {LatticeBasis(1.0, cplx(0, 1)), {pts({0.0, 0.0}), pts({cplx(0.5, 0.5), cplx(0.5, 0.5)})}, pts({cplx(0, 0.5)})},
        {LatticeBasis(1.0, cplx(0.5, 0.9)), {pts({0.0, 0.0}), pts({0.5, 0.5})}, pts({cplx(0.25, 0.45)})},
        {LatticeBasis(1.0, cplx(0.5, 0.9)),
         {pts({0.0, 0.0, 0.5, 0.5}), pts({0.0, 0.0, 0.5, 0.5})},
         pts({cplx(0.25, 0.45), cplx(0.75, 0.45)})},
        {LatticeBasis(1.0, cplx(0.2, 1.3)), {pts({0.1, 0.1}), pts({cplx(0.5, -0.65), cplx(0.5, -0.65)})}, pts({cplx(0.6, 0.0)})},
    };
    const std::array<double, 2> m8{8 * pi, 8 * pi};
    double at_critical = 0.0, perturbed_min = std::numeric_limits<double>::infinity(), gradient = 0.0;
    for (const Setup& s : setups) {
        const GreenFunction g(s.basis);
        const std::vector<std::array<double, 2>> masses(s.q.size(), m8);
        for (std::size_t j = 0; j < s.q.size(); ++j) {
            gradient = std::max(gradient, (tg::interaction_energy_gradient(1, j, s.q, s.vortices, g) +
                                           tg::interaction_energy_gradient(2, j, s.q, s.vortices, g)).norm());
        }
        for (const auto& r : tg::pohozaev_residual(s.q, masses, s.vortices, g)) at_critical = std::max(at_critical, r.norm());
        for (cplx d : {cplx(1e-3, 0), cplx(0, 1e-3), cplx(-1e-3, 0), cplx(0, -1e-3)}) {
            auto q = s.q;
            q[0].z += d;
            double largest = 0.0;
            for (const auto& r : tg::pohozaev_residual(q, masses, s.vortices, g)) largest = std::max(largest, r.norm());
            perturbed_min = std::min(perturbed_min, largest);
        }
    }
    return {gradient < 1e-8 && at_critical < 1e-8 && perturbed_min > 1e-4,
            fmt("4 critical configurations (|grad(G1*+G2*)| <= %.1e): residual <= %.1e (tol 1e-8); "
                "1e-3 perturbations: residual >= %.2e (need > 1e-4)",
                gradient, at_critical, perturbed_min)};
}

Verdict kernels() {
    double worst = 0.0;
    for (const tg::ShotParameters& s : {tg::ShotParameters{1.0, 1.0, 0.0, 0.0}, tg::ShotParameters{2.0, 1.0, 0.0, std::log(2.0)},
                                        tg::ShotParameters{1.7, 0.8, -0.3, 0.2}, tg::ShotParameters{0.5, 3.0, 0.4, -1.2}}) {
        worst = std::max(worst, tg::linearized_kernel_residual(tg::shoot(s.c1, s.c2, s.a1, s.a2), 1e-3));
    }
    return {worst < 1e-5, fmt("max residual of translation and scaling modes = %.1e at h = 1e-3 (tol 1e-5)", worst)};
}

std::string run_cli(const std::vector<std::string>& args, int& code) {
    std::vector<const char*> argv{"torusgreen"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    code = tgcli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return out.str();
}

Verdict determinism() {
    const std::string cache = (std::filesystem::temp_directory_path() / "tg_acceptance_cache").string();
    int c1 = 0, c8 = 0, t1 = 0, t8 = 0;
    const auto spec = source_dir + "/configs/sweep_small.json";
    const auto path = source_dir + "/configs/tau_path.json";
    const std::string s1 = run_cli({"--threads", "1", "--cache", cache, "sweep", "--spec", spec}, c1);
    const std::string s8 = run_cli({"--threads", "8", "--cache", cache, "sweep", "--spec", spec}, c8);
    const std::string p1 = run_cli({"--threads", "1", "--cache", cache, "census", "sweep", "--tau-path", path}, t1);
    const std::string p8 = run_cli({"--threads", "8", "--cache", cache, "census", "sweep", "--tau-path", path}, t8);
    std::filesystem::remove_all(cache);
    const bool ok = c1 == 0 && c8 == 0 && t1 == 0 && t8 == 0 && s1 == s8 && p1 == p8 && !s1.empty();
    return {ok, fmt("sweep CSV %zu bytes %s, census sweep CSV %zu bytes %s across --threads 1 and 8", s1.size(),
                    s1 == s8 ? "identical" : "DIFFERENT", p1.size(), p1 == p8 ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Verdict()> check;
        double time_limit;  // seconds, 0: none
    };
    const std::vector<Criterion> criteria{
        {1, "theta and Ewald backends agree", backend_agreement, 30.0},
        {2, "Laplacian of G is 1/|Omega|", laplacian, 0.0},
        {3, "critical point census", census_counts, 300.0},
        {4, "signs of D on five-point tori", d_signs, 600.0},
        {5, "paired half-period vortices are rejected", paired_study, 0.0},
        {6, "D^2 evaluators agree", d2_consistency, 0.0},
        {7, "Liouville masses on the hyperbola", liouville_masses, 120.0},
        {8, "location identity", pohozaev, 0.0},
        {9, "linearized kernel", kernels, 0.0},
        {10, "sweep determinism across thread counts", determinism, 0.0},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt("%.1f s", seconds);
        if (c.time_limit > 0.0) {
            timing += fmt(" (limit %.0f s)", c.time_limit);
            if (seconds > c.time_limit) {
                v.pass = false;
                timing += " over limit";
            }
        }
        failed += v.pass ? 0 : 1;
        std::printf("criterion %2d %s  %s: %s; %s\n", c.id, v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
