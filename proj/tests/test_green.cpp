#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "oracle.hpp"
#include "tg/error.hpp"
#include "tg/green.hpp"

using tg::cplx;
using tg::GreenFunction;
using tg::LatticeBasis;

namespace {

constexpr double pi_ = 3.14159265358979323846;

std::vector<LatticeBasis> test_tori() {
    return {
        LatticeBasis(1.0, cplx(0, 1)),
        LatticeBasis(1.0, cplx(0.5, std::sqrt(3.0) / 2.0)),
        LatticeBasis(1.0, cplx(0.3, 0.7)),
        LatticeBasis(cplx(0.8, 0.3), cplx(-0.2, 1.5)),
        LatticeBasis(1.0, cplx(2.4, 1.1)),  // far from reduced
    };
}

double fd_laplacian(const GreenFunction& g, cplx x, double h) {
    return (g.value(x + h) + g.value(x - h) + g.value(x + cplx(0, h)) + g.value(x - cplx(0, h)) - 4.0 * g.value(x)) /
           (h * h);
}

}  // namespace

TEST_SUITE("green") {

TEST_CASE("theta backend agrees with an independent Ewald sum") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const LatticeBasis& b : test_tori()) {
        GreenFunction g(b);
        oracle::EwaldGreen ref(b.omega1(), b.omega2());
        for (int n = 0; n < 40; ++n) {
            const cplx x = b.from_fractional(u(rng), u(rng));
            if (tg::torus_distance(x, 0.0, b) < 1e-2) continue;
            CHECK(std::abs(g.value(x) - ref(x)) < 1e-11);
            CHECK(std::abs(g.value(x) - g.value(x, tg::Backend::ewald)) < 1e-10);
        }
        CHECK(std::abs(g.robin() - ref.robin()) < 1e-9);
    }
}

TEST_CASE("square torus value at the centre") {
    GreenFunction g(LatticeBasis(1.0, cplx(0, 1)));
    oracle::EwaldGreen ref(1.0, cplx(0, 1));
    const double v = g.value(cplx(0.5, 0.5));
    CHECK(std::abs(v - ref(cplx(0.5, 0.5))) < 1e-12);
    CHECK(v < g.value(cplx(0.5, 0.0)));
}

TEST_CASE("evenness and periodicity") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_int_distribution<int> k(-5, 5);
    for (const LatticeBasis& b : test_tori()) {
        GreenFunction g(b);
        for (int n = 0; n < 50; ++n) {
            const cplx x(u(rng), u(rng));
            if (tg::torus_distance(x, 0.0, b) < 1e-2) continue;
            const double v = g.value(x);
            CHECK(std::abs(g.value(-x) - v) < 1e-12);
            const cplx shifted = x + static_cast<double>(k(rng)) * b.omega1() + static_cast<double>(k(rng)) * b.omega2();
            CHECK(std::abs(g.value(shifted) - v) < 1e-11);
        }
    }
}

TEST_CASE("gradient and Hessian match finite differences") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-5;
    for (const LatticeBasis& b : test_tori()) {
        GreenFunction g(b);
        for (int n = 0; n < 30; ++n) {
            const cplx x = b.from_fractional(u(rng), u(rng));
            if (tg::torus_distance(x, 0.0, b) < 0.1) continue;
            const auto e = g.evaluate(x);
            const double gx = (g.value(x + h) - g.value(x - h)) / (2 * h);
            const double gy = (g.value(x + cplx(0, h)) - g.value(x - cplx(0, h))) / (2 * h);
            CHECK(std::abs(e.gradient.x - gx) < 1e-6);
            CHECK(std::abs(e.gradient.y - gy) < 1e-6);
            const auto gp = g.gradient(x + h);
            const auto gm = g.gradient(x - h);
            CHECK(std::abs(e.hessian.xx - (gp.x - gm.x) / (2 * h)) < 1e-5);
            CHECK(std::abs(e.hessian.xy - (gp.y - gm.y) / (2 * h)) < 1e-5);
            CHECK(e.hessian.trace() == doctest::Approx(1.0 / b.area()).epsilon(1e-10));
            CHECK(fd_laplacian(g, x, 1e-4) == doctest::Approx(1.0 / b.area()).epsilon(1e-5));
        }
    }
}

TEST_CASE("gradient vanishes at the half periods") {
    for (const LatticeBasis& b : test_tori()) {
        GreenFunction g(b);
        for (const auto& hp : tg::half_periods(b)) CHECK(g.gradient(hp.z).norm() < 1e-12);
    }
}

TEST_CASE("zero mean over the cell") {
    for (const LatticeBasis& b : {LatticeBasis(1.0, cplx(0, 1)), LatticeBasis(1.0, cplx(0.5, 0.9))}) {
        GreenFunction g(b);
        // midpoint rule; the log singularity costs O(h^2 ln h) around the node-free pole
        const int n = 256;
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += g.value(b.from_fractional((i + 0.5) / n, (j + 0.5) / n));
        CHECK(std::abs(s / (n * n)) < 1e-4);
    }
}

TEST_CASE("matched constant equals the Kronecker limit value") {
    // c = ln|eta(tau')| / 2 pi for the zero-mean normalization, eta from its product
    for (const LatticeBasis& b : test_tori()) {
        const cplx tau = b.reduced_tau();
        const cplx q = std::exp(cplx(0, pi_) * tau);
        double log_eta = (cplx(0, pi_) * tau / 12.0).real();
        cplx q2n = 1.0;
        for (int n = 1; n < 200; ++n) {
            q2n *= q * q;
            log_eta += std::log(std::abs(1.0 - q2n));
        }
        CHECK(std::abs(GreenFunction(b).normalization() - log_eta / (2 * pi_)) < 1e-13);
    }
}

TEST_CASE("regular part is smooth through the pole") {
    GreenFunction g(LatticeBasis(1.0, cplx(0.3, 0.7)));
    CHECK(std::abs(g.regular(cplx(1e-7, 2e-7)) - g.robin()) < 1e-10);
    CHECK(g.regular_gradient(0.0).norm() < 1e-12);
    CHECK_THROWS_AS(g.value(0.0), tg::SingularityError);
    CHECK_THROWS_AS(g.value(g.basis().omega1() + 1e-14), tg::SingularityError);
}

TEST_CASE("free functions agree with the class") {
    const LatticeBasis b(1.0, cplx(0.2, 1.3));
    GreenFunction g(b);
    const tg::TorusPoint x{cplx(0.4, 0.3)};
    CHECK(tg::green_value(x, b) == g.value(x.z));
    CHECK(tg::green_gradient(x, b).x == g.gradient(x.z).x);
    CHECK(tg::green_hessian(x, b).xy == g.hessian(x.z).xy);
    CHECK(std::abs(tg::ewald_green_value(x, b) - g.value(x.z)) < 1e-10);
    CHECK(tg::regular_part_gamma(x, tg::TorusPoint{cplx(0.1, 0.1)}, b) == g.regular(x.z - cplx(0.1, 0.1)));
}

TEST_CASE("constant cache") {
    tg::ConstantCache cache;
    const LatticeBasis b(1.0, cplx(0.1, 1.2));
    std::vector<std::thread> pool;
    std::vector<double> values(8);
    for (int t = 0; t < 8; ++t) pool.emplace_back([&, t] { values[t] = GreenFunction(b, cache).value(cplx(0.3, 0.4)); });
    for (auto& th : pool) th.join();
    CHECK(cache.size() == 1);
    for (double v : values) CHECK(v == values[0]);

    const auto fresh = GreenFunction::compute_constants(b);
    CHECK(cache.find(b)->robin == fresh.robin);

    const auto dir = std::filesystem::temp_directory_path() / "tg_cache_test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "constants.json";
    cache.save(file);
    tg::ConstantCache loaded;
    loaded.load(file);
    REQUIRE(loaded.find(b).has_value());
    CHECK(loaded.find(b)->normalization == fresh.normalization);

    nlohmann::json doc;
    {
        std::ifstream in(file);
        in >> doc;
    }
    doc["version"] = "0.0.0";
    {
        std::ofstream out(file);
        out << doc;
    }
    tg::ConstantCache stale;
    stale.load(file);
    CHECK(stale.size() == 0);
    std::filesystem::remove_all(dir);
}

}
