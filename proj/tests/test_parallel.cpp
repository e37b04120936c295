#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "tg/parallel.hpp"

TEST_SUITE("parallel") {

TEST_CASE("pairwise sum") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(10007);
    for (double& x : v) x = u(rng);
    const double s = tg::pairwise_sum(v);
    CHECK(s == tg::pairwise_sum(v));
    CHECK(s == doctest::Approx(std::accumulate(v.begin(), v.end(), 0.0)).epsilon(1e-12));
    CHECK(tg::pairwise_sum(std::vector<double>{}) == 0.0);
    CHECK(tg::pairwise_sum(std::vector<double>{2.5}) == 2.5);
}

TEST_CASE("the lowest failing index is reported") {
    for (tg::Exec exec : {tg::Exec::serial, tg::Exec::parallel}) {
        try {
            tg::for_each_index(exec, 100, [](std::size_t i) {
                if (i % 7 == 3) throw std::runtime_error(std::to_string(i));
            });
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "3");
        }
    }
}

TEST_CASE("map preserves index order") {
    const auto f = [](std::size_t i) { return std::sin(static_cast<double>(i)) * 1e3; };
    const auto a = tg::map_indices<double>(tg::Exec::serial, 5000, f);
    const auto b = tg::map_indices<double>(tg::Exec::parallel, 5000, f);
    CHECK(a == b);
}

}
