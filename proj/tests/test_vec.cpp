#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "shiftsim/vec.hpp"

using namespace shiftsim;

TEST_CASE("dot, norm, cosine basics") {
    const std::vector<double> a{1, 2, 3}, b{4, -5, 6};
    CHECK(dot(a, b) == doctest::Approx(12.0));
    CHECK(norm(a) == doctest::Approx(std::sqrt(14.0)));
    const std::vector<double> e1{1, 0}, e2{0, 1};
    CHECK(cosine(e1, e2) == 0.0);
    CHECK(cosine(e1, e1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(dot(a, e1), std::invalid_argument);
    const std::vector<double> zero{0, 0};
    CHECK_THROWS_AS(cosine(e1, zero), std::domain_error);
}

TEST_CASE("pairwise_sum equals the naive sum") {
    std::vector<double> xs;
    for (int i = 0; i < 1000; ++i) xs.push_back(std::sin(i) * 1e3);
    double naive = 0;
    for (double v : xs) naive += v;
    CHECK(pairwise_sum(xs) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("spread basis is orthonormal") {
    for (std::size_t d : {2, 5, 64, 1001}) {
        const auto b1 = unit_spread(d);
        const auto b2 = unit_spread_partner(d);
        CHECK(norm(b1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(norm(b2) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::fabs(dot(b1, b2)) < 1e-12);
    }
}

TEST_CASE("rotate_in_plane hits the requested cosine") {
    const std::size_t d = 128;
    const auto b1 = unit_spread(d);
    const auto b2 = unit_spread_partner(d);
    const double rad = 60.0 * 3.14159265358979323846 / 180.0;
    const auto v = rotate_in_plane(b1, b2, rad);
    CHECK(cosine(v, b1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unit_axis bounds") {
    CHECK(unit_axis(3, 2)[2] == 1.0);
    CHECK_THROWS_AS(unit_axis(3, 3), std::invalid_argument);
}
