#include <doctest.h>

#include <cmath>

#include "shiftsim/normal.hpp"
#include "support/normal_oracle.hpp"

using shiftsim::clamp_accuracy;
using shiftsim::phi;
using shiftsim::probit;
using shiftsim::Probability;

TEST_CASE("phi at the origin and frozen oracle values") {
    CHECK(phi(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    // quantile oracle values computed ahead of the build (50-digit arithmetic)
    CHECK(std::fabs(phi(1.959963985) - 0.975) <= 1e-9);
    CHECK(std::fabs(phi(1.0) - 0.8413447460685429) <= 1e-12);
    const double lower_tail = phi(-8.0);
    CHECK(lower_tail / 6.220960574271784e-16 > 1.0 / 1.001);
    CHECK(lower_tail / 6.220960574271784e-16 < 1.001);
}

TEST_CASE("phi matches the independent oracle to 1e-12 on [-8, 8]") {
    double worst = 0.0;
    for (int i = 0; i <= 3200; ++i) {
        const double t = -8.0 + i * 0.005;
        const double err = std::fabs(
            phi(t) - static_cast<double>(oracle::normal_cdf(t)));
        worst = std::max(worst, err);
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("phi symmetry and monotonicity") {
    for (int i = 0; i <= 1000; ++i) {
        const double t = -8.0 + i * 0.016;
        CHECK(std::fabs(phi(-t) - (1.0 - phi(t))) <= 1e-12);
    }
    double prev = -1.0;
    for (int i = 0; i <= 100000; ++i) {
        const double t = -10.0 + i * 2e-4;
        const double v = phi(t);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("phi rejects non-finite input") {
    CHECK_THROWS_AS(phi(std::numeric_limits<double>::infinity()), std::domain_error);
    CHECK_THROWS_AS(phi(std::nan("")), std::domain_error);
}

TEST_CASE("probit frozen values and round trips") {
    CHECK(probit(0.5) == 0.0);
    CHECK(std::fabs(probit(phi(1.0)) - 1.0) <= 1e-9);
    CHECK(std::fabs(probit(0.975) - 1.959963985) <= 1e-8);
    CHECK(std::fabs(probit(0.975) - 1.9599639845400542) <= 1e-10);
}

TEST_CASE("probit inverts phi to 1e-9 across [1e-12, 1-1e-12]") {
    double worst = 0.0;
    // log-spaced tails plus a linear interior grid
    for (int e = -12; e <= -2; ++e) {
        for (double mant : {1.0, 2.5, 5.0}) {
            const double p = mant * std::pow(10.0, e);
            worst = std::max(worst, std::fabs(phi(probit(p)) - p));
            worst = std::max(worst, std::fabs(phi(probit(1.0 - p)) - (1.0 - p)));
        }
    }
    for (int i = 1; i < 1000; ++i) {
        const double p = i / 1000.0;
        worst = std::max(worst, std::fabs(phi(probit(p)) - p));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("probit round trip in probit space") {
    double worst = 0.0;
    for (int e = -9; e <= -2; ++e) {
        for (double mant : {1.0, 3.0, 7.0}) {
            for (double p : {mant * std::pow(10.0, e),
                             1.0 - mant * std::pow(10.0, e)}) {
                const double x = probit(p);
                worst = std::max(worst, std::fabs(probit(phi(x)) - x));
            }
        }
    }
    for (int i = 1; i < 500; ++i) {
        const double x = probit(i / 500.0);
        worst = std::max(worst, std::fabs(probit(phi(x)) - x));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("probit symmetry and strict monotonicity") {
    for (int i = 1; i < 2000; ++i) {
        const double p = i / 2000.0;
        CHECK(std::fabs(probit(1.0 - p) + probit(p)) <= 1e-9);
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < 100000; ++i) {
        const double v = probit(i / 100000.0);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("probit agrees with the bisection oracle") {
    for (double p : {1e-10, 1e-6, 0.01, 0.2, 0.5, 0.7, 0.975, 0.9995, 1 - 1e-9}) {
        const double x = probit(p);
        const double ox = static_cast<double>(oracle::normal_quantile(p));
        CHECK(std::fabs(x - ox) <= 1e-8 * std::max(1.0, std::fabs(ox)));
    }
}

TEST_CASE("probit domain errors") {
    CHECK_THROWS_AS(probit(0.0), std::domain_error);
    CHECK_THROWS_AS(probit(1.0), std::domain_error);
    CHECK_THROWS_AS(probit(-0.1), std::domain_error);
    CHECK_THROWS_AS(probit(1.1), std::domain_error);
}

TEST_CASE("clamp_accuracy definition") {
    CHECK(clamp_accuracy(Probability{1.0}, 1000).value == doctest::Approx(0.9995));
    CHECK(clamp_accuracy(Probability{0.0}, 10).value == doctest::Approx(0.05));
    CHECK(clamp_accuracy(Probability{0.7}, 1000).value == 0.7);
    CHECK_THROWS_AS(clamp_accuracy(Probability{0.5}, 0), std::domain_error);
}

TEST_CASE("make_probability validates its range") {
    CHECK(shiftsim::make_probability(0.25).value == 0.25);
    CHECK_THROWS_AS(shiftsim::make_probability(-0.01), std::domain_error);
    CHECK_THROWS_AS(shiftsim::make_probability(1.01), std::domain_error);
    CHECK_THROWS_AS(shiftsim::make_probability(std::nan("")), std::domain_error);
}
