#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ehcap/capacity.hpp"
#include "ehcap/mutual_info.hpp"
#include "ehcap/rng.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace ehcap;

TEST_CASE("deterministic input carries no information") {
    CHECK(mutual_information(InputDistribution::point_mass_zero(), {1.0}) == 0.0);
    InputDistribution d;
    d.mass_points = {{2.5, 1.0}};
    CHECK(close_to(mutual_information(d, {1.0}), 0.0, 1e-9));
}

TEST_CASE("antipodal input agrees with a Monte-Carlo entropy estimate") {
    const AwgnChannel ch{1.0};
    const double mi = mutual_information(InputDistribution::symmetric_pair(1.0), ch);

    // independent oracle: h(W) = E[-ln q(W)] by simulation, q known analytically
    const auto q = [](double w) { return 0.5 * (oracle::phi(w - 1.0) + oracle::phi(w + 1.0)); };
    CounterRng rng(424242);
    const std::int64_t n = 10'000'000;
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = rng.sign();
        const double w = x + rng.normal();
        acc += -std::log(q(w));
    }
    const double h_mc = acc / static_cast<double>(n);
    const double mi_mc = h_mc - 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
    CHECK(close_to(mi, mi_mc, 1e-3));
}

TEST_CASE("gridded gaussian input reaches the gaussian capacity") {
    const AwgnChannel ch{1.0};
    for (double p : {0.5, 1.0, 3.0}) {
        const auto d = InputDistribution::gaussian_grid(p);
        CHECK(close_to(mutual_information(d, ch), awgn_capacity(p, ch), 1e-4));
    }
}

TEST_CASE("discrete mixtures agree with the gauss-legendre oracle") {
    const AwgnChannel ch{0.7};
    const std::vector<std::vector<std::pair<double, double>>> laws = {
        {{-0.5, 0.5}, {0.5, 0.5}},
        {{0.0, 0.3}, {-1.2, 0.35}, {1.2, 0.35}},
        {{-2.0, 0.25}, {-0.5, 0.25}, {0.5, 0.25}, {2.0, 0.25}},
    };
    for (const auto& atoms : laws) {
        InputDistribution d;
        for (const auto& [a, m] : atoms) {
            if (a == 0.0)
                d.zero_atom = m;
            else
                d.mass_points.push_back({a, m});
        }
        CHECK(close_to(mutual_information(d, ch), oracle::mixture_mi(atoms, ch.sigma2), 2e-6));
    }
}

TEST_CASE("serial and parallel quadrature agree bitwise") {
    const AwgnChannel ch{1.0};
    const auto d = InputDistribution::gaussian_grid(2.0, 801);
    CHECK(mutual_information(d, ch, 1e-6, Exec::serial) ==
          mutual_information(d, ch, 1e-6, Exec::parallel));
}

TEST_CASE("validation rejects broken laws") {
    InputDistribution d;
    d.zero_atom = 0.5; // mass 0.5 only
    CHECK_THROWS_AS(mutual_information(d, {1.0}), std::invalid_argument);
    InputDistribution neg;
    neg.zero_atom = 1.5;
    neg.mass_points = {{1.0, -0.5}};
    CHECK_THROWS_AS(mutual_information(neg, {1.0}), std::invalid_argument);
}
