// Tests for the adaptive integrator and the oscillatory-kernel wrapper.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "quapi/quadrature.hpp"

using namespace quapi::quad;

TEST_CASE("degenerate and invalid ranges") {
    const auto r = integrate_adaptive([](double) { return 1.0; }, 2.0, 2.0);
    CHECK(r.value == 0.0);
    CHECK(r.subintervalsUsed == 0);
    CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 1.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 0.0, 1.0, 1e-12, 1e-12, 0),
                    std::invalid_argument);
}

TEST_CASE("low-degree polynomials are exact in a single panel") {
    const auto r = integrate_adaptive([](double x) { return x * x * x - 2.0 * x + 1.0; },
                                      0.0, 1.0);
    CHECK(r.subintervalsUsed == 1);
    CHECK(r.value == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("smooth integrands hit tight tolerances") {
    const auto sine = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI);
    CHECK(std::abs(sine.value - 2.0) < 1e-12);

    const auto expo = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0);
    CHECK(std::abs(expo.value - (std::exp(1.0) - 1.0)) < 1e-12);

    // Large-magnitude integrand exercises the relative branch of the tolerance.
    const auto big = integrate_adaptive([](double x) { return 1e6 * std::cos(x); },
                                        0.0, 0.5, 1e-12, 1e-13);
    CHECK(std::abs(big.value - 1e6 * std::sin(0.5)) < 1e-6);
}

TEST_CASE("integrable endpoint singularity converges by bisection") {
    const auto r = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); },
                                      0.0, 1.0, 1e-10, 1e-10);
    CHECK(std::abs(r.value - 2.0) < 1e-9);
    CHECK(r.subintervalsUsed > 4);
}

TEST_CASE("subinterval exhaustion reports the best estimate") {
    bool threw = false;
    try {
        integrate_adaptive([](double x) { return std::sin(200.0 * x); }, 0.0, 20.0,
                           1e-14, 1e-14, 3);
    } catch (const NonConvergence& nc) {
        threw = true;
        CHECK(nc.best().subintervalsUsed == 3);
        CHECK(nc.best().errorEstimate > 0.0);
    }
    CHECK(threw);
}

TEST_CASE("oscillatory cosine kernel against the closed form") {
    const double k = 50.0;
    const double exact = (1.0 + std::exp(-1.0) * (k * std::sin(k) - std::cos(k))) / (1.0 + k * k);
    const auto r = integrate_weighted_osc([](double x) { return std::exp(-x); }, 0.0, 1.0,
                                          k, OscKind::Cos);
    CHECK(std::abs(r.value - exact) < 1e-10);
}

TEST_CASE("full oscillation periods of a constant cancel") {
    const double W = 7.0;
    const auto r = integrate_weighted_osc([](double) { return 1.0; }, 0.0, 2.0 * M_PI,
                                          W, OscKind::Cos);
    CHECK(std::abs(r.value) < 1e-10);

    const auto rs = integrate_weighted_osc([](double) { return 1.0; }, 0.0, 2.0 * M_PI,
                                           W, OscKind::Sin);
    CHECK(std::abs(rs.value) < 1e-10);
}

TEST_CASE("oscillatory sine kernel against the closed form") {
    const double W = 40.0;
    const auto r = integrate_weighted_osc([](double) { return 1.0; }, 0.0, 1.0, W, OscKind::Sin);
    CHECK(std::abs(r.value - (1.0 - std::cos(W)) / W) < 1e-10);
}

TEST_CASE("zero-frequency kernels") {
    int calls = 0;
    const auto zeroSin = integrate_weighted_osc(
        [&calls](double) {
            ++calls;
            return 123.0;
        },
        0.0, 5.0, 0.0, OscKind::Sin);
    CHECK(zeroSin.value == 0.0);
    CHECK(calls == 0);

    const auto zeroCos = integrate_weighted_osc([](double x) { return std::exp(-x); },
                                                0.0, 5.0, 0.0, OscKind::Cos);
    CHECK(std::abs(zeroCos.value - (1.0 - std::exp(-5.0))) < 1e-12);
}

TEST_CASE("slow oscillation falls back to the plain rule") {
    // W*(b-a) just under one period: result must still be accurate.
    const double W = 5.0;
    const auto r = integrate_weighted_osc([](double x) { return x; }, 0.0, 1.0, W, OscKind::Cos);
    // Integral of x*cos(Wx): (cos(W) + W*sin(W) - 1)/W^2.
    const double exact = (std::cos(W) + W * std::sin(W) - 1.0) / (W * W);
    CHECK(std::abs(r.value - exact) < 1e-12);
}

TEST_CASE("error estimates bound the true error on smooth problems") {
    const auto r = integrate_adaptive([](double x) { return std::cos(3.0 * x); }, 0.0, 2.0);
    const double exact = std::sin(6.0) / 3.0;
    CHECK(std::abs(r.value - exact) <= std::max(1e-13, 10.0 * r.errorEstimate));
}
