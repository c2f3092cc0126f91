// Tests for the memory-kernel coefficients, their integrals, and the caches.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include "quapi/eta.hpp"
#include "quapi/model.hpp"

using namespace quapi;
using namespace quapi::eta;
using cplx = std::complex<double>;

namespace {

// Independent reconstruction of the kernel from its product form: for
// distinct indices 4*exp(-i*phase)*sin*sin, for equal indices 2*sin^2.
cplx kernel_product_form(int n, int l1, int l2, double dt, double w) {
    const double wt1 = model::trotter_weight_wtilde(n, l1);
    const double wt2 = model::trotter_weight_wtilde(n, l2);
    if (l1 == l2) {
        const double s = std::sin(dt * w * wt1 / 2.0);
        return {2.0 * s * s, 0.0};
    }
    double mid = 0.0;
    for (int l = l2 + 1; l < l1; ++l) mid += model::trotter_weight_wtilde(n, l);
    const double phase = dt * w * (0.5 * wt1 + mid + 0.5 * wt2);
    return 4.0 * std::exp(cplx(0.0, -phase)) * std::sin(dt * w * wt1 / 2.0) *
           std::sin(dt * w * wt2 / 2.0);
}

double midpoint(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += f(a + (i + 0.5) * h);
    return sum * h;
}

bath::BathModel flat_band_bath(double tau) {
    auto b = bath::BathModel::none(1, 1.0, tau);
    b.components[static_cast<std::size_t>(bath::Axis::Z)][0].push_back(
        bath::SpectralComponent::tabulated({1.0, 1.5}, {1.0, 1.0}, 1.0, 1.5));
    return b;
}

}  // namespace

TEST_CASE("window step count") {
    CHECK(k_tau(0.0, 0.1) == 3);
    CHECK(k_tau(7.0 * 0.1 / 4.0, 0.1) == 3);
    CHECK(k_tau(0.2, 0.1) == 4);
    CHECK(k_tau(2.75, 1.0) == 4);  // exact integer ratio must not round up
    CHECK(k_tau(2.7500001, 1.0) == 5);
    CHECK(k_tau(3.3, 1.0) == 5);
    CHECK_THROWS_AS(k_tau(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(k_tau(-1.0, 0.1), std::invalid_argument);
}

TEST_CASE("weight partial sums") {
    const double dt = 0.3;

    SUBCASE("coincident indices leave only the full-range sum") {
        for (int l1 : {0, 1, 3, 6, 7}) {
            const auto c = w_coeffs(3, l1, l1, dt);
            CHECK(c.W0 == 0.0);
            CHECK(c.W1 == 0.0);
            CHECK(c.W2 == 0.0);
            CHECK(c.W3 == dt * model::trotter_weight_wtilde(3, l1));
        }
    }
    SUBCASE("single interior term") {
        const auto c = w_coeffs(2, 3, 1, dt);
        CHECK(c.W2 == doctest::Approx(dt * 0.5));
    }
    SUBCASE("sum and difference identities for separated indices") {
        for (int n : {1, 2, 4}) {
            for (int l1 = 0; l1 <= 2 * n + 1; ++l1) {
                for (int l2 = 0; l2 <= l1; ++l2) {
                    const auto c = w_coeffs(n, l1, l2, dt);
                    CHECK(c.wMax() == doctest::Approx(c.W3));
                    if (l2 == l1) continue;
                    CHECK(c.W0 + c.W1 == doctest::Approx(c.W2 + c.W3));
                    CHECK(c.W3 - c.W2 ==
                          doctest::Approx(dt * (model::trotter_weight_wtilde(n, l1) +
                                                model::trotter_weight_wtilde(n, l2))));
                }
            }
        }
    }
    SUBCASE("argument checks") {
        CHECK_THROWS_AS(w_coeffs(0, 0, 0, dt), std::invalid_argument);
        CHECK_THROWS_AS(w_coeffs(2, 1, 2, dt), std::invalid_argument);
        CHECK_THROWS_AS(w_coeffs(2, 6, 0, dt), std::invalid_argument);
    }
}

TEST_CASE("integrand parts match the product-form kernel") {
    const double dt = 0.4;
    struct Case {
        int n, l1, l2;
    };
    for (const auto& [n, l1, l2] : {Case{3, 5, 2}, Case{3, 7, 0}, Case{2, 4, 4},
                                    Case{4, 9, 1}, Case{1, 3, 0}}) {
        const auto c = w_coeffs(n, l1, l2, dt);
        const double wMax = c.wMax();
        const bool same = (l1 == l2);
        for (double w : {-7.0, -1.3, 0.4, 2.0, 15.0}) {
            const auto [f1, f2] = eta_integrand_parts(w, c, same, wMax);
            const cplx expect = kernel_product_form(n, l1, l2, dt, w) / (w * w);
            CHECK(f1 == doctest::Approx(expect.real()).epsilon(1e-12));
            CHECK(f2 == doctest::Approx(expect.imag()).epsilon(1e-12));
        }
    }
}

TEST_CASE("integrand parts near the origin") {
    const double dt = 0.25;
    const auto c = w_coeffs(3, 5, 1, dt);
    const double wMax = c.wMax();
    const double thr = 1e-3 / wMax;

    SUBCASE("branches agree across the threshold") {
        const auto below = eta_integrand_parts(thr * (1.0 - 1e-9), c, false, wMax);
        const auto above = eta_integrand_parts(thr * (1.0 + 1e-9), c, false, wMax);
        CHECK(below.first == doctest::Approx(above.first).epsilon(1e-9));
        CHECK(below.second == doctest::Approx(above.second).epsilon(1e-9));
        const auto belowN = eta_integrand_parts(-thr * (1.0 - 1e-9), c, false, wMax);
        const auto aboveN = eta_integrand_parts(-thr * (1.0 + 1e-9), c, false, wMax);
        CHECK(belowN.first == doctest::Approx(aboveN.first).epsilon(1e-9));
        CHECK(belowN.second == doctest::Approx(aboveN.second).epsilon(1e-9));
    }
    SUBCASE("quadratic limit at zero frequency") {
        const auto [f1, f2] = eta_integrand_parts(0.0, c, false, wMax);
        const double expect = 0.5 * (c.W2 * c.W2 + c.W3 * c.W3 - c.W0 * c.W0 - c.W1 * c.W1);
        CHECK(f1 == doctest::Approx(expect).epsilon(1e-14));
        CHECK(f2 == 0.0);
    }
    SUBCASE("coincident-index limit reproduces the squared half-weight") {
        const auto cs = w_coeffs(3, 4, 4, dt);
        const auto [f1, f2] = eta_integrand_parts(0.0, cs, true, cs.wMax());
        const double wt = dt * model::trotter_weight_wtilde(3, 4);
        CHECK(f1 == doctest::Approx(wt * wt / 2.0).epsilon(1e-14));
        CHECK(f2 == 0.0);
    }
    SUBCASE("degenerate weights give a vanishing integrand") {
        const auto z = eta_integrand_parts(1.0, WCoeffs{}, true, 0.0);
        CHECK(z.first == 0.0);
        CHECK(z.second == 0.0);
    }
}

TEST_CASE("direct coefficient against Riemann oracles") {
    SUBCASE("no noise means zero") {
        const auto b = bath::BathModel::none(1, 1.0, 0.0);
        CHECK(eta_direct(b, bath::Axis::Z, 0, 2, 3, 1, 0.5) == cplx(0.0, 0.0));
    }
    SUBCASE("coincident indices are purely real") {
        const auto b = flat_band_bath(2.0);
        const auto v = eta_direct(b, bath::Axis::Z, 0, 3, 4, 4, 1.0);
        CHECK(v.imag() == 0.0);
        CHECK(v.real() != 0.0);
    }
    SUBCASE("flat band, distinct indices") {
        const auto b = flat_band_bath(2.0);
        const int n = 3, l1 = 5, l2 = 1;
        const double dt = 1.0;
        auto integrand = [&](double w) {
            return eval_spectral_density(b, bath::Axis::Z, 0, w) *
                   kernel_product_form(n, l1, l2, dt, w) / (w * w);
        };
        // Midpoint Riemann sums: the hard band edges make the integrand jump
        // at the interval ends, which endpoint-sampling rules smear.
        auto re = [&](double w) { return integrand(w).real(); };
        auto im = [&](double w) { return integrand(w).imag(); };
        const double norm = 2.0 * M_PI;
        const cplx oracle{
            (midpoint(re, -1.5, -1.0, 500000) + midpoint(re, 1.0, 1.5, 500000)) / norm,
            (midpoint(im, -1.5, -1.0, 500000) + midpoint(im, 1.0, 1.5, 500000)) / norm};
        const auto got = eta_direct(b, bath::Axis::Z, 0, n, l1, l2, dt);
        CHECK(std::abs(got - oracle) <= 1e-8 * std::abs(oracle));
    }
    SUBCASE("ohmic bath with gapless spectrum") {
        auto b = bath::BathModel::none(1, 1.0, 0.0);
        b.components[static_cast<std::size_t>(bath::Axis::Z)][0].push_back(
            bath::SpectralComponent::ohmic(1.0, 1.0, 0.0, 40.0));
        const int n = 2, l1 = 3, l2 = 0;
        const double dt = 0.5;
        auto integrand = [&](double w) {
            return eval_spectral_density(b, bath::Axis::Z, 0, w) *
                   kernel_product_form(n, l1, l2, dt, w) / (w * w);
        };
        const cplx oracle{
            midpoint([&](double w) { return integrand(w).real(); }, -40.0, 40.0, 400000) /
                (2.0 * M_PI),
            midpoint([&](double w) { return integrand(w).imag(); }, -40.0, 40.0, 400000) /
                (2.0 * M_PI)};
        const auto got = eta_direct(b, bath::Axis::Z, 0, n, l1, l2, dt);
        CHECK(std::abs(got - oracle) <= 1e-4 * std::abs(oracle));
    }
}

TEST_CASE("cache construction") {
    const double dt = 1.0;
    const auto b = flat_band_bath(2.0);  // K = 4 at dt = 1
    const auto caches = build_eta_caches(b, bath::Axis::Z, 0, dt);
    const int K = caches.kTau;
    REQUIRE(K == 4);
    CHECK(caches.cache1.size() == std::size_t(K - 1));
    CHECK(caches.cache2.size() == std::size_t(K - 1));
    CHECK(caches.cache3.size() == std::size_t(K));
    CHECK(caches.cache4.size() == std::size_t(2 * K));
    CHECK(caches.cache5.size() == std::size_t(2 * K));
    CHECK(caches.cache6.size() == std::size_t(2 * K));

    // Definitional spot checks.
    for (int a : {0, 2 * K - 1}) {
        CHECK(std::abs(caches.cache6[a] -
                       eta_direct(b, bath::Axis::Z, 0, K, 2 * K + 1, a + 2, dt)) < 1e-15);
    }
    CHECK(std::abs(caches.cache3[K - 1] -
                   eta_direct(b, bath::Axis::Z, 0, K, 2 * K, 1, dt)) < 1e-15);

    const auto empty = build_eta_caches(bath::BathModel::none(1, 1.0, 2.0),
                                        bath::Axis::Y, 0, dt);
    for (const auto& v : empty.cache4) CHECK(v == cplx(0.0, 0.0));
    for (const auto& v : empty.cache6) CHECK(v == cplx(0.0, 0.0));
}

TEST_CASE("lookup equals direct evaluation on every in-window pair") {
    const double dt = 1.0;
    const auto b = flat_band_bath(2.0);
    const auto caches = build_eta_caches(b, bath::Axis::Z, 0, dt);
    const int K = caches.kTau;
    REQUIRE(K == 4);

    for (int n : {1, 2, 5, 6}) {
        for (int l1 = 0; l1 <= 2 * n + 1; ++l1) {
            for (int l2 = 0; l2 <= l1; ++l2) {
                const auto got = eta_lookup(caches, n, l1, l2);
                const bool inWindow = (l1 - l2 <= 2 * K - 1);
                REQUIRE(got.has_value() == inWindow);
                if (!inWindow) continue;
                const auto want = eta_direct(b, bath::Axis::Z, 0, n, l1, l2, dt);
                REQUIRE(std::abs(*got - want) <= 1e-12 * std::max(1e-30, std::abs(want)));
            }
        }
    }

    SUBCASE("deep-bulk step counts stay within the translated cache slots") {
        const int nb = model::step_count_bulk;
        for (int l1 = 0; l1 <= 9; ++l1) {
            for (int l2 = 0; l2 <= l1; ++l2) {
                const auto got = eta_lookup(caches, nb, l1, l2);
                REQUIRE(got.has_value() == (l1 - l2 <= 2 * K - 1));
                if (!got) continue;
                const auto want = eta_direct(b, bath::Axis::Z, 0, nb, l1, l2, dt);
                REQUIRE(std::abs(*got - want) <= 1e-12 * std::max(1e-30, std::abs(want)));
            }
        }
    }
}

TEST_CASE("lookup rejects malformed indices") {
    const auto caches = build_eta_caches(bath::BathModel::none(1, 1.0, 0.0),
                                         bath::Axis::Z, 0, 0.1);
    CHECK_THROWS_AS(eta_lookup(caches, 0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(eta_lookup(caches, 2, 3, 4), std::invalid_argument);
    CHECK_THROWS_AS(eta_lookup(caches, 2, 6, 0), std::invalid_argument);
}
