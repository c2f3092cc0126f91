// Tests for time-dependent parameter evaluation and the Trotter weight tables.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "quapi/model.hpp"

using namespace quapi::model;

TEST_CASE("constant scalar evaluates everywhere") {
    const auto s = TimeScalar::constant(2.5);
    CHECK(eval_scalar(s, 0.0) == 2.5);
    CHECK(eval_scalar(s, -3.0) == 2.5);
    CHECK(eval_scalar(s, 1e9) == 2.5);
    CHECK_FALSE(s.is_zero());
    CHECK(TimeScalar::constant(0.0).is_zero());
}

TEST_CASE("piecewise linear interpolation and domain") {
    const auto s = TimeScalar::piecewise({{0.0, 1.0}, {1.0, 3.0}, {2.0, 0.0}});
    CHECK(eval_scalar(s, 0.0) == doctest::Approx(1.0));
    CHECK(eval_scalar(s, 1.0) == doctest::Approx(3.0));
    CHECK(eval_scalar(s, 2.0) == doctest::Approx(0.0));
    CHECK(eval_scalar(s, 0.5) == doctest::Approx(2.0));
    CHECK(eval_scalar(s, 1.5) == doctest::Approx(1.5));
    CHECK_THROWS_AS(eval_scalar(s, -0.001), std::out_of_range);
    CHECK_THROWS_AS(eval_scalar(s, 2.001), std::out_of_range);

    CHECK_THROWS_AS(TimeScalar::piecewise({}), std::invalid_argument);
    CHECK_THROWS_AS(TimeScalar::piecewise({{1.0, 0.0}, {0.5, 0.0}}), std::invalid_argument);

    const auto single = TimeScalar::piecewise({{0.5, 7.0}});
    CHECK(eval_scalar(single, 0.5) == 7.0);
    CHECK_THROWS_AS(eval_scalar(single, 0.6), std::out_of_range);
}

TEST_CASE("tabulated grid interpolation and edge slack") {
    const auto s = TimeScalar::tabulated(0.0, 0.5, {0.0, 1.0, 4.0});
    CHECK(eval_scalar(s, 0.0) == doctest::Approx(0.0));
    CHECK(eval_scalar(s, 0.5) == doctest::Approx(1.0));
    CHECK(eval_scalar(s, 1.0) == doctest::Approx(4.0));
    CHECK(eval_scalar(s, 0.25) == doctest::Approx(0.5));
    CHECK(eval_scalar(s, 0.75) == doctest::Approx(2.5));
    // Times that land a rounding error past the grid edge are clamped.
    CHECK(eval_scalar(s, 1.0 + 1e-13) == doctest::Approx(4.0));
    CHECK(eval_scalar(s, -1e-13) == doctest::Approx(0.0));
    CHECK_THROWS_AS(eval_scalar(s, 1.1), std::out_of_range);
    CHECK_THROWS_AS(eval_scalar(s, -0.1), std::out_of_range);

    CHECK_THROWS_AS(TimeScalar::tabulated(0.0, 0.1, {}), std::invalid_argument);
    CHECK_THROWS_AS(TimeScalar::tabulated(0.0, 0.0, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeScalar::tabulated(0.0, -0.1, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("structural zero detection") {
    CHECK(TimeScalar::piecewise({{0.0, 0.0}, {1.0, 0.0}}).is_zero());
    CHECK_FALSE(TimeScalar::piecewise({{0.0, 0.0}, {1.0, 0.5}}).is_zero());
    CHECK(TimeScalar::tabulated(0.0, 1.0, {0.0, 0.0}).is_zero());
    CHECK_FALSE(TimeScalar::tabulated(0.0, 1.0, {0.0, 1e-30}).is_zero());
}

namespace {

SystemModel good_model(std::size_t L) {
    SystemModel m;
    m.L = L;
    for (std::size_t r = 0; r < L; ++r) {
        m.hx.push_back(TimeScalar::constant(1.0));
        m.hz.push_back(TimeScalar::constant(0.25));
        m.Jzz.push_back(TimeScalar::constant(r + 1 < L ? 0.5 : 0.0));
    }
    return m;
}

}  // namespace

TEST_CASE("validate_model accepts a well-formed chain") {
    CHECK(validate_model(good_model(1)).empty());
    CHECK(validate_model(good_model(4)).empty());
}

TEST_CASE("validate_model reports structural problems") {
    SUBCASE("empty chain") {
        SystemModel m;
        m.L = 0;
        CHECK_FALSE(validate_model(m).empty());
    }
    SUBCASE("wrong family length") {
        auto m = good_model(3);
        m.hx.pop_back();
        const auto errs = validate_model(m);
        REQUIRE(errs.size() == 1);
        CHECK(errs[0].find("hx") != std::string::npos);
    }
    SUBCASE("nonzero boundary coupler") {
        auto m = good_model(2);
        m.Jzz[1] = TimeScalar::constant(0.3);
        const auto errs = validate_model(m);
        REQUIRE(errs.size() == 1);
        CHECK(errs[0].find("Jzz[1]") != std::string::npos);
    }
    SUBCASE("nonfinite sample") {
        auto m = good_model(2);
        m.hz[0] = TimeScalar::constant(std::numeric_limits<double>::quiet_NaN());
        CHECK_FALSE(validate_model(m).empty());
    }
}

TEST_CASE("coarse trapezoid weights") {
    CHECK(trotter_weight_w(1, -1) == 0.0);
    CHECK(trotter_weight_w(1, 0) == 0.5);
    CHECK(trotter_weight_w(1, 1) == 0.5);
    CHECK(trotter_weight_w(1, 2) == 0.0);

    CHECK(trotter_weight_w(4, 0) == 0.5);
    CHECK(trotter_weight_w(4, 1) == 1.0);
    CHECK(trotter_weight_w(4, 2) == 1.0);
    CHECK(trotter_weight_w(4, 3) == 1.0);
    CHECK(trotter_weight_w(4, 4) == 0.5);
    CHECK(trotter_weight_w(4, 5) == 0.0);

    CHECK_THROWS_AS(trotter_weight_w(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(trotter_weight_w(3, -2), std::out_of_range);
    CHECK_THROWS_AS(trotter_weight_w(3, 5), std::out_of_range);
}

TEST_CASE("refined half-step weights") {
    // n = 1: every index is one of the four boundary slots.
    for (int l = 0; l <= 3; ++l) CHECK(trotter_weight_wtilde(1, l) == 0.25);

    CHECK(trotter_weight_wtilde(3, 0) == 0.25);
    CHECK(trotter_weight_wtilde(3, 1) == 0.25);
    CHECK(trotter_weight_wtilde(3, 2) == 0.5);
    CHECK(trotter_weight_wtilde(3, 5) == 0.5);
    CHECK(trotter_weight_wtilde(3, 6) == 0.25);
    CHECK(trotter_weight_wtilde(3, 7) == 0.25);

    CHECK_THROWS_AS(trotter_weight_wtilde(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(trotter_weight_wtilde(2, -1), std::out_of_range);
    CHECK_THROWS_AS(trotter_weight_wtilde(2, 6), std::out_of_range);
}

TEST_CASE("weight tables are consistent refinements") {
    for (int n : {1, 2, 3, 7, 12}) {
        double coarse = 0.0, refined = 0.0;
        for (int k = 0; k <= n; ++k) coarse += trotter_weight_w(n, k);
        for (int l = 0; l <= 2 * n + 1; ++l) refined += trotter_weight_wtilde(n, l);
        // Both grids integrate a constant over n steps.
        CHECK(coarse == doctest::Approx(n));
        CHECK(refined == doctest::Approx(n));
        // Each refined pair (2k, 2k+1) adds up to the coarse weight at k.
        for (int k = 0; k <= n; ++k) {
            CHECK(trotter_weight_w(n, k) ==
                  doctest::Approx(trotter_weight_wtilde(n, 2 * k) +
                                  trotter_weight_wtilde(n, 2 * k + 1)));
        }
    }
}

TEST_CASE("bulk sentinel selects interior weights") {
    CHECK(trotter_weight_w(step_count_bulk, 0) == 0.5);
    CHECK(trotter_weight_w(step_count_bulk, 1) == 1.0);
    CHECK(trotter_weight_w(step_count_bulk, 123456) == 1.0);
    CHECK(trotter_weight_wtilde(step_count_bulk, 0) == 0.25);
    CHECK(trotter_weight_wtilde(step_count_bulk, 1) == 0.25);
    CHECK(trotter_weight_wtilde(step_count_bulk, 2) == 0.5);
    CHECK(trotter_weight_wtilde(step_count_bulk, 999999) == 0.5);
}
