// model.hpp - time-dependent chain parameters and the Trotter weight tables

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace quapi::model {

// A real scalar parameter of the Hamiltonian as a function of time.
// Three serialized kinds are supported; arbitrary callables are deliberately
// not part of the on-disk format so that runs stay reproducible from configs.
struct TimeScalar {
    enum class Kind { Constant, PiecewiseLinear, Tabulated };

    Kind kind{Kind::Constant};

    // Kind::Constant
    double value{0.0};

    // Kind::PiecewiseLinear: (t, v) samples sorted by t, interpolated linearly.
    std::vector<std::pair<double, double>> samples;

    // Kind::Tabulated: values on the uniform grid t0 + i*step.
    double t0{0.0};
    double step{0.0};
    std::vector<double> values;

    static TimeScalar constant(double v);
    static TimeScalar piecewise(std::vector<std::pair<double, double>> samples);
    static TimeScalar tabulated(double t0, double step, std::vector<double> values);

    bool is_zero() const;  // structurally zero for all t
};

// Evaluate a TimeScalar at time t >= 0. Piecewise and tabulated kinds throw
// std::out_of_range when t falls outside their sampled range.
double eval_scalar(const TimeScalar& s, double t);

// Finite open chain of L sites. hx/hz are per-site transverse/longitudinal
// fields; Jzz[r] couples sites r and r+1, and the boundary entry Jzz[L-1]
// must be identically zero.
struct SystemModel {
    std::size_t L{1};
    std::vector<TimeScalar> hx;
    std::vector<TimeScalar> hz;
    std::vector<TimeScalar> Jzz;
};

// Collect rule violations (wrong array lengths, nonzero boundary coupler,
// nonfinite samples). Empty result means the model is usable.
std::vector<std::string> validate_model(const SystemModel& m);

// Sentinel step count selecting the bulk (boundary-free) weight values: with
// n = step_count_bulk every k >= 1 is an interior slice, so the tables below
// return 1/2 at k = 0 and 1 elsewhere, which is what the steady left-block
// recursion needs.
inline constexpr int step_count_bulk = 1 << 28;

// Trapezoid weight w_{n;k} of the coarse time grid: 0 at the two virtual
// slices k = -1 and k = n+1, 1/2 at the ends k = 0 and k = n, 1 inside.
// Requires n >= 1 and -1 <= k <= n+1.
double trotter_weight_w(int n, int k);

// Weight of the refined (half-step) grid with 2n+2 slices: 1/4 at the four
// boundary indices l in {0, 1, 2n, 2n+1} and 1/2 in the interior.
// Requires n >= 1 and 0 <= l <= 2n+1.
double trotter_weight_wtilde(int n, int l);

}  // namespace quapi::model
