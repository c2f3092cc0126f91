// bath.hpp - finite-temperature noise spectral densities per site and axis

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "quapi/model.hpp"

namespace quapi::bath {

// Spin components that can carry noise.
enum class Axis { Y = 0, Z = 1 };

namespace detail {
struct Expr;  // compiled formula, defined in bath.cpp
}

// One zero-temperature spectral density component A0(w), supported on the
// band wIR < w <= wUV and zero outside. Finite temperature dressing happens
// in eval_component_at_T.
struct SpectralComponent {
    enum class Shape { Ohmic, Tabulated, Expression };

    Shape shape{Shape::Ohmic};

    double eta{0.0};  // Ohmic prefactor: A0(w) = eta * w * exp(-w / wc)
    double wc{1.0};   // Ohmic exponential cutoff scale

    std::vector<double> gridW;  // Tabulated sample frequencies, increasing
    std::vector<double> gridA;  // Tabulated sample values, >= 0
    std::vector<double> gridM;  // derived interpolation slopes at the samples

    std::string formula;  // Expression source text in the variable w
    std::shared_ptr<const detail::Expr> compiled;

    double wIR{0.0};    // hard infrared cutoff, 0 <= wIR <= wUV
    double wUV{0.0};    // hard ultraviolet cutoff
    double slope0{0.0}; // limit of A0(w)/w as w -> 0+

    static SpectralComponent ohmic(double eta, double wc, double wIR, double wUV);
    static SpectralComponent tabulated(std::vector<double> w, std::vector<double> a,
                                       double wIR, double wUV);
    // Formula in the variable `w` with +,-,*,/,^, parentheses, pi, and the
    // functions exp, log, sin, cos, tan, sinh, cosh, tanh, sqrt, abs.
    static SpectralComponent expression(const std::string& formula, double wIR, double wUV);

    // A0 at face value: |w| outside (wIR, wUV] gives 0, tabulated shapes use
    // monotone cubic interpolation clamped to >= 0.
    double zero_temperature(double absOmega) const;
};

// Temperature-dressed spectral density of a single component, evaluated with
// the overflow-safe four-branch scheme: the w = 0 limit, a series form for
// 0 < |w| < 1e-3/beta, and exponent-sign-adapted forms beyond.
double eval_component_at_T(const SpectralComponent& c, double beta, double omega);

// All baths of a chain: per axis and site, a coupling energy scale and a list
// of spectral components. An empty component list means no noise there.
struct BathModel {
    std::size_t L{1};
    double beta{1.0};  // inverse temperature
    double tau{0.0};   // memory time of the influence window

    std::array<std::vector<model::TimeScalar>, 2> couplingScale;      // [axis][site]
    std::array<std::vector<std::vector<SpectralComponent>>, 2> components;  // [axis][site]

    bool has_noise(Axis nu, std::size_t r) const {
        const auto& c = components[static_cast<std::size_t>(nu)];
        return r < c.size() && !c[r].empty();
    }
    bool has_y_noise(std::size_t r) const { return has_noise(Axis::Y, r); }
    bool any_y_noise() const;

    // A bath with no noise anywhere, unit coupling scales.
    static BathModel none(std::size_t L, double beta, double tau);
};

// Structural checks: positive beta, nonnegative tau, family sizes matching L,
// ordered cutoffs. Empty result means usable.
std::vector<std::string> validate_bath(const BathModel& b);

// Sum of eval_component_at_T over the components at (nu, r).
double eval_spectral_density(const BathModel& b, Axis nu, std::size_t r, double omega);

// Bath correlation function C(t) = (1/2pi) Int dw A_T(w) exp(-i w t), with
// the frequency axis split at cutoff and branch frequencies. Propagates
// quad::NonConvergence if the integrals fail to converge.
std::complex<double> bath_correlation(const BathModel& b, Axis nu, std::size_t r, double t);

// Integrated weight (1/2pi) Int dw A_T(w); equals C(0).
double noise_strength(const BathModel& b, Axis nu, std::size_t r);

}  // namespace quapi::bath
