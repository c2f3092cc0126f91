// eta.hpp - memory-kernel coefficients: frequency integrals and their caches

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "quapi/bath.hpp"

namespace quapi::eta {

// Number of coarse steps the influence window must span so that index pairs
// outside it are separated by at least the memory time tau.
int k_tau(double tau, double dt);

// The four partial sums of dt-scaled half-step weights entering the kernel
// phase factors. W3 spans the full index range [l2, l1] and is always the
// largest; W0 + W1 = W2 + W3 holds identically.
struct WCoeffs {
    double W0{0.0};
    double W1{0.0};
    double W2{0.0};
    double W3{0.0};

    double wMax() const;
};

// Requires n >= 1 and 0 <= l2 <= l1 <= 2n+1. Cost is O(l1 - l2), so the bulk
// sentinel step count is safe here.
WCoeffs w_coeffs(int n, int l1, int l2, double dt);

// Real and imaginary parts of the oscillatory kernel divided by w^2, with the
// removable singularity at w = 0 handled by a sixth-order series branch for
// |w| < 1e-3 / wMax. sameIndex (l1 == l2) forces the imaginary part to zero.
// wMax == 0 yields (0, 0).
std::pair<double, double> eta_integrand_parts(double omega, const WCoeffs& c, bool sameIndex,
                                              double wMax);

// The coefficient as the defining frequency integral, evaluated per spectral
// component over a nine-way partition of the axis: slowly-varying partitions
// use the plain adaptive rule on the full integrand, the outer ones use
// weighted oscillatory quadrature per kernel term. Propagates
// quad::NonConvergence.
std::complex<double> eta_direct(const bath::BathModel& b, bath::Axis nu, std::size_t r, int n,
                                int l1, int l2, double dt);

// Precomputed coefficient tables for one (axis, site). Stationarity of the
// kernel in the bulk lets every in-window index pair map onto one of six
// short arrays.
struct EtaCaches {
    int kTau{3};
    std::vector<std::complex<double>> cache1;  // length kTau-1
    std::vector<std::complex<double>> cache2;  // length kTau-1
    std::vector<std::complex<double>> cache3;  // length kTau
    std::vector<std::complex<double>> cache4;  // length 2*kTau
    std::vector<std::complex<double>> cache5;  // length 2*kTau
    std::vector<std::complex<double>> cache6;  // length 2*kTau
};

EtaCaches build_eta_caches(const bath::BathModel& b, bath::Axis nu, std::size_t r, double dt);

// Cached coefficient for (n, l1, l2), or nullopt when the pair lies outside
// the memory window (l1 - l2 >= 2*kTau), meaning it contributes nothing.
// Requires n >= 1 and 0 <= l2 <= l1 <= 2n+1.
std::optional<std::complex<double>> eta_lookup(const EtaCaches& c, int n, int l1, int l2);

}  // namespace quapi::eta
