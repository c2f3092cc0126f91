// Memory-kernel coefficients: direct frequency integrals and the cache scheme.
#include "quapi/eta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "quapi/model.hpp"
#include "quapi/quadrature.hpp"

namespace quapi::eta {

int k_tau(double tau, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("k_tau: dt must be > 0");
    if (!(tau >= 0.0)) throw std::invalid_argument("k_tau: tau must be >= 0");
    // The small backoff keeps ratios that are exact multiples in real
    // arithmetic from ceiling up on representation noise.
    const double x = (tau - 1.75 * dt) / dt;
    const auto ceiled = static_cast<int>(std::ceil(x - 1e-9));
    return std::max(0, ceiled) + 3;
}

double WCoeffs::wMax() const { return std::max(std::max(W0, W1), std::max(W2, W3)); }

WCoeffs w_coeffs(int n, int l1, int l2, double dt) {
    if (n < 1) throw std::invalid_argument("w_coeffs: n must be >= 1");
    if (l2 < 0 || l1 < l2 || l1 > 2 * n + 1) {
        throw std::invalid_argument("w_coeffs: need 0 <= l2 <= l1 <= 2n+1");
    }
    // All four are partial sums over [l2, l1]; accumulate the interior once
    // and add the end weights as needed. Empty sums contribute zero.
    double interior = 0.0;  // sum over l2 < l < l1
    for (int l = l2 + 1; l < l1; ++l) interior += model::trotter_weight_wtilde(n, l);
    const double wLo = model::trotter_weight_wtilde(n, l2);
    const double wHi = model::trotter_weight_wtilde(n, l1);

    WCoeffs c;
    if (l1 == l2) {
        c.W0 = 0.0;                 // sum over [l2, l1-1] is empty
        c.W1 = 0.0;                 // sum over [l2+1, l1] is empty
        c.W2 = 0.0;                 // sum over [l2+1, l1-1] is empty
        c.W3 = dt * wHi;            // the single term l = l1
        return c;
    }
    c.W0 = dt * (wLo + interior);
    c.W1 = dt * (interior + wHi);
    c.W2 = dt * interior;
    c.W3 = dt * (wLo + interior + wHi);
    return c;
}

std::pair<double, double> eta_integrand_parts(double omega, const WCoeffs& c, bool sameIndex,
                                              double wMax) {
    if (wMax == 0.0) return {0.0, 0.0};

    const double W[4] = {c.W0, c.W1, c.W2, c.W3};
    if (std::abs(omega) < 1e-3 / wMax) {
        // Series branch: terms m = 1..3 of the expansion in (W w)^2. The
        // leading 1/w and 1/w^2 orders cancel via W0 + W1 = W2 + W3.
        double f1 = 0.0, f2 = 0.0;
        double sign = -1.0;
        double factEven = 2.0;  // (2m)!
        double wPow = 1.0;      // omega^(2m-2)
        for (int m = 1; m <= 3; ++m) {
            double even = 0.0, odd = 0.0;
            for (int j = 0; j < 4; ++j) {
                const double p = std::pow(W[j], 2 * m);
                const double s = (j < 2) ? 1.0 : -1.0;
                even += s * p;
                odd += s * p * W[j];
            }
            const double factOdd = factEven * (2 * m + 1);  // (2m+1)!
            f1 += sign * wPow * even / factEven;
            f2 -= sign * wPow * omega * odd / factOdd;
            sign = -sign;
            wPow *= omega * omega;
            factEven *= (2 * m + 1) * (2 * m + 2);
        }
        return {f1, sameIndex ? 0.0 : f2};
    }

    const double inv = 1.0 / (omega * omega);
    const double f1 = (std::cos(W[0] * omega) + std::cos(W[1] * omega) -
                       std::cos(W[2] * omega) - std::cos(W[3] * omega)) *
                      inv;
    if (sameIndex) return {f1, 0.0};
    const double f2 = (-std::sin(W[0] * omega) - std::sin(W[1] * omega) +
                       std::sin(W[2] * omega) + std::sin(W[3] * omega)) *
                      inv;
    return {f1, f2};
}

namespace {

// One component's contribution to the coefficient.
std::complex<double> eta_one_component(const bath::SpectralComponent& comp, double beta,
                                       const WCoeffs& c, bool sameIndex) {
    const double wMax = c.wMax();
    if (comp.wUV <= 0.0) return {0.0, 0.0};

    // Ten partition points: the outer partitions see many kernel
    // oscillations, the inner ones (between -pi/wMax and its mirror) less
    // than half a period. wB splits off the thermally suppressed tail.
    const double wA = (wMax > 0.0) ? -M_PI / wMax
                                   : -std::numeric_limits<double>::infinity();
    const double wB = -25.0 / beta;
    double p[10];
    p[0] = -comp.wUV;
    p[2] = std::min(std::max(-comp.wUV, wA), -comp.wIR);
    p[4] = -comp.wIR;
    p[1] = (p[0] < wB && wB < p[2]) ? wB : p[0];
    p[3] = (p[2] < wB && wB < p[4]) ? wB : p[4];
    for (int a = 5; a <= 9; ++a) p[a] = -p[9 - a];

    double re = 0.0, im = 0.0;
    for (int a = 0; a <= 8; ++a) {
        const double lo = p[a], hi = p[a + 1];
        if (!(hi > lo)) continue;
        if (a == 4) continue;  // the infrared gap, where the density vanishes

        if (a == 2 || a == 3 || a == 5 || a == 6) {
            re += quad::integrate_adaptive(
                      [&](double w) {
                          return bath::eval_component_at_T(comp, beta, w) *
                                 eta_integrand_parts(w, c, sameIndex, wMax).first;
                      },
                      lo, hi)
                      .value;
            if (!sameIndex) {
                im += quad::integrate_adaptive(
                          [&](double w) {
                              return bath::eval_component_at_T(comp, beta, w) *
                                     eta_integrand_parts(w, c, sameIndex, wMax).second;
                          },
                          lo, hi)
                          .value;
            }
        } else {
            auto overW2 = [&](double w) {
                return bath::eval_component_at_T(comp, beta, w) / (w * w);
            };
            const double W[4] = {c.W0, c.W1, c.W2, c.W3};
            double flatCoeff = 0.0;  // net weight of kernels with W_j = 0
            for (int j = 0; j < 4; ++j) {
                const double sign = (j < 2) ? 1.0 : -1.0;
                if (W[j] == 0.0) {
                    flatCoeff += sign;
                    continue;
                }
                re += sign *
                      quad::integrate_weighted_osc(overW2, lo, hi, W[j], quad::OscKind::Cos)
                          .value;
                if (!sameIndex) {
                    im -= sign *
                          quad::integrate_weighted_osc(overW2, lo, hi, W[j],
                                                       quad::OscKind::Sin)
                              .value;
                }
            }
            if (flatCoeff != 0.0) {
                re += flatCoeff * quad::integrate_adaptive(overW2, lo, hi).value;
            }
        }
    }
    return std::complex<double>(re, im) / (2.0 * M_PI);
}

}  // namespace

std::complex<double> eta_direct(const bath::BathModel& b, bath::Axis nu, std::size_t r, int n,
                                int l1, int l2, double dt) {
    const auto& comps = b.components[static_cast<std::size_t>(nu)];
    if (r >= comps.size()) throw std::out_of_range("eta_direct: site out of range");

    const WCoeffs c = w_coeffs(n, l1, l2, dt);
    const bool sameIndex = (l1 == l2);
    std::complex<double> sum{0.0, 0.0};
    for (const auto& comp : comps[r]) {
        sum += eta_one_component(comp, b.beta, c, sameIndex);
    }
    return sum;
}

EtaCaches build_eta_caches(const bath::BathModel& b, bath::Axis nu, std::size_t r, double dt) {
    const int K = k_tau(b.tau, dt);
    EtaCaches out;
    out.kTau = K;
    out.cache1.reserve(K - 1);
    out.cache2.reserve(K - 1);
    out.cache3.reserve(K);
    for (int a = 0; a <= K - 2; ++a) {
        out.cache1.push_back(eta_direct(b, nu, r, a + 1, 2 * a + 2, 0, dt));
        out.cache2.push_back(eta_direct(b, nu, r, a + 1, 2 * a + 3, 0, dt));
    }
    for (int a = 0; a <= K - 1; ++a) {
        out.cache3.push_back(eta_direct(b, nu, r, a + 1, 2 * a + 2, 1, dt));
    }
    out.cache4.reserve(2 * K);
    out.cache5.reserve(2 * K);
    out.cache6.reserve(2 * K);
    for (int a = 0; a <= 2 * K - 1; ++a) {
        out.cache4.push_back(eta_direct(b, nu, r, K + 2, 2 * K + 3, a + 4, dt));
        out.cache5.push_back(eta_direct(b, nu, r, K + 1, 2 * K + 2, a + 3, dt));
        out.cache6.push_back(eta_direct(b, nu, r, K, 2 * K + 1, a + 2, dt));
    }
    return out;
}

std::optional<std::complex<double>> eta_lookup(const EtaCaches& c, int n, int l1, int l2) {
    if (n < 1) throw std::invalid_argument("eta_lookup: n must be >= 1");
    if (l2 < 0 || l1 < l2 || l1 > 2 * n + 1) {
        throw std::invalid_argument("eta_lookup: need 0 <= l2 <= l1 <= 2n+1");
    }
    const int K = c.kTau;

    // Keyed first on l2 (the three boundary-structure groups), then on where
    // l1 sits relative to the refined-grid end slices 2n and 2n+1. The groups
    // are mutually exclusive by construction; anything that falls through is
    // outside the memory window.
    if (l2 == 0) {
        if (l1 <= std::min(2 * K - 1, 2 * n - 1)) return c.cache6[2 * K - 1 - l1];
        if (l1 == 2 * n && n <= K - 1) return c.cache1[n - 1];
        if (l1 == 2 * n + 1 && n <= K - 1) return c.cache2[n - 1];
        return std::nullopt;
    }
    if (l2 == 1) {
        if (l1 <= std::min(2 * K, 2 * n - 1)) return c.cache5[2 * K - l1];
        if (l1 == 2 * n && n <= K) return c.cache3[n - 1];
        if (l1 == 2 * n + 1 && n <= K - 1) return c.cache1[n - 1];
        return std::nullopt;
    }
    if (l1 <= 2 * n - 1) {
        if (l1 - l2 <= 2 * K - 1) return c.cache4[2 * K - 1 - l1 + l2];
        return std::nullopt;
    }
    if (l1 == 2 * n) {
        if (l2 >= 2 * n + 1 - 2 * K) return c.cache5[2 * K - 2 * n - 1 + l2];
        return std::nullopt;
    }
    if (l2 >= 2 * n + 2 - 2 * K) return c.cache6[2 * K - 2 * n - 2 + l2];
    return std::nullopt;
}

}  // namespace quapi::eta
