// brute_force.cpp - reduced density matrix by direct summation over spin paths

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "quapi/eta.hpp"
#include "quapi/observables.hpp"

namespace quapi::obs {

namespace {

// Path layout. Every site carries one coarse history: 2 bits per slice
// q = 0..n+1 with the forward branch in the low bit, bit value 1 meaning spin
// down. With transverse noise anywhere, every site additionally carries a
// fine history of 2n+2 slices, packed as one hex digit per coarse interval l
// holding both branches of fine slices 2l and 2l+1. Fine variables never
// couple across sites, so they are summed out per site before the global
// loop; only the coarse histories are enumerated jointly, tied together by
// the longitudinal phases and the initial state.

double spin_of(int bit) { return bit ? -1.0 : 1.0; }

int slot(std::size_t cfg, int q) { return int(cfg >> (2 * q)) & 3; }

// One decay exponent of a bath-coupled slice pair. eta carries the kernel
// integral, e1/e2 the coupling energies at the two kernel times; the slice
// spins enter through branch differences and sums.
cplx gamma_term(double e1, double e2, const cplx& eta, double sp1, double sm1, double sp2,
                double sm2) {
    return e1 * e2 * (sp2 - sm2) * cplx((sp1 - sm1) * eta.real(), (sp1 + sm1) * eta.imag());
}

// Kernel-grid index pairs coupled to the coarse slice pair (q1, q2),
// q1 <= q2, each pair ordered ascending. The ends of the coarse grid touch
// one kernel slice, interior slices touch two.
std::vector<std::pair<int, int>> coarse_kernel_pairs(int n, int q1, int q2) {
    if (q1 == 0 && q2 == 0) return {{0, 0}};
    if (q1 == 0 && q2 <= n) return {{0, 2 * q2 - 1}, {0, 2 * q2}};
    if (q1 == 0) return {{0, 2 * n + 1}};
    if (q1 < q2 && q2 <= n)
        return {{2 * q1 - 1, 2 * q2 - 1},
                {2 * q1, 2 * q2 - 1},
                {2 * q1 - 1, 2 * q2},
                {2 * q1, 2 * q2}};
    if (q1 == q2 && q2 <= n)
        return {{2 * q1 - 1, 2 * q2 - 1}, {2 * q1 - 1, 2 * q2}, {2 * q1, 2 * q2}};
    if (q2 == n + 1 && q1 <= n) return {{2 * q1 - 1, 2 * n + 1}, {2 * q1, 2 * n + 1}};
    return {{2 * n + 1, 2 * n + 1}};
}

// Propagator amplitude between two slices of one branch. cnu selects the
// slice basis (1 = fine, 2 = coarse), alpha the branch, a/b the two slice
// spins in the argument order of that branch.
cplx tfc_amp(int cnu, int alpha, double a, double b, double theta) {
    const double diag = 0.25 * (a + b) * (a + b);
    const double off = 0.5 * (a - b);
    const cplx pref = (cnu == 1) ? cplx(-1.0, 0.0) : cplx(0.0, -1.0);
    const double offPow = (cnu == 1) ? off : off * off;
    return diag * std::cos(0.5 * theta) + pref * double(alpha) * offPow * std::sin(0.5 * theta);
}

// basis-change amplitude between a fine slice spin and a coarse slice spin
cplx zy_amp(double sy, double sz) {
    const double c = 1.0 / (2.0 * std::sqrt(2.0));
    return cplx(c * (1.0 + sz), c * sy * (sz - 1.0));
}

// exp(-gamma) over the 16 slot combinations (low 2 bits = first slice) of
// one bath-coupled slice pair
std::array<cplx, 16> bath_pair_table(const eta::EtaCaches& caches,
                                     const std::vector<double>& eScale, int n,
                                     const std::vector<std::pair<int, int>>& kernelPairs) {
    std::array<cplx, 16> out{};
    for (int d2 = 0; d2 < 4; ++d2) {
        for (int d1 = 0; d1 < 4; ++d1) {
            const double sp1 = spin_of(d1 & 1);
            const double sm1 = spin_of((d1 >> 1) & 1);
            const double sp2 = spin_of(d2 & 1);
            const double sm2 = spin_of((d2 >> 1) & 1);
            cplx sum(0.0, 0.0);
            for (const auto& [a, b] : kernelPairs) {
                const auto eta = eta::eta_lookup(caches, n, b, a);
                if (!eta) continue;
                sum += gamma_term(eScale[std::size_t(a)], eScale[std::size_t(b)], *eta, sp1, sm1,
                                  sp2, sm2);
            }
            out[std::size_t(d1 + 4 * d2)] = std::exp(-sum);
        }
    }
    return out;
}

std::vector<double> coupling_scales(const bath::BathModel& bth, bath::Axis nu, std::size_t r,
                                    int n, double dt) {
    std::vector<double> out(std::size_t(2 * n + 2));
    const auto& ts = bth.couplingScale[std::size_t(nu)][r];
    for (int l = 0; l <= 2 * n + 1; ++l) out[std::size_t(l)] = model::eval_scalar(ts, (l / 2) * dt);
    return out;
}

// Influence factor of one site for every packed coarse history, fine
// variables summed out when the chain runs on the fine grid. Slice pairs
// whose slots fall outside the memory window are dropped wholesale, matching
// the windowed influence recursion rather than the kernel cache span (the
// two cutoffs differ by one kernel slice at the window edge).
std::vector<cplx> site_factors(const model::SystemModel& sys, const bath::BathModel& bth,
                               std::size_t r, int n, double dt, bool fineGrid) {
    const int nSlices = n + 2;
    const std::size_t count = std::size_t(1) << (2 * nSlices);
    const int kTau = eta::k_tau(bth.tau, dt);
    const int deltaM = fineGrid ? 3 : 1;
    const int windowSpan = kTau * deltaM - 1;  // largest in-window slot difference

    std::optional<eta::EtaCaches> zCaches;
    std::vector<double> zScale;
    if (bth.has_noise(bath::Axis::Z, r)) {
        zCaches = eta::build_eta_caches(bth, bath::Axis::Z, r, dt);
        zScale = coupling_scales(bth, bath::Axis::Z, r, n, dt);
    }

    // bath factors on the coarse grid, absent without z-noise; coarse slice q
    // sits on slot q*deltaM
    std::vector<std::array<cplx, 16>> zBath;
    if (zCaches) {
        for (int q2 = 0; q2 <= n + 1; ++q2)
            for (int q1 = 0; q1 <= q2; ++q1) {
                const bool inWindow = deltaM * (q2 - q1) <= windowSpan;
                zBath.push_back(bath_pair_table(
                    *zCaches, zScale, n,
                    inWindow ? coarse_kernel_pairs(n, q1, q2)
                             : std::vector<std::pair<int, int>>{}));
            }
    }

    std::vector<double> theta(std::size_t(n + 1), 0.0);
    if (!sys.hx[r].is_zero())
        for (int l = 0; l <= n; ++l)
            theta[std::size_t(l)] =
                2.0 * dt * model::trotter_weight_w(n, l) * model::eval_scalar(sys.hx[r], l * dt);

    std::vector<cplx> factors(count);

    // coarse bath product of one history
    auto coarse_bath = [&](std::size_t cfg) {
        cplx v(1.0, 0.0);
        if (!zCaches) return v;
        std::size_t idx = 0;
        for (int q2 = 0; q2 <= n + 1; ++q2)
            for (int q1 = 0; q1 <= q2; ++q1, ++idx)
                v *= zBath[idx][std::size_t(slot(cfg, q1) + 4 * slot(cfg, q2))];
        return v;
    };

    if (!fineGrid) {
        // propagator amplitudes live directly on the coarse grid
        std::vector<std::array<cplx, 16>> zTfc(std::size_t(n + 1));
        for (int l = 0; l <= n; ++l) {
            for (int dd = 0; dd < 16; ++dd) {
                const int d1 = dd & 3;
                const int d2 = dd >> 2;
                zTfc[std::size_t(l)][std::size_t(dd)] =
                    tfc_amp(2, 1, spin_of(d2 & 1), spin_of(d1 & 1), theta[std::size_t(l)]) *
                    tfc_amp(2, -1, spin_of((d1 >> 1) & 1), spin_of((d2 >> 1) & 1),
                            theta[std::size_t(l)]);
            }
        }
        for (std::size_t cfg = 0; cfg < count; ++cfg) {
            cplx v = coarse_bath(cfg);
            for (int l = 0; l <= n; ++l)
                v *= zTfc[std::size_t(l)][std::size_t(slot(cfg, l) + 4 * slot(cfg, l + 1))];
            factors[cfg] = v;
        }
        return factors;
    }

    const int fineSlices = 2 * n + 2;
    const std::size_t fineCount = std::size_t(1) << (4 * (n + 1));

    std::optional<eta::EtaCaches> yCaches;
    std::vector<double> yScale;
    if (bth.has_noise(bath::Axis::Y, r)) {
        yCaches = eta::build_eta_caches(bth, bath::Axis::Y, r, dt);
        yScale = coupling_scales(bth, bath::Axis::Y, r, n, dt);
    }
    // fine slice p sits on slot 3*(p/2) + 1 + (p % 2)
    auto fine_slot = [](int p) { return 3 * (p >> 1) + 1 + (p & 1); };
    std::vector<std::array<cplx, 16>> yBath;
    if (yCaches) {
        for (int p2 = 0; p2 < fineSlices; ++p2)
            for (int p1 = 0; p1 <= p2; ++p1) {
                const bool inWindow = fine_slot(p2) - fine_slot(p1) <= windowSpan;
                yBath.push_back(bath_pair_table(
                    *yCaches, yScale, n,
                    inWindow ? std::vector<std::pair<int, int>>{{p1, p2}}
                             : std::vector<std::pair<int, int>>{}));
            }
    }

    std::vector<std::array<cplx, 16>> yTfc(std::size_t(n + 1));
    for (int l = 0; l <= n; ++l) {
        for (int i = 0; i < 16; ++i) {
            const double spLo = spin_of(i & 1);
            const double smLo = spin_of((i >> 1) & 1);
            const double spHi = spin_of((i >> 2) & 1);
            const double smHi = spin_of((i >> 3) & 1);
            yTfc[std::size_t(l)][std::size_t(i)] =
                tfc_amp(1, 1, spHi, spLo, theta[std::size_t(l)]) *
                tfc_amp(1, -1, smLo, smHi, theta[std::size_t(l)]);
        }
    }

    // Basis-change amplitudes tying one fine hex digit to the two adjacent
    // coarse slices, transposed so a fixed coarse pair selects a contiguous
    // 16-vector. Time-independent, so one table serves every l.
    std::array<std::array<cplx, 16>, 16> overlapByPair{};
    for (int dd = 0; dd < 16; ++dd) {
        const double zpLo = spin_of(dd & 1);
        const double zmLo = spin_of((dd >> 1) & 1);
        const double zpHi = spin_of((dd >> 2) & 1);
        const double zmHi = spin_of((dd >> 3) & 1);
        for (int i = 0; i < 16; ++i) {
            const double spLo = spin_of(i & 1);
            const double smLo = spin_of((i >> 1) & 1);
            const double spHi = spin_of((i >> 2) & 1);
            const double smHi = spin_of((i >> 3) & 1);
            overlapByPair[std::size_t(dd)][std::size_t(i)] =
                zy_amp(spLo, zpLo) * std::conj(zy_amp(smLo, zmLo)) *
                std::conj(zy_amp(spHi, zpHi)) * zy_amp(smHi, zmHi);
        }
    }

    // fine-only weight of every packed fine history
    std::vector<cplx> fineWeight(fineCount);
    for (std::size_t y = 0; y < fineCount; ++y) {
        cplx v(1.0, 0.0);
        for (int l = 0; l <= n; ++l) v *= yTfc[std::size_t(l)][(y >> (4 * l)) & 15];
        if (yCaches) {
            std::size_t pairIdx = 0;
            for (int p2 = 0; p2 < fineSlices; ++p2) {
                const int d2 = int(y >> (4 * (p2 >> 1) + 2 * (p2 & 1))) & 3;
                for (int p1 = 0; p1 <= p2; ++p1, ++pairIdx) {
                    const int d1 = int(y >> (4 * (p1 >> 1) + 2 * (p1 & 1))) & 3;
                    v *= yBath[pairIdx][std::size_t(d1 + 4 * d2)];
                }
            }
        }
        fineWeight[y] = v;
    }

    // For each coarse history, contract the fine weights against the per-l
    // overlap vectors, folding the highest hex digit first.
    std::vector<cplx> buf(fineCount >> 4);
    for (std::size_t cfg = 0; cfg < count; ++cfg) {
        std::size_t len = fineCount >> 4;
        {
            const auto& v = overlapByPair[std::size_t(slot(cfg, n) + 4 * slot(cfg, n + 1))];
            for (std::size_t p = 0; p < len; ++p) {
                cplx acc(0.0, 0.0);
                for (std::size_t i = 0; i < 16; ++i) acc += fineWeight[p + i * len] * v[i];
                buf[p] = acc;
            }
        }
        for (int l = n - 1; l >= 0; --l) {
            const auto& v = overlapByPair[std::size_t(slot(cfg, l) + 4 * slot(cfg, l + 1))];
            len >>= 4;
            for (std::size_t p = 0; p < len; ++p) {
                cplx acc(0.0, 0.0);
                for (std::size_t i = 0; i < 16; ++i) acc += buf[p + i * len] * v[i];
                buf[p] = acc;
            }
        }
        factors[cfg] = coarse_bath(cfg) * buf[0];
    }

    return factors;
}

}  // namespace

Eigen::MatrixXcd brute_force_rho(const model::SystemModel& sys, const bath::BathModel& bth,
                                 int n, double dt, const Eigen::VectorXcd& psi) {
    if (n < 1) throw std::invalid_argument("step count must be at least 1");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    auto problems = model::validate_model(sys);
    for (const auto& p : bath::validate_bath(bth)) problems.push_back(p);
    if (sys.L != bth.L) problems.push_back("system and bath chain sizes differ");
    if (!problems.empty()) throw std::invalid_argument(problems.front());

    const std::size_t L = sys.L;
    const bool fineGrid = bth.any_y_noise();
    if (L > 2 || n > 3) {
        const double paths = std::pow(4.0, double(L) * double(n + 2)) *
                             (fineGrid ? std::pow(16.0, double(L) * double(n + 1)) : 1.0);
        std::ostringstream msg;
        msg << "direct path summation over about " << paths
            << " configurations; refusing beyond L <= 2, n <= 3";
        throw std::invalid_argument(msg.str());
    }

    const Eigen::Index dim = Eigen::Index(1) << L;
    Eigen::VectorXcd psiN;
    if (psi.size() == 0) {
        psiN = Eigen::VectorXcd::Zero(dim);
        psiN(0) = 1.0;
    } else {
        if (psi.size() != dim)
            throw std::invalid_argument("initial state needs one amplitude per basis state");
        const double norm = psi.norm();
        if (!(norm > 0.0)) throw std::invalid_argument("initial state must be nonzero");
        psiN = psi / norm;
    }

    std::vector<std::vector<cplx>> factors;
    factors.reserve(L);
    for (std::size_t r = 0; r < L; ++r)
        factors.push_back(site_factors(sys, bth, r, n, dt, fineGrid));

    // longitudinal phase factors per slice over the cross-site slot pattern
    // (site r in bits 2r..2r+1), both branches combined
    const std::size_t crossCount = std::size_t(1) << (2 * L);
    std::vector<std::vector<cplx>> phase(std::size_t(n + 2), std::vector<cplx>(crossCount));
    for (int k = 0; k <= n + 1; ++k) {
        for (std::size_t e = 0; e < crossCount; ++e) {
            double phi = 0.0;
            for (int kp = k - 1; kp <= k; ++kp) {
                const double w = model::trotter_weight_w(n, kp);
                if (w == 0.0) continue;
                const double t = kp * dt;
                double diff = 0.0;  // forward-branch field energy minus backward
                for (std::size_t r = 0; r < L; ++r) {
                    const int d = int(e >> (2 * r)) & 3;
                    const double sp = spin_of(d & 1);
                    const double sm = spin_of((d >> 1) & 1);
                    if (!sys.hz[r].is_zero())
                        diff += model::eval_scalar(sys.hz[r], t) * (sp - sm);
                    if (r + 1 < L && !sys.Jzz[r].is_zero()) {
                        const int dn = int(e >> (2 * (r + 1))) & 3;
                        diff += model::eval_scalar(sys.Jzz[r], t) *
                                (sp * spin_of(dn & 1) - sm * spin_of((dn >> 1) & 1));
                    }
                }
                phi -= 0.5 * dt * w * diff;
            }
            phase[std::size_t(k)][e] = std::exp(cplx(0.0, phi));
        }
    }

    // initial-state amplitudes over the slice-0 slot pattern
    std::vector<cplx> init(crossCount);
    for (std::size_t e = 0; e < crossCount; ++e) {
        std::size_t row = 0;
        std::size_t col = 0;
        for (std::size_t r = 0; r < L; ++r) {
            const int d = int(e >> (2 * r)) & 3;
            row |= std::size_t(d & 1) << (L - 1 - r);
            col |= std::size_t((d >> 1) & 1) << (L - 1 - r);
        }
        init[e] = psiN(Eigen::Index(row)) * std::conj(psiN(Eigen::Index(col)));
    }

    const std::size_t perSite = std::size_t(1) << (2 * (n + 2));
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    std::vector<std::size_t> cfg(L, 0);
    while (true) {
        cplx v(1.0, 0.0);
        for (std::size_t r = 0; r < L; ++r) v *= factors[r][cfg[r]];
        for (int k = 0; k <= n + 1; ++k) {
            std::size_t e = 0;
            for (std::size_t r = 0; r < L; ++r) e |= std::size_t(slot(cfg[r], k)) << (2 * r);
            v *= phase[std::size_t(k)][e];
            if (k == 0) v *= init[e];
        }
        std::size_t row = 0;
        std::size_t col = 0;
        for (std::size_t r = 0; r < L; ++r) {
            const int d = slot(cfg[r], n + 1);
            row |= std::size_t(d & 1) << (L - 1 - r);
            col |= std::size_t((d >> 1) & 1) << (L - 1 - r);
        }
        out(Eigen::Index(row), Eigen::Index(col)) += v;

        std::size_t r = 0;
        while (r < L && ++cfg[r] == perSite) {
            cfg[r] = 0;
            ++r;
        }
        if (r == L) break;
    }
    return out;
}

}  // namespace quapi::obs
