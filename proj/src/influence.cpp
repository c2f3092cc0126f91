// influence.cpp - two-point influence factors and the iterative path MPS

#include "quapi/influence.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace quapi::infl {

namespace {

using cplx = std::complex<double>;

// Overlap <sigma_y, y | sigma_z, z> up to the shared normalization:
// (1 + sigma_z) + i * sigma_y * (sigma_z - 1), all over 2*sqrt(2).
cplx zy_overlap(int sy, int sz) {
    const double inv = 1.0 / (2.0 * std::sqrt(2.0));
    return inv * cplx(1.0 + sz, static_cast<double>(sy) * (sz - 1));
}

// One branch matrix element of exp(-i*alpha*theta*sigma_x/2) between
// eigenstates sa (row) and sb (column) of sigma_z (nu = Z) or sigma_y (nu = Y).
cplx tfc_branch(bath::Axis nu, int alpha, double theta, int sa, int sb) {
    const double c = std::cos(0.5 * theta);
    const double sn = std::sin(0.5 * theta);
    const double same = (sa == sb) ? 1.0 : 0.0;
    const double d = 0.5 * (sa - sb);
    if (nu == bath::Axis::Z) return cplx(same * c, -alpha * d * d * sn);
    return cplx(same * c - alpha * d * sn, 0.0);
}

// Refined-grid index pairs feeding the bath exponent for axis-z slots
// (q1, q2), q1 <= q2. The boundary ladder positions 0 and n+1 sit on single
// refined slices; interior positions straddle two.
int upsilon_z(int n, int q1, int q2, std::array<std::pair<int, int>, 4>& out) {
    const int lEnd = 2 * n + 1;
    if (q1 == 0 && q2 == 0) {
        out[0] = {0, 0};
        return 1;
    }
    if (q1 == 0) {
        if (q2 == n + 1) {
            out[0] = {0, lEnd};
            return 1;
        }
        out[0] = {0, 2 * q2 - 1};
        out[1] = {0, 2 * q2};
        return 2;
    }
    if (q1 == n + 1) {
        out[0] = {lEnd, lEnd};
        return 1;
    }
    if (q2 == n + 1) {
        out[0] = {2 * q1 - 1, lEnd};
        out[1] = {2 * q1, lEnd};
        return 2;
    }
    if (q1 < q2) {
        out[0] = {2 * q1 - 1, 2 * q2 - 1};
        out[1] = {2 * q1, 2 * q2 - 1};
        out[2] = {2 * q1 - 1, 2 * q2};
        out[3] = {2 * q1, 2 * q2};
        return 4;
    }
    out[0] = {2 * q1 - 1, 2 * q1 - 1};
    out[1] = {2 * q1 - 1, 2 * q1};
    out[2] = {2 * q1, 2 * q1};
    return 3;
}

}  // namespace

int g_alpha(int alpha, int j) {
    return alpha == 1 ? 1 - 2 * (j / 2) : 1 - 2 * (j % 2);
}

namespace {

// Window update exploiting the operator structure: every core of the update
// operator is diagonal in its own slot variable and diagonal in the bond
// carrying the new variable b, so the applied state splits into four blocks,
// each the old window rescaled entry-wise by the factors at fixed b. The
// blocks share both boundary bonds and are direct-summed on interior bonds.
// Right-canonicalizing them independently costs four chi-sized QR sweeps
// instead of one 4*chi-sized sweep; the assembled chain is right-canonical
// away from core 0 (the last cores have disjoint physical support across
// blocks), so only the truncating sweep remains.
tn::MPS apply_update_block(const SiteInfluence& s, int n, int m2, const tn::MPS& window,
                           const tn::CompressionParams& p, double& discarded) {
    const LayerMap map = layer_maps(n, s.deltaM == 3, s.kTau);
    const int mu = map.mu_tau(m2);
    const int w = static_cast<int>(window.cores.size());
    if (w != m2 - mu)
        throw std::runtime_error("influence window does not match its slot range");
    const bool terminal = (n != model::step_count_bulk) && (m2 == (n + 1) * s.deltaM);
    const int drLast = terminal ? 4 : 1;

    std::vector<std::array<cplx, 16>> factor(std::size_t(w), std::array<cplx, 16>{});
    for (int i = 0; i < w; ++i)
        for (int j = 0; j < 4; ++j)
            for (int b = 0; b < 4; ++b)
                factor[std::size_t(i)][std::size_t(4 * j + b)] =
                    two_point_total(s, n, mu + i, m2, j, b);
    std::array<cplx, 4> diag;
    for (int j = 0; j < 4; ++j) diag[std::size_t(j)] = two_point_total(s, n, m2, m2, j, j);

    std::array<std::vector<tn::DenseTensor>, 4> block;
    for (int b = 0; b < 4; ++b) {
        auto& chain = block[std::size_t(b)];
        chain.reserve(std::size_t(w) + 1);
        for (int i = 0; i < w; ++i) {
            tn::DenseTensor c = window.cores[std::size_t(i)];
            for (int l = 0; l < c.shape[0]; ++l)
                for (int j = 0; j < 4; ++j) {
                    const cplx f = factor[std::size_t(i)][std::size_t(4 * j + b)];
                    for (int r = 0; r < c.shape[2]; ++r) c.at3(l, j, r) *= f;
                }
            chain.push_back(std::move(c));
        }
        auto last = tn::DenseTensor::zeros({1, 4, drLast});
        last.at3(0, b, terminal ? b : 0) = diag[std::size_t(b)];
        chain.push_back(std::move(last));
        for (std::size_t i = chain.size() - 1; i >= 1; --i)
            tn::right_canonicalize_site(chain, i);
    }

    tn::MPS out;
    out.cores.reserve(std::size_t(w) + 1);
    for (int i = 0; i <= w; ++i) {
        int sumL = 0, sumR = 0;
        for (int b = 0; b < 4; ++b) {
            sumL += block[std::size_t(b)][std::size_t(i)].shape[0];
            sumR += block[std::size_t(b)][std::size_t(i)].shape[2];
        }
        const int dl = (i == 0) ? block[0][std::size_t(i)].shape[0] : sumL;
        const int dr = (i == w) ? drLast : sumR;
        auto core = tn::DenseTensor::zeros({dl, 4, dr});
        int offL = 0, offR = 0;
        for (int b = 0; b < 4; ++b) {
            const auto& c = block[std::size_t(b)][std::size_t(i)];
            const int bl = (i == 0) ? 0 : offL;
            const int br = (i == w) ? 0 : offR;
            for (int l = 0; l < c.shape[0]; ++l)
                for (int j = 0; j < 4; ++j)
                    for (int r = 0; r < c.shape[2]; ++r)
                        core.at3(bl + l, j, br + r) += c.at3(l, j, r);
            offL += c.shape[0];
            offR += c.shape[2];
        }
        out.cores.push_back(std::move(core));
    }

    auto res = tn::compress_right_canonical(out, p);
    discarded += res.discardedWeight;
    return std::move(res.mps);
}

}  // namespace

int overbar(int j) {
    static const int table[4] = {0, 2, 1, 3};
    return table[j];
}

bath::Axis LayerMap::tilde_nu(int m) const {
    return (deltaM == 1 || m % 3 == 0) ? bath::Axis::Z : bath::Axis::Y;
}

int LayerMap::tilde_q(int m) const {
    if (deltaM == 1) return m;
    return (2 - ((m + 2) % 3) / 2) * (m / 3) + ((m % 3) + 1) / 3;
}

int LayerMap::mu_tau(int m) const {
    return std::max(0, m - kTau * deltaM + 1);
}

LayerMap layer_maps(int n, bool hasYnoise, int kTau) {
    if (n < 1) throw std::invalid_argument("layer_maps: n must be at least 1");
    if (kTau < 1) throw std::invalid_argument("layer_maps: kTau must be at least 1");
    LayerMap m;
    m.deltaM = hasYnoise ? 3 : 1;
    m.n = n;
    m.kTau = kTau;
    return m;
}

SiteInfluence SiteInfluence::make(const model::SystemModel& sys, const bath::BathModel& b,
                                  std::size_t r, double dt) {
    if (sys.L != b.L) throw std::invalid_argument("SiteInfluence: chain and bath sizes differ");
    if (r >= sys.L) throw std::invalid_argument("SiteInfluence: site index out of range");
    if (!(dt > 0.0)) throw std::invalid_argument("SiteInfluence: dt must be positive");
    SiteInfluence s;
    s.r = r;
    s.dt = dt;
    s.sys = &sys;
    s.bathModel = &b;
    s.kTau = eta::k_tau(b.tau, dt);
    s.deltaM = b.any_y_noise() ? 3 : 1;
    s.cachesY = eta::build_eta_caches(b, bath::Axis::Y, r, dt);
    s.cachesZ = eta::build_eta_caches(b, bath::Axis::Z, r, dt);
    return s;
}

std::complex<double> two_point_bath(const SiteInfluence& s, bath::Axis nu, int n, int m1,
                                    int m2, int j1, int j2) {
    const LayerMap map = layer_maps(n, s.deltaM == 3, s.kTau);
    if (m1 < 0 || m1 > m2) throw std::invalid_argument("two_point_bath: need 0 <= m1 <= m2");
    if (map.tilde_nu(m1) != nu || map.tilde_nu(m2) != nu)
        throw std::invalid_argument("two_point_bath: slot axis mismatch");
    const int q1 = map.tilde_q(m1);
    const int q2 = map.tilde_q(m2);

    std::array<std::pair<int, int>, 4> pairs;
    int count = 0;
    if (nu == bath::Axis::Y) {
        pairs[0] = {q1, q2};
        count = 1;
    } else {
        count = upsilon_z(n, q1, q2, pairs);
    }

    const auto& caches = (nu == bath::Axis::Y) ? s.cachesY : s.cachesZ;
    const auto& scale = s.bathModel->couplingScale[static_cast<std::size_t>(nu)][s.r];
    const double diff2 = g_alpha(1, j2) - g_alpha(-1, j2);
    const double diff1 = g_alpha(1, j1) - g_alpha(-1, j1);
    const double sum1 = g_alpha(1, j1) + g_alpha(-1, j1);

    cplx acc(0.0, 0.0);
    for (int p = 0; p < count; ++p) {
        const int lo = pairs[p].first;
        const int hi = pairs[p].second;
        const auto etaOpt = eta::eta_lookup(caches, n, hi, lo);
        if (!etaOpt) continue;
        const double eLo = model::eval_scalar(scale, (lo / 2) * s.dt);
        const double eHi = model::eval_scalar(scale, (hi / 2) * s.dt);
        acc += eLo * eHi * diff2 * cplx(diff1 * etaOpt->real(), sum1 * etaOpt->imag());
    }
    return std::exp(-acc);
}

std::complex<double> two_point_tfc(const SiteInfluence& s, bath::Axis nu, int n, int k,
                                   int j1, int j2) {
    const double hx = model::eval_scalar(s.sys->hx[s.r], k * s.dt);
    const double theta = 2.0 * s.dt * model::trotter_weight_w(n, k) * hx;
    return tfc_branch(nu, +1, theta, g_alpha(1, j2), g_alpha(1, j1)) *
           tfc_branch(nu, -1, theta, g_alpha(-1, j1), g_alpha(-1, j2));
}

std::complex<double> two_point_yz(YZKind kind, int a1, int a2) {
    switch (kind) {
        case YZKind::ZtoY:
            return zy_overlap(a1, a2);
        case YZKind::YtoZ:
            return std::conj(zy_overlap(a2, a1));
        case YZKind::YZ1:
            // a1 on the earlier y slot, a2 on the later z slot.
            return std::conj(zy_overlap(g_alpha(1, a1), g_alpha(1, a2))) *
                   zy_overlap(g_alpha(-1, a1), g_alpha(-1, a2));
        case YZKind::YZ2:
            // a1 on the earlier z slot, a2 on the later y slot.
            return zy_overlap(g_alpha(1, a2), g_alpha(1, a1)) *
                   std::conj(zy_overlap(g_alpha(-1, a2), g_alpha(-1, a1)));
    }
    throw std::invalid_argument("two_point_yz: unknown direction");
}

std::complex<double> two_point_total(const SiteInfluence& s, int n, int m1, int m2, int j1,
                                     int j2) {
    const LayerMap map = layer_maps(n, s.deltaM == 3, s.kTau);
    if (m1 > m2 || m1 < map.mu_tau(m2))
        throw std::invalid_argument("two_point_total: slot pair outside the memory window");
    if (j1 < 0 || j1 > 3 || j2 < 0 || j2 > 3)
        throw std::invalid_argument("two_point_total: path variables must be in 0..3");

    if (s.deltaM == 1) {
        const cplx b = two_point_bath(s, bath::Axis::Z, n, m1, m2, j1, j2);
        if (m1 == m2 - 1) return two_point_tfc(s, bath::Axis::Z, n, map.tilde_q(m1), j1, j2) * b;
        return b;
    }

    // Three slots per step: z at m % 3 == 0, y at the other two. Only pairs on
    // a shared axis or at adjacent slots couple; everything else is 1.
    const bool adj = (m1 == m2 - 1);
    switch (m2 % 3) {
        case 0:
            if (m1 % 3 == 0) return two_point_bath(s, bath::Axis::Z, n, m1, m2, j1, j2);
            if (adj) return two_point_yz(YZKind::YZ1, j1, j2);
            return cplx(1.0, 0.0);
        case 1:
            if (adj) return two_point_yz(YZKind::YZ2, j1, j2);
            if (m1 % 3 != 0) return two_point_bath(s, bath::Axis::Y, n, m1, m2, j1, j2);
            return cplx(1.0, 0.0);
        default:
            if (adj)
                return two_point_tfc(s, bath::Axis::Y, n, map.tilde_q(m1) / 2, j1, j2) *
                       two_point_bath(s, bath::Axis::Y, n, m1, m2, j1, j2);
            if (m1 % 3 != 0) return two_point_bath(s, bath::Axis::Y, n, m1, m2, j1, j2);
            return cplx(1.0, 0.0);
    }
}

tn::DenseTensor influence_node(const SiteInfluence& s, int n, int m2) {
    auto t = tn::DenseTensor::zeros({4, 4, 1});
    for (int j = 0; j < 4; ++j) t.at3(j, j, 0) = two_point_total(s, n, m2, m2, j, j);
    return t;
}

tn::DenseTensor trivial_node() {
    auto t = tn::DenseTensor::zeros({1, 4, 1});
    for (int j = 0; j < 4; ++j) t.at3(0, j, 0) = tn::cplx(1.0, 0.0);
    return t;
}

tn::MPO influence_mpo(const SiteInfluence& s, int n, int m2) {
    if (m2 < 1) throw std::invalid_argument("influence_mpo: target slot must be at least 1");
    const LayerMap map = layer_maps(n, s.deltaM == 3, s.kTau);
    const int mu = map.mu_tau(m2);
    const bool terminal = (n != model::step_count_bulk) && (m2 == (n + 1) * s.deltaM);

    tn::MPO o;
    o.cores.reserve(std::size_t(m2 - mu + 1));
    for (int m1 = mu; m1 <= m2; ++m1) {
        const int dl = (m1 == mu) ? 1 : 4;
        const int dr = (m1 < m2) ? 4 : (terminal ? 4 : 1);
        auto core = tn::DenseTensor::zeros({dl, 4, 4, dr});
        if (m1 < m2) {
            // Interior core: diagonal in this slot's variable, the right bond
            // routes the new slot's variable b toward the left edge.
            for (int j = 0; j < 4; ++j)
                for (int b = 0; b < 4; ++b) {
                    const tn::cplx v = two_point_total(s, n, m1, m2, j, b);
                    if (dl == 1)
                        core.at4(0, j, j, b) = v;
                    else
                        core.at4(b, j, j, b) = v;
                }
        } else {
            // Last core: pins the bond to the new variable; with a finite step
            // count at the final slot it also exposes the open output leg.
            for (int j = 0; j < 4; ++j) {
                const tn::cplx v = two_point_total(s, n, m2, m2, j, j);
                if (terminal)
                    core.at4(j, j, j, j) = v;
                else
                    core.at4(j, j, j, 0) = v;
            }
        }
        o.cores.push_back(std::move(core));
    }
    return o;
}

InfluencePath::InfluencePath(const SiteInfluence& site, tn::CompressionParams params)
    : site_(&site), params_(params) {
    if (params_.renormalize)
        throw std::invalid_argument("InfluencePath: compression must keep absolute scale");
    window_.cores.push_back(influence_node(site, model::step_count_bulk, 0));
}

void InfluencePath::step() {
    const int mNew = m2_ + 1;
    const LayerMap map = layer_maps(model::step_count_bulk, site_->deltaM == 3, site_->kTau);

    // Window invariant on entry: cores cover slots [mu_tau(mNew), m2_].
    if (params_.method == tn::CompressionParams::Method::Direct) {
        window_ = apply_update_block(*site_, model::step_count_bulk, mNew, window_, params_,
                                     discarded_);
    } else {
        window_.cores.push_back(trivial_node());
        tn::MPS applied =
            tn::apply_mpo(influence_mpo(*site_, model::step_count_bulk, mNew), window_);
        auto res = tn::compress(applied, params_);
        discarded_ += res.discardedWeight;
        window_ = std::move(res.mps);
    }

    if (map.mu_tau(mNew + 1) >= 1) {
        archive_.push_back(std::move(window_.cores.front()));
        window_.cores.erase(window_.cores.begin());
    }
    m2_ = mNew;
}

FinalizedInfluence InfluencePath::finalize(int n) const {
    if (n < 1) throw std::invalid_argument("InfluencePath::finalize: n must be at least 1");
    const int dm = site_->deltaM;
    if (m2_ != n * dm - 1)
        throw std::runtime_error("InfluencePath::finalize: window is not at slot n*deltaM - 1");
    const LayerMap map = layer_maps(n, dm == 3, site_->kTau);

    FinalizedInfluence out;
    out.mLo = map.mu_tau(n * dm);

    tn::MPS w = window_;
    const int mEnd = (n + 1) * dm;
    for (int mNew = n * dm; mNew <= mEnd; ++mNew) {
        if (params_.method == tn::CompressionParams::Method::Direct) {
            w = apply_update_block(*site_, n, mNew, w, params_, out.discardedWeight);
        } else {
            w.cores.push_back(trivial_node());
            tn::MPS applied = tn::apply_mpo(influence_mpo(*site_, n, mNew), w);
            auto res = tn::compress(applied, params_);
            out.discardedWeight += res.discardedWeight;
            w = std::move(res.mps);
        }
        if (mNew < mEnd && map.mu_tau(mNew + 1) >= 1) {
            out.nodes.push_back(std::move(w.cores.front()));
            w.cores.erase(w.cores.begin());
        }
    }
    for (auto& c : w.cores) out.nodes.push_back(std::move(c));

    if (out.nodes.size() != std::size_t(mEnd - out.mLo + 1))
        throw std::runtime_error("InfluencePath::finalize: node table size mismatch");
    return out;
}

void InfluencePath::restore(tn::MPS window, std::vector<tn::DenseTensor> archive, int m2,
                            double discarded) {
    if (m2 < 0) throw std::invalid_argument("InfluencePath::restore: negative slot");
    const LayerMap map = layer_maps(model::step_count_bulk, site_->deltaM == 3, site_->kTau);
    if (int(archive.size()) != map.mu_tau(m2 + 1))
        throw std::invalid_argument("InfluencePath::restore: archive size off the window edge");
    if (window.cores.size() != std::size_t(m2 + 1) - archive.size())
        throw std::invalid_argument("InfluencePath::restore: window size mismatch");
    window.check();
    window_ = std::move(window);
    archive_ = std::move(archive);
    m2_ = m2;
    discarded_ = discarded;
}

}  // namespace quapi::infl
