// evolution.cpp - density-chain time stepping by windowed transfer operators

#include "quapi/evolution.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "quapi/phasefactor.hpp"

namespace quapi::evo {

namespace {

using tn::cplx;

bool is_bulk(TransferKind kind) {
    return kind == TransferKind::BulkInit || kind == TransferKind::BulkStride;
}

bool is_init(TransferKind kind) {
    return kind == TransferKind::BulkInit || kind == TransferKind::FiniteInit;
}

}  // namespace

tn::MPS product_state(const std::vector<Eigen::Vector2cd>& amps) {
    if (amps.empty()) throw std::invalid_argument("product_state: empty chain");
    tn::MPS psi;
    for (const auto& a : amps) {
        tn::DenseTensor core = tn::DenseTensor::zeros({1, 2, 1});
        core.at3(0, 0, 0) = a(0);
        core.at3(0, 1, 0) = a(1);
        psi.cores.push_back(std::move(core));
    }
    return psi;
}

tn::MPS init_density_mps(const tn::MPS& psi) {
    psi.check();
    if (psi.sites() == 0) throw std::invalid_argument("init_density_mps: empty chain");
    for (std::size_t r = 0; r < psi.sites(); ++r)
        if (psi.phys_dim(r) != 2)
            throw std::invalid_argument("init_density_mps: physical dimension must be 2");
    if (psi.cores.front().shape[0] != 1 || psi.cores.back().shape[2] != 1)
        throw std::invalid_argument("init_density_mps: terminal bonds must have extent 1");

    tn::MPS src = psi;
    const double n2 = tn::norm_squared(src);
    if (!(n2 > 0.0)) throw std::invalid_argument("init_density_mps: state has zero norm");
    if (std::abs(n2 - 1.0) > 1e-12) {
        std::cerr << "init_density_mps: input state is not normalized; renormalizing\n";
        const double s = 1.0 / std::sqrt(n2);
        for (auto& v : src.cores.front().data) v *= s;
    }

    // Forward and backward branches ride side by side: physical value j splits
    // into the spin pair (j >> 1, j & 1) and each bond squares.
    tn::MPS rho;
    for (std::size_t r = 0; r < src.sites(); ++r) {
        const tn::DenseTensor& m = src.cores[r];
        const int dl = m.shape[0];
        const int dr = m.shape[2];
        tn::DenseTensor core = tn::DenseTensor::zeros({dl * dl, 4, dr * dr});
        for (int a1 = 0; a1 < dl; ++a1)
            for (int a2 = 0; a2 < dl; ++a2)
                for (int j = 0; j < 4; ++j)
                    for (int b1 = 0; b1 < dr; ++b1)
                        for (int b2 = 0; b2 < dr; ++b2)
                            core.at3(a1 * dl + a2, j, b1 * dr + b2) =
                                m.at3(a1, j >> 1, b1) * std::conj(m.at3(a2, j & 1, b2));
        rho.cores.push_back(std::move(core));
    }
    return rho;
}

tn::MPO build_transfer_mpo(const model::SystemModel& sys, double dt, TransferKind kind, int n,
                           int k,
                           const std::vector<std::vector<const tn::DenseTensor*>>& siteNodes) {
    if (siteNodes.size() != sys.L)
        throw std::invalid_argument("build_transfer_mpo: one node chain per site required");
    if (is_bulk(kind)) {
        if (n != model::step_count_bulk)
            throw std::invalid_argument(
                "build_transfer_mpo: bulk kinds take the bulk step-count sentinel");
    } else if (n < 1 || n >= model::step_count_bulk) {
        throw std::invalid_argument("build_transfer_mpo: finite step count required");
    }
    const bool isStride =
        kind == TransferKind::BulkStride || kind == TransferKind::FiniteStride;
    if (isStride && k < 0) throw std::invalid_argument("build_transfer_mpo: negative stride");
    if (kind == TransferKind::FiniteStride && k >= n)
        throw std::invalid_argument("build_transfer_mpo: stride index beyond the step count");

    int slice = 0;
    if (kind == TransferKind::FiniteFinal)
        slice = n + 1;
    else if (isStride)
        slice = k + 1;
    tn::MPS ph = phase::build_phase_mps(sys, dt, n, slice);

    tn::MPO op;
    for (std::size_t r = 0; r < sys.L; ++r) {
        const auto& chain = siteNodes[r];
        if (chain.empty())
            throw std::invalid_argument("build_transfer_mpo: empty node chain");
        if (is_init(kind) && chain.size() != 1)
            throw std::invalid_argument("build_transfer_mpo: init kinds consume a single node");
        for (const tn::DenseTensor* nd : chain)
            if (nd == nullptr || nd->shape.size() != 3 || nd->shape[1] != 4)
                throw std::invalid_argument("build_transfer_mpo: malformed influence node");
        for (std::size_t p = 0; p + 1 < chain.size(); ++p)
            if (chain[p]->shape[2] != chain[p + 1]->shape[0])
                throw std::invalid_argument("build_transfer_mpo: node chain bonds do not match");

        const int dIn = chain.front()->shape[0];
        const int dOut = chain.back()->shape[2];

        // Physical legs of all nodes but the last are free sums; collapse each
        // such node to a bond matrix and multiply them out.
        Eigen::MatrixXcd left = Eigen::MatrixXcd::Identity(dIn, dIn);
        for (std::size_t p = 0; p + 1 < chain.size(); ++p) {
            const tn::DenseTensor& nd = *chain[p];
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nd.shape[0], nd.shape[2]);
            for (int a = 0; a < nd.shape[0]; ++a)
                for (int j = 0; j < 4; ++j)
                    for (int b = 0; b < nd.shape[2]; ++b) m(a, b) += nd.at3(a, j, b);
            left = left * m;
        }

        // The last node's physical leg is the one the phase factor sees.
        const tn::DenseTensor& last = *chain.back();
        std::array<Eigen::MatrixXcd, 4> bj;
        for (int j = 0; j < 4; ++j) {
            Eigen::MatrixXcd lj = Eigen::MatrixXcd::Zero(last.shape[0], dOut);
            for (int c = 0; c < last.shape[0]; ++c)
                for (int b = 0; b < dOut; ++b) lj(c, b) = last.at3(c, j, b);
            bj[std::size_t(j)] = left * lj;
        }

        const tn::DenseTensor& phc = ph.cores[r];
        const int cl = phc.shape[0];
        const int cr = phc.shape[2];
        tn::DenseTensor w = tn::DenseTensor::zeros({cl, dOut, dIn, cr});
        for (int a = 0; a < cl; ++a)
            for (int j = 0; j < 4; ++j)
                for (int b = 0; b < cr; ++b) {
                    const cplx pv = phc.at3(a, j, b);
                    if (pv == cplx(0.0, 0.0)) continue;
                    const Eigen::MatrixXcd& bm = bj[std::size_t(j)];
                    for (int in = 0; in < dIn; ++in)
                        for (int out = 0; out < dOut; ++out)
                            w.at4(a, out, in, b) += pv * bm(in, out);
                }
        op.cores.push_back(std::move(w));
    }
    op.check();
    return op;
}

SystemState::SystemState(const model::SystemModel& sys, const bath::BathModel& bth, double dt,
                         const tn::CompressionParams& params, const tn::MPS& psi)
    : sys_(sys), bath_(bth), dt_(dt), stateParams_(params), pathParams_(params) {
    auto problems = model::validate_model(sys_);
    for (const auto& p : bath::validate_bath(bath_)) problems.push_back(p);
    if (!problems.empty())
        throw std::invalid_argument("SystemState: " + problems.front());
    if (bath_.L != sys_.L)
        throw std::invalid_argument("SystemState: model and bath chain lengths differ");
    if (!(dt_ > 0.0)) throw std::invalid_argument("SystemState: dt must be positive");
    if (psi.sites() != sys_.L)
        throw std::invalid_argument("SystemState: initial state length does not match the chain");

    // The density chain carries the running norm in a scalar ledger; the
    // influence paths must keep their absolute scale.
    stateParams_.renormalize = true;
    pathParams_.renormalize = false;

    sites_.reserve(sys_.L);
    for (std::size_t r = 0; r < sys_.L; ++r)
        sites_.push_back(infl::SiteInfluence::make(sys_, bath_, r, dt_));
    deltaM_ = sites_.front().deltaM;
    kTau_ = sites_.front().kTau;

    paths_.reserve(sys_.L);
    for (std::size_t r = 0; r < sys_.L; ++r) paths_.emplace_back(sites_[r], pathParams_);
    pathDiscSeen_.assign(sys_.L, 0.0);

    rho0_ = init_density_mps(psi);
    rho_ = rho0_;
    vdash_ = rho0_;
}

void SystemState::apply_and_compress(const tn::MPO& op, tn::MPS& state, double& log,
                                     double& disc) {
    tn::MPS applied = tn::apply_mpo(op, state);
    tn::CompressResult res = tn::compress(applied, stateParams_);
    disc += res.discardedWeight;
    log += res.logNorm;
    state = std::move(res.mps);
}

void SystemState::advance_vdash_to(int mu, double& stateDisc) {
    const int dm = deltaM_;
    const std::size_t L = sys_.L;
    std::vector<std::vector<const tn::DenseTensor*>> nodes(L);
    while (mVdash_ < mu) {
        if (mVdash_ == 0) {
            for (std::size_t r = 0; r < L; ++r) nodes[r] = {&paths_[r].archive().at(0)};
            apply_and_compress(build_transfer_mpo(sys_, dt_, TransferKind::BulkInit,
                                                  model::step_count_bulk, 0, nodes),
                               vdash_, vdashLog_, stateDisc);
            mVdash_ = 1;
        } else {
            const int k = (mVdash_ - 1) / dm;
            for (std::size_t r = 0; r < L; ++r) {
                nodes[r].clear();
                for (int m = mVdash_; m < mVdash_ + dm; ++m)
                    nodes[r].push_back(&paths_[r].archive().at(std::size_t(m)));
            }
            apply_and_compress(build_transfer_mpo(sys_, dt_, TransferKind::BulkStride,
                                                  model::step_count_bulk, k, nodes),
                               vdash_, vdashLog_, stateDisc);
            mVdash_ += dm;
        }
    }
}

void SystemState::evolve_step() {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = n_ + 1;
    const int dm = deltaM_;
    const std::size_t L = sys_.L;

    // Bring every influence window to slot n*dm - 1 and close it out at the
    // new step count.
    for (auto& p : paths_)
        while (p.current_m2() < n * dm - 1) p.step();

    std::vector<infl::FinalizedInfluence> fins;
    fins.reserve(L);
    for (auto& p : paths_) fins.push_back(p.finalize(n));
    const int mLo = fins.front().mLo;

    double inflDisc = 0.0;
    for (std::size_t r = 0; r < L; ++r) {
        inflDisc += paths_[r].discarded() - pathDiscSeen_[r] + fins[r].discardedWeight;
        pathDiscSeen_[r] = paths_[r].discarded();
    }

    double stateDisc = 0.0;
    std::vector<std::vector<const tn::DenseTensor*>> nodes(L);

    tn::MPS state;
    double log = 0.0;
    int kStart = 0;
    if (n <= kTau_ - 1) {
        // The whole history fits in the memory window: rebuild from the
        // initial chain, starting with the closed-out slot-0 node.
        state = rho0_;
        for (std::size_t r = 0; r < L; ++r) nodes[r] = {&fins[r].nodes.at(0)};
        apply_and_compress(build_transfer_mpo(sys_, dt_, TransferKind::FiniteInit, n, 0, nodes),
                           state, log, stateDisc);
    } else {
        // Window edge reached: pick up the long-time stage at the first slot
        // still inside the window.
        const int mu = (n - kTau_) * dm + 1;
        advance_vdash_to(mu, stateDisc);
        state = vdash_;
        log = vdashLog_;
        kStart = n - kTau_;
    }

    for (int k = kStart; k < n; ++k) {
        for (std::size_t r = 0; r < L; ++r) {
            nodes[r].clear();
            for (int m = k * dm + 1; m <= (k + 1) * dm; ++m)
                nodes[r].push_back(&fins[r].nodes.at(std::size_t(m - mLo)));
        }
        apply_and_compress(build_transfer_mpo(sys_, dt_, TransferKind::FiniteStride, n, k, nodes),
                           state, log, stateDisc);
    }

    for (std::size_t r = 0; r < L; ++r) {
        nodes[r].clear();
        for (int m = n * dm + 1; m <= (n + 1) * dm; ++m)
            nodes[r].push_back(&fins[r].nodes.at(std::size_t(m - mLo)));
    }
    apply_and_compress(build_transfer_mpo(sys_, dt_, TransferKind::FiniteFinal, n, 0, nodes),
                       state, log, stateDisc);

    rho_ = std::move(state);
    logScale_ = log;
    n_ = n;

    StepReport rep;
    rep.n = n;
    rep.influenceDiscarded = inflDisc;
    rep.stateDiscarded = stateDisc;
    rep.maxBond = rho_.max_bond();
    rep.logScale = logScale_;
    rep.wallSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history_.push_back(rep);
}

StateSnapshot SystemState::capture() const {
    StateSnapshot s;
    s.version = 1;
    s.L = sys_.L;
    s.deltaM = deltaM_;
    s.kTau = kTau_;
    s.n = n_;
    s.dt = dt_;
    s.logScale = logScale_;
    s.vdashLog = vdashLog_;
    s.mVdash = mVdash_;
    s.rho0 = rho0_;
    s.vdash = vdash_;
    s.rho = rho_;
    for (const auto& p : paths_) {
        s.windows.push_back(p.window());
        s.archives.push_back(p.archive());
        s.pathSlots.push_back(p.current_m2());
        s.pathDiscarded.push_back(p.discarded());
    }
    s.history = history_;
    return s;
}

void SystemState::restore(const StateSnapshot& s) {
    if (s.version != 1)
        throw std::invalid_argument("SystemState::restore: unknown snapshot version");
    if (s.L != sys_.L || s.deltaM != deltaM_ || s.kTau != kTau_)
        throw std::invalid_argument("SystemState::restore: snapshot grids do not match");
    if (s.dt != dt_)
        throw std::invalid_argument("SystemState::restore: snapshot time step does not match");
    if (s.n < 0 || s.mVdash < 0)
        throw std::invalid_argument("SystemState::restore: negative counters");
    if (s.windows.size() != sys_.L || s.archives.size() != sys_.L ||
        s.pathSlots.size() != sys_.L || s.pathDiscarded.size() != sys_.L)
        throw std::invalid_argument("SystemState::restore: per-site table size mismatch");
    s.rho0.check();
    s.vdash.check();
    s.rho.check();
    for (std::size_t r = 0; r < sys_.L; ++r)
        paths_[r].restore(s.windows[r], s.archives[r], s.pathSlots[r], s.pathDiscarded[r]);
    rho0_ = s.rho0;
    vdash_ = s.vdash;
    rho_ = s.rho;
    logScale_ = s.logScale;
    vdashLog_ = s.vdashLog;
    mVdash_ = s.mVdash;
    n_ = s.n;
    history_ = s.history;
    pathDiscSeen_ = s.pathDiscarded;
}

}  // namespace quapi::evo
