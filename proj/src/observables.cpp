// observables.cpp - density-chain readout: trace, operator products, probabilities

#include "quapi/observables.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace quapi::obs {

namespace {

constexpr int kOverbar[4] = {0, 2, 1, 3};

// Matrix element <g1(j) z| O |g-1(j) z> of a 2x2 operator, using the packing
// of the base-4 slot into forward (high bit) and backward (low bit) spins.
cplx slot_element(const Eigen::MatrixXcd& op, int j) { return op(j >> 1, j & 1); }

// Contract one site over its physical leg with the given slot weights.
Eigen::MatrixXcd weighted_transfer(const tn::DenseTensor& core, const cplx (&w)[4]) {
    const int dl = core.shape[0];
    const int dr = core.shape[2];
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(dl, dr);
    for (int j = 0; j < 4; ++j) {
        if (w[j] == cplx(0.0, 0.0)) continue;
        for (int a = 0; a < dl; ++a)
            for (int c = 0; c < dr; ++c) t(a, c) += w[j] * core.at3(a, j, c);
    }
    return t;
}

void check_density_chain(const tn::MPS& rho) {
    if (rho.cores.empty()) throw std::invalid_argument("density chain is empty");
    rho.check();
    for (std::size_t i = 0; i < rho.cores.size(); ++i)
        if (rho.phys_dim(i) != 4)
            throw std::invalid_argument("density chain must have physical extent 4");
    if (rho.cores.front().shape[0] != 1 || rho.cores.back().shape[2] != 1)
        throw std::invalid_argument("density chain must have closed terminal bonds");
}

// Product of weighted transfer matrices over the whole chain. weights[r] maps
// the slot index to its factor at site r.
cplx contract_weights(const tn::MPS& rho, const std::vector<std::array<cplx, 4>>& weights) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
    for (std::size_t r = 0; r < rho.cores.size(); ++r) {
        cplx w[4] = {weights[r][0], weights[r][1], weights[r][2], weights[r][3]};
        acc = acc * weighted_transfer(rho.cores[r], w);
    }
    return acc(0, 0);
}

std::array<cplx, 4> trace_weights() { return {cplx(1.0), cplx(0.0), cplx(0.0), cplx(1.0)}; }

std::array<cplx, 4> operator_weights(const Eigen::MatrixXcd& op) {
    std::array<cplx, 4> w{};
    for (int j = 0; j < 4; ++j) w[std::size_t(j)] = slot_element(op, kOverbar[j]);
    return w;
}

}  // namespace

cplx trace_rho(const tn::MPS& rho) {
    check_density_chain(rho);
    std::vector<std::array<cplx, 4>> weights(rho.sites(), trace_weights());
    return contract_weights(rho, weights);
}

cplx expect_product(const tn::MPS& rho, std::size_t firstSite,
                    const std::vector<Eigen::MatrixXcd>& ops) {
    check_density_chain(rho);
    if (firstSite + ops.size() > rho.sites())
        throw std::invalid_argument("operator range extends past the chain");
    for (const auto& op : ops)
        if (op.rows() != 2 || op.cols() != 2)
            throw std::invalid_argument("site operators must be 2x2 matrices");

    std::vector<std::array<cplx, 4>> weights(rho.sites(), trace_weights());
    for (std::size_t i = 0; i < ops.size(); ++i) weights[firstSite + i] = operator_weights(ops[i]);

    const cplx tr = contract_weights(
        rho, std::vector<std::array<cplx, 4>>(rho.sites(), trace_weights()));
    if (tr == cplx(0.0, 0.0)) throw std::runtime_error("density chain has zero trace");
    return contract_weights(rho, weights) / tr;
}

double spin_config_prob(const tn::MPS& rho, const std::vector<int>& config) {
    check_density_chain(rho);
    if (config.size() != rho.sites())
        throw std::invalid_argument("configuration length must match the chain");
    std::vector<Eigen::MatrixXcd> projectors;
    projectors.reserve(config.size());
    for (int s : config) {
        if (s != 1 && s != -1) throw std::invalid_argument("configuration entries must be +-1");
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(2, 2);
        p(0, 0) = 0.5 * (1.0 + s);
        p(1, 1) = 0.5 * (1.0 - s);
        projectors.push_back(p);
    }
    return expect_product(rho, 0, projectors).real();
}

double energy_per_cell(const tn::MPS& rho, const model::SystemModel& sys, double t) {
    check_density_chain(rho);
    if (rho.sites() != sys.L)
        throw std::invalid_argument("model size must match the density chain");

    Eigen::MatrixXcd sx = Eigen::MatrixXcd::Zero(2, 2);
    sx(0, 1) = 1.0;
    sx(1, 0) = 1.0;
    Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(2, 2);
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;

    double total = 0.0;
    for (std::size_t r = 0; r < sys.L; ++r) {
        if (!sys.hx[r].is_zero())
            total += model::eval_scalar(sys.hx[r], t) * expect_product(rho, r, {sx}).real();
        if (!sys.hz[r].is_zero())
            total += model::eval_scalar(sys.hz[r], t) * expect_product(rho, r, {sz}).real();
        if (r + 1 < sys.L && !sys.Jzz[r].is_zero())
            total += model::eval_scalar(sys.Jzz[r], t) * expect_product(rho, r, {sz, sz}).real();
    }
    return total;
}

RealignmentResult realignment_check(const tn::MPS& rho) {
    check_density_chain(rho);
    const double tr = std::abs(trace_rho(rho));
    if (tr == 0.0) throw std::runtime_error("density chain has zero trace");

    RealignmentResult out;
    for (std::size_t r = 1; r < rho.sites(); ++r) {
        double sum = 0.0;
        for (double s : tn::schmidt_at_bond(rho, r)) sum += s;
        sum /= tr;
        out.schmidtSums.push_back(sum);
        out.entangled.push_back(sum > 1.0 + 1e-10);
    }
    return out;
}

Eigen::MatrixXcd dense_rho(const tn::MPS& rho) {
    check_density_chain(rho);
    const std::size_t L = rho.sites();
    if (L > 8) throw std::invalid_argument("dense readout is limited to 8 sites");

    const std::size_t dim = std::size_t(1) << L;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(Eigen::Index(dim), Eigen::Index(dim));
    std::vector<int> config(L, 0);
    const std::size_t total = std::size_t(1) << (2 * L);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t row = 0;
        std::size_t col = 0;
        for (std::size_t r = 0; r < L; ++r) {
            const int j = int(idx >> (2 * (L - 1 - r))) & 3;
            config[r] = j;
            row |= std::size_t(j >> 1) << (L - 1 - r);
            col |= std::size_t(j & 1) << (L - 1 - r);
        }
        out(Eigen::Index(row), Eigen::Index(col)) += tn::contract_with_config(rho, config);
    }
    return out;
}

}  // namespace quapi::obs
