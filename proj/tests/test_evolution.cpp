// Tests for the density-chain evolution: initial doubling, transfer
// operators, and full steps checked against the dense path-sum oracle.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "quapi/bath.hpp"
#include "quapi/evolution.hpp"
#include "quapi/influence.hpp"
#include "quapi/model.hpp"
#include "quapi/observables.hpp"
#include "quapi/snapshot.hpp"
#include "quapi/tncore.hpp"

using namespace quapi;
using cplx = std::complex<double>;

namespace {

constexpr std::size_t kY = std::size_t(bath::Axis::Y);
constexpr std::size_t kZ = std::size_t(bath::Axis::Z);

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd dense_of(const evo::SystemState& st) {
    return std::exp(st.log_scale()) * obs::dense_rho(st.rho());
}

model::SystemModel chain(std::size_t L, std::vector<double> hx, std::vector<double> hz,
                         std::vector<double> J) {
    model::SystemModel sys;
    sys.L = L;
    for (double v : hx) sys.hx.push_back(model::TimeScalar::constant(v));
    for (double v : hz) sys.hz.push_back(model::TimeScalar::constant(v));
    for (double v : J) sys.Jzz.push_back(model::TimeScalar::constant(v));
    sys.Jzz.push_back(model::TimeScalar::constant(0.0));
    return sys;
}

bath::BathModel z_bath(std::size_t L, double beta, double tau, std::vector<double> etas) {
    bath::BathModel b = bath::BathModel::none(L, beta, tau);
    for (std::size_t r = 0; r < L; ++r)
        if (etas[r] != 0.0)
            b.components[kZ][r] = {bath::SpectralComponent::ohmic(etas[r], 5.0, 0.0, 60.0)};
    return b;
}

tn::MPS bell_mps() {
    tn::MPS psi;
    tn::DenseTensor a = tn::DenseTensor::zeros({1, 2, 2});
    a.at3(0, 0, 0) = 1.0;
    a.at3(0, 1, 1) = 1.0;
    tn::DenseTensor b = tn::DenseTensor::zeros({2, 2, 1});
    b.at3(0, 0, 0) = 1.0 / std::sqrt(2.0);
    b.at3(1, 1, 0) = 1.0 / std::sqrt(2.0);
    psi.cores.push_back(std::move(a));
    psi.cores.push_back(std::move(b));
    return psi;
}

const tn::CompressionParams kLossless{};

}  // namespace

TEST_CASE("product state and density doubling basics") {
    tn::MPS up3 = evo::product_state(
        {Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(1.0, 0.0)});
    tn::MPS rho = evo::init_density_mps(up3);
    REQUIRE(rho.sites() == 3);
    for (std::size_t r = 0; r < 3; ++r) CHECK(rho.phys_dim(r) == 4);
    CHECK(std::abs(tn::contract_with_config(rho, {0, 0, 0}) - 1.0) < 1e-14);
    CHECK(std::abs(tn::contract_with_config(rho, {0, 3, 0})) < 1e-14);
    CHECK(std::abs(tn::contract_with_config(rho, {1, 0, 2})) < 1e-14);
    CHECK(std::abs(obs::trace_rho(rho) - 1.0) < 1e-14);

    tn::MPS prod = evo::product_state(
        {Eigen::Vector2cd(0.6, cplx(0.0, 0.8)), Eigen::Vector2cd(0.28, cplx(0.96, 0.0))});
    CHECK(std::abs(obs::trace_rho(evo::init_density_mps(prod)) - 1.0) < 1e-13);

    // unnormalized input comes back renormalized
    tn::MPS big = evo::product_state({Eigen::Vector2cd(3.0, cplx(0.0, 4.0))});
    CHECK(std::abs(obs::trace_rho(evo::init_density_mps(big)) - 1.0) < 1e-13);

    CHECK_THROWS_AS(evo::product_state({}), std::invalid_argument);
    CHECK_THROWS_AS(evo::init_density_mps(evo::product_state({Eigen::Vector2cd(0.0, 0.0)})),
                    std::invalid_argument);
    tn::MPS bad;
    bad.cores.push_back(tn::DenseTensor::zeros({1, 3, 1}));
    CHECK_THROWS_AS(evo::init_density_mps(bad), std::invalid_argument);
}

TEST_CASE("density doubling matches the dense outer product for a Bell state") {
    tn::MPS psi = bell_mps();
    tn::MPS rho = evo::init_density_mps(psi);

    Eigen::VectorXcd v(4);
    v << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd dd = v * v.adjoint();

    for (int j0 = 0; j0 < 4; ++j0)
        for (int j1 = 0; j1 < 4; ++j1) {
            const int row = ((j0 >> 1) << 1) | (j1 >> 1);
            const int col = ((j0 & 1) << 1) | (j1 & 1);
            CHECK(std::abs(tn::contract_with_config(rho, {j0, j1}) - dd(row, col)) < 1e-14);
        }
    CHECK(max_abs_diff(obs::dense_rho(rho), dd) < 1e-14);
}

TEST_CASE("transfer operators act as the identity on a free chain") {
    model::SystemModel sys = chain(2, {0.0, 0.0}, {0.0, 0.0}, {0.0});
    bath::BathModel bth = bath::BathModel::none(2, 1.0, 0.0);
    tn::MPS psi = evo::product_state(
        {Eigen::Vector2cd(0.6, cplx(0.0, 0.8)), Eigen::Vector2cd(0.28, cplx(0.96, 0.0))});
    Eigen::MatrixXcd before = obs::dense_rho(evo::init_density_mps(psi));

    evo::SystemState st(sys, bth, 0.1, kLossless, psi);
    for (int n = 1; n <= 3; ++n) {
        st.evolve_step();
        CHECK(max_abs_diff(dense_of(st), before) < 1e-12);
    }
}

TEST_CASE("transfer operator bonds stay within the coupler rank") {
    model::SystemModel sys = chain(2, {0.8, 0.5}, {0.2, -0.4}, {0.45});
    bath::BathModel bth = z_bath(2, 1.0, 0.2, {0.2, 0.1});

    std::vector<infl::SiteInfluence> sites;
    sites.reserve(2);
    for (std::size_t r = 0; r < 2; ++r)
        sites.push_back(infl::SiteInfluence::make(sys, bth, r, 0.1));
    tn::CompressionParams raw;
    std::vector<infl::InfluencePath> paths;
    paths.reserve(2);
    for (std::size_t r = 0; r < 2; ++r) paths.emplace_back(sites[r], raw);

    const int n = 2;
    for (auto& p : paths)
        while (p.current_m2() < n - 1) p.step();
    std::vector<infl::FinalizedInfluence> fins;
    for (auto& p : paths) fins.push_back(p.finalize(n));

    std::vector<std::vector<const tn::DenseTensor*>> nodes(2);
    for (std::size_t r = 0; r < 2; ++r) nodes[r] = {&fins[r].nodes.at(1)};
    tn::MPO op = evo::build_transfer_mpo(sys, 0.1, evo::TransferKind::FiniteStride, n, 0, nodes);
    REQUIRE(op.sites() == 2);
    // Cross-site bonds come from the phase factor alone, so they sit within
    // the coupler rank; the physical legs inherit the influence bond extents.
    for (std::size_t r = 0; r < 2; ++r) {
        const auto& c = op.cores[r];
        CHECK(c.shape[0] <= 4);
        CHECK(c.shape[3] <= 4);
        CHECK(c.shape[1] == fins[r].nodes.at(1).shape[2]);
        CHECK(c.shape[2] == fins[r].nodes.at(1).shape[0]);
    }

    // argument checks
    CHECK_THROWS_AS(evo::build_transfer_mpo(sys, 0.1, evo::TransferKind::FiniteStride, n, 0, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        evo::build_transfer_mpo(sys, 0.1, evo::TransferKind::FiniteStride, n, 5, nodes),
        std::invalid_argument);
    CHECK_THROWS_AS(evo::build_transfer_mpo(sys, 0.1, evo::TransferKind::BulkInit, n, 0, nodes),
                    std::invalid_argument);
    std::vector<std::vector<const tn::DenseTensor*>> two(2);
    for (std::size_t r = 0; r < 2; ++r)
        two[r] = {&fins[r].nodes.at(0), &fins[r].nodes.at(1)};
    CHECK_THROWS_AS(evo::build_transfer_mpo(sys, 0.1, evo::TransferKind::FiniteInit, n, 0, two),
                    std::invalid_argument);
}

TEST_CASE("single site with longitudinal noise matches the path sum") {
    model::SystemModel sys = chain(1, {0.9}, {0.4}, {});
    Eigen::VectorXcd pv(2);
    pv << 0.6, cplx(0.0, 0.8);
    tn::MPS psi = evo::product_state({Eigen::Vector2cd(0.6, cplx(0.0, 0.8))});

    // wide window: no memory truncation within three steps
    {
        bath::BathModel bth = z_bath(1, 1.0, 0.3, {0.25});
        evo::SystemState st(sys, bth, 0.1, kLossless, psi);
        CHECK(st.delta_m() == 1);
        for (int n = 1; n <= 3; ++n) {
            st.evolve_step();
            CHECK(max_abs_diff(dense_of(st), obs::brute_force_rho(sys, bth, n, 0.1, pv)) <
                  1e-12);
        }
    }
    // tau = 0 shrinks the window to three steps, so n = 3 walks through the
    // long-time stage pickup; the oracle truncates the same pairs.
    {
        bath::BathModel bth = z_bath(1, 1.2, 0.0, {0.25});
        evo::SystemState st(sys, bth, 0.1, kLossless, psi);
        CHECK(st.k_tau() == 3);
        for (int n = 1; n <= 3; ++n) {
            st.evolve_step();
            CHECK(max_abs_diff(dense_of(st), obs::brute_force_rho(sys, bth, n, 0.1, pv)) <
                  1e-12);
        }
        CHECK(st.checkpoint_count() == 2);
    }
}

TEST_CASE("fine grid with transverse noise matches the path sum") {
    model::SystemModel sys = chain(1, {0.7}, {-0.3}, {});
    bath::BathModel bth = bath::BathModel::none(1, 1.0, 0.3);
    bth.components[kZ][0] = {bath::SpectralComponent::ohmic(0.2, 4.0, 0.0, 50.0)};
    bth.components[kY][0] = {bath::SpectralComponent::ohmic(0.15, 3.0, 0.0, 40.0)};

    Eigen::VectorXcd pv(2);
    pv << 0.6, cplx(0.0, 0.8);
    evo::SystemState st(sys, bth, 0.1, kLossless,
                        evo::product_state({Eigen::Vector2cd(0.6, cplx(0.0, 0.8))}));
    CHECK(st.delta_m() == 3);
    for (int n = 1; n <= 2; ++n) {
        st.evolve_step();
        CHECK(max_abs_diff(dense_of(st), obs::brute_force_rho(sys, bth, n, 0.1, pv)) < 1e-12);
    }
}

TEST_CASE("coupled chain with entangled start matches the path sum") {
    model::SystemModel sys = chain(2, {0.8, 0.5}, {0.2, -0.4}, {0.45});
    bath::BathModel bth = bath::BathModel::none(2, 1.0, 0.3);
    bth.components[kZ][0] = {bath::SpectralComponent::ohmic(0.2, 5.0, 0.0, 60.0)};
    bth.components[kZ][1] = {bath::SpectralComponent::ohmic(0.1, 3.0, 0.0, 40.0)};

    Eigen::VectorXcd pv(4);
    pv << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
    evo::SystemState st(sys, bth, 0.1, kLossless, bell_mps());
    for (int n = 1; n <= 2; ++n) {
        st.evolve_step();
        CHECK(max_abs_diff(dense_of(st), obs::brute_force_rho(sys, bth, n, 0.1, pv)) < 1e-12);
    }
}

TEST_CASE("free spin driven at constant transverse field stays on the exact rotation") {
    model::SystemModel sys = chain(1, {1.0}, {0.0}, {});
    bath::BathModel bth = bath::BathModel::none(1, 1.0, 0.0);
    Eigen::MatrixXcd sz(2, 2);
    sz << 1.0, 0.0, 0.0, -1.0;

    evo::SystemState st(sys, bth, 0.1, kLossless,
                        evo::product_state({Eigen::Vector2cd(1.0, 0.0)}));
    double worst = 0.0;
    for (int n = 1; n <= 20; ++n) {
        st.evolve_step();
        const double v = obs::expect_product(st.rho(), 0, {sz}).real();
        worst = std::max(worst, std::abs(v - std::cos(2.0 * st.t())));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("hermiticity and trace ledger along a lossless run") {
    model::SystemModel sys = chain(2, {0.8, 0.5}, {0.2, -0.4}, {0.45});
    bath::BathModel bth = z_bath(2, 1.0, 0.2, {0.2, 0.1});
    evo::SystemState st(sys, bth, 0.1, kLossless,
                        evo::product_state(
                            {Eigen::Vector2cd(0.6, cplx(0.0, 0.8)), Eigen::Vector2cd(1.0, 0.0)}));
    const int cap = st.k_tau() * st.delta_m() - 1;
    for (int n = 1; n <= 5; ++n) {
        st.evolve_step();
        Eigen::MatrixXcd m = dense_of(st);
        CHECK(max_abs_diff(m, m.adjoint()) < 1e-10);
        CHECK(std::abs(m.trace() - 1.0) < 1e-10);
        for (std::size_t r = 0; r < 2; ++r) CHECK(int(st.path(r).window().sites()) <= cap);
        CHECK(st.checkpoint_count() <= std::size_t(st.k_tau()));
    }
    REQUIRE(st.history().size() == 5);
    for (const auto& rep : st.history()) {
        CHECK(rep.stateDiscarded == 0.0);
        CHECK(rep.maxBond >= 1);
        CHECK(rep.wallSeconds >= 0.0);
    }
}

TEST_CASE("capped compression keeps the run usable and logs weights") {
    model::SystemModel sys = chain(2, {0.8, 0.5}, {0.2, -0.4}, {0.45});
    bath::BathModel bth = z_bath(2, 1.0, 0.2, {0.2, 0.1});
    tn::CompressionParams capped;
    capped.chiMax = 2;
    evo::SystemState st(sys, bth, 0.1, capped,
                        evo::product_state(
                            {Eigen::Vector2cd(0.6, cplx(0.0, 0.8)), Eigen::Vector2cd(1.0, 0.0)}));
    for (int n = 1; n <= 5; ++n) st.evolve_step();
    CHECK(st.rho().max_bond() <= 2);
    Eigen::MatrixXcd m = dense_of(st);
    CHECK(std::abs(m.trace() - 1.0) < 0.05);
    CHECK(max_abs_diff(m, m.adjoint()) < 1e-6);
    double disc = 0.0;
    for (const auto& rep : st.history()) disc += rep.stateDiscarded;
    CHECK(disc >= 0.0);
}

TEST_CASE("snapshot capture and restore resume bit for bit") {
    model::SystemModel sys = chain(2, {0.8, 0.5}, {0.2, -0.4}, {0.45});
    bath::BathModel bth = z_bath(2, 1.0, 0.2, {0.2, 0.1});
    tn::MPS psi = evo::product_state(
        {Eigen::Vector2cd(0.6, cplx(0.0, 0.8)), Eigen::Vector2cd(1.0, 0.0)});

    evo::SystemState full(sys, bth, 0.1, kLossless, psi);
    evo::SystemState head(sys, bth, 0.1, kLossless, psi);
    for (int n = 1; n <= 2; ++n) {
        full.evolve_step();
        head.evolve_step();
    }
    evo::StateSnapshot snap = head.capture();
    CHECK(snap.version == 1);
    CHECK(snap.n == 2);

    evo::SystemState tail(sys, bth, 0.1, kLossless, psi);
    tail.restore(snap);
    for (int n = 3; n <= 4; ++n) {
        full.evolve_step();
        tail.evolve_step();
    }
    CHECK(tail.n() == 4);
    CHECK(max_abs_diff(dense_of(tail), dense_of(full)) == 0.0);
    CHECK(tail.log_scale() == full.log_scale());

    evo::StateSnapshot wrong = snap;
    wrong.dt = 0.2;
    CHECK_THROWS_AS(tail.restore(wrong), std::invalid_argument);
    wrong = snap;
    wrong.version = 9;
    CHECK_THROWS_AS(tail.restore(wrong), std::invalid_argument);
}

TEST_CASE("snapshot JSON round trip preserves the run exactly") {
    model::SystemModel sys = chain(1, {0.9}, {0.4}, {});
    bath::BathModel bth = z_bath(1, 1.0, 0.2, {0.25});
    tn::MPS psi = evo::product_state({Eigen::Vector2cd(0.6, cplx(0.0, 0.8))});

    evo::SystemState full(sys, bth, 0.1, kLossless, psi);
    evo::SystemState head(sys, bth, 0.1, kLossless, psi);
    for (int n = 1; n <= 2; ++n) {
        full.evolve_step();
        head.evolve_step();
    }
    const std::string doc = snap::to_json(head.capture());
    evo::SystemState tail(sys, bth, 0.1, kLossless, psi);
    tail.restore(snap::from_json(doc));
    full.evolve_step();
    tail.evolve_step();
    CHECK(max_abs_diff(dense_of(tail), dense_of(full)) == 0.0);
    REQUIRE(tail.history().size() == 3);
    CHECK(tail.history()[2].n == 3);

    CHECK_THROWS_AS(snap::from_json("{}"), std::runtime_error);
    CHECK_THROWS_AS(snap::from_json("not json"), std::runtime_error);
    CHECK_THROWS_AS(snap::load_snapshot("/nonexistent/path/state.json"), std::runtime_error);
}

TEST_CASE("state construction argument checks") {
    model::SystemModel sys = chain(1, {0.9}, {0.4}, {});
    bath::BathModel bth = z_bath(1, 1.0, 0.2, {0.25});
    tn::MPS psi1 = evo::product_state({Eigen::Vector2cd(1.0, 0.0)});
    tn::MPS psi2 = evo::product_state({Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(1.0, 0.0)});

    CHECK_THROWS_AS(evo::SystemState(sys, bth, 0.0, kLossless, psi1), std::invalid_argument);
    CHECK_THROWS_AS(evo::SystemState(sys, bth, 0.1, kLossless, psi2), std::invalid_argument);
    bath::BathModel wide = z_bath(2, 1.0, 0.2, {0.25, 0.0});
    CHECK_THROWS_AS(evo::SystemState(sys, wide, 0.1, kLossless, psi1), std::invalid_argument);
}
