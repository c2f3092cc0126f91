// influence.hpp - two-point influence factors and the iterative path MPS

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "quapi/bath.hpp"
#include "quapi/eta.hpp"
#include "quapi/model.hpp"
#include "quapi/tncore.hpp"

namespace quapi::infl {

// Spin read-out of a base-4 path variable: j encodes the ordered pair
// (g_{+1}(j), g_{-1}(j)) running through (1,1), (1,-1), (-1,1), (-1,-1).
int g_alpha(int alpha, int j);

// Index swap j -> jbar exchanging the two spins of the pair: 0,2,1,3.
int overbar(int j);

// Per-step index bookkeeping. With y-noise anywhere on the chain each
// physical step carries three path slots (one z, two y), otherwise one.
struct LayerMap {
    int deltaM{1};
    int n{1};     // step count; may be the bulk sentinel
    int kTau{3};  // memory window in steps

    int q_y() const { return deltaM == 1 ? -1 : 2 * n + 1; }
    int q_z() const { return n + 1; }

    // Noise axis living on slot m: z at m % 3 == 0 (or always for deltaM 1).
    bath::Axis tilde_nu(int m) const;
    // Position of slot m on its axis ladder: z slots count 0..n+1, y slots
    // 0..2n+1, interleaved as (z at k; y at 2k, 2k+1) per period.
    int tilde_q(int m) const;
    // First slot still inside the memory window relative to slot m.
    int mu_tau(int m) const;
};
LayerMap layer_maps(int n, bool hasYnoise, int kTau);

// Everything the two-point factors of one site need: the chain Hamiltonian
// (transverse fields), coupling scales, and the per-axis kernel caches.
struct SiteInfluence {
    std::size_t r{0};
    double dt{0.1};
    const model::SystemModel* sys{nullptr};
    const bath::BathModel* bathModel{nullptr};
    int kTau{3};
    int deltaM{1};
    eta::EtaCaches cachesY;
    eta::EtaCaches cachesZ;

    static SiteInfluence make(const model::SystemModel& sys, const bath::BathModel& b,
                              std::size_t r, double dt);
};

// Bath factor exp(-sum of gamma) for the slot pair (m1, m2) on axis nu. The
// gamma exponents combine the kernel coefficients with the spin sums and
// differences at the two slots; pairs outside the memory window contribute
// nothing.
std::complex<double> two_point_bath(const SiteInfluence& s, bath::Axis nu, int n, int m1,
                                    int m2, int j1, int j2);

// Transverse-field factor for the rotation angle theta = 2*dt*w(n,k)*h_x(t_k),
// as the product of the forward and backward branch matrix elements of
// exp(-i*alpha*theta*sigma_x/2) in the z basis (nu = Z) or y basis (nu = Y).
std::complex<double> two_point_tfc(const SiteInfluence& s, bath::Axis nu, int n, int k,
                                   int j1, int j2);

// Basis-change overlaps between neighboring z and y slots. For ZtoY and YtoZ
// the two arguments are the +-1 spins (sigma_y, sigma_z) and (sigma_z,
// sigma_y) respectively; for YZ1 and YZ2 they are the base-4 variables of the
// earlier and later slot, combined over both branches.
enum class YZKind { ZtoY, YtoZ, YZ1, YZ2 };
std::complex<double> two_point_yz(YZKind kind, int a1, int a2);

// Full two-point factor: dispatches on the slot kinds of (m1, m2) and their
// adjacency. Requires mu_tau(m2) <= m1 <= m2.
std::complex<double> two_point_total(const SiteInfluence& s, int n, int m1, int m2, int j1,
                                     int j2);

// The rank-3 bottom node for slot m2: entry (b, j) = delta_{b,j} times the
// diagonal two-point factor. Shape [4, 4, 1].
tn::DenseTensor influence_node(const SiteInfluence& s, int n, int m2);

// The all-ones placeholder node appended before each MPO application.
// Shape [1, 4, 1].
tn::DenseTensor trivial_node();

// The update MPO for target slot m2, with one core per slot in [mu_tau(m2),
// m2]. The interior bond carries the new slot's base-4 value leftward. The
// last core pins an open output leg of extent 4 exactly when m2 is the final
// slot (n+1)*deltaM of a finite step count n.
tn::MPO influence_mpo(const SiteInfluence& s, int n, int m2);

// Result of closing a path at a finite step count: the node table covering
// slots mLo = mu_tau(n*deltaM) through (n+1)*deltaM. The last node carries
// the open output leg.
struct FinalizedInfluence {
    int mLo{0};
    std::vector<tn::DenseTensor> nodes;
    double discardedWeight{0.0};
};

// Iterative influence functional for one site. The window MPS grows by one
// node per step and is capped at kTau*deltaM - 1 nodes; nodes leaving the
// window are archived append-only and indexed by their absolute slot.
class InfluencePath {
public:
    InfluencePath(const SiteInfluence& site, tn::CompressionParams params);

    // Advance the window from slot m2 to m2 + 1 using the open-ended update.
    void step();

    // Close out at step count n; requires the window to sit at slot
    // n*deltaM - 1. The path itself is left untouched and can keep stepping.
    FinalizedInfluence finalize(int n) const;

    int current_m2() const { return m2_; }
    const tn::MPS& window() const { return window_; }
    const std::vector<tn::DenseTensor>& archive() const { return archive_; }
    double discarded() const { return discarded_; }

    // Replaces the dynamic contents when resuming from a snapshot. The window
    // and archive must describe slots [archive.size(), m2] and [0,
    // archive.size() - 1] of this site's grid.
    void restore(tn::MPS window, std::vector<tn::DenseTensor> archive, int m2,
                 double discarded);

private:
    const SiteInfluence* site_;
    tn::CompressionParams params_;
    tn::MPS window_;
    std::vector<tn::DenseTensor> archive_;
    int m2_{0};
    double discarded_{0.0};
};

}  // namespace quapi::infl
