// evolution.hpp - density-chain time stepping by windowed transfer operators

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "quapi/bath.hpp"
#include "quapi/influence.hpp"
#include "quapi/model.hpp"
#include "quapi/tncore.hpp"

namespace quapi::evo {

// Unentangled pure state as an MPS with physical dimension 2 per site,
// index 0 meaning spin up.
tn::MPS product_state(const std::vector<Eigen::Vector2cd>& amps);

// Doubled density chain of a pure state: per site, the amplitude at physical
// value j is psi(j >> 1) * conj(psi(j & 1)), and bond extents square. An
// unnormalized input is renormalized with a note on stderr.
tn::MPS init_density_mps(const tn::MPS& psi);

// The five transfer operators of one evolution step. Bulk kinds drive the
// long-time stage that runs ahead of the memory window with boundary-free
// weights; Finite kinds assemble the windowed stage of a specific step count
// n. Init kinds consume one influence node (slot 0), the others one stride of
// deltaM nodes; Final pins the open output legs.
enum class TransferKind { BulkInit, BulkStride, FiniteInit, FiniteStride, FiniteFinal };

// Builds one transfer operator. siteNodes[r] lists site r's influence nodes
// in slot order for the slots this transfer consumes; the phase factor lands
// on slice 0 (Init), k+1 (Stride), or n+1 (Final). Bulk kinds expect the
// bulk step-count sentinel in n. Cross-site bonds come from the phase factor
// alone, so every operator bond extent is at most the coupler rank (<= 4).
tn::MPO build_transfer_mpo(const model::SystemModel& sys, double dt, TransferKind kind, int n,
                           int k,
                           const std::vector<std::vector<const tn::DenseTensor*>>& siteNodes);

struct StepReport {
    int n{0};                       // step count just completed
    double influenceDiscarded{0.0}; // window updates and finalization, summed over sites
    double stateDiscarded{0.0};     // density-chain compressions
    int maxBond{1};                 // largest bond of the assembled chain
    double logScale{0.0};           // cumulative log-norm ledger
    double wallSeconds{0.0};
};

// Full contents of a state, sufficient to resume a run. Produced by
// SystemState::capture and consumed by SystemState::restore; the snapshot
// module handles (de)serialization.
struct StateSnapshot {
    int version{1};
    std::size_t L{0};
    int deltaM{1};
    int kTau{3};
    int n{0};
    double dt{0.0};
    double logScale{0.0};
    double vdashLog{0.0};
    int mVdash{0};
    tn::MPS rho0;
    tn::MPS vdash;
    tn::MPS rho;
    std::vector<tn::MPS> windows;
    std::vector<std::vector<tn::DenseTensor>> archives;
    std::vector<int> pathSlots;
    std::vector<double> pathDiscarded;
    std::vector<StepReport> history;
};

// Reduced density matrix of the chain, advanced one step at a time. Owns the
// per-site influence paths, the long-time stage they feed, and the assembled
// density chain exp(logScale) * rho at the completed step count.
//
// Each step advances the influence windows by deltaM slots, closes them out
// at the new step count, and rebuilds the density chain: from the initial
// state while the whole history fits in the memory window, afterwards from
// the long-time stage picked up at the window edge. Every operator
// application is followed by compression with renormalization; the scale
// moves into logScale.
class SystemState {
public:
    SystemState(const model::SystemModel& sys, const bath::BathModel& bth, double dt,
                const tn::CompressionParams& params, const tn::MPS& psi);

    // Influence paths hold pointers into this object.
    SystemState(const SystemState&) = delete;
    SystemState& operator=(const SystemState&) = delete;

    void evolve_step();

    int n() const { return n_; }
    double t() const { return n_ * dt_; }
    double dt() const { return dt_; }
    int delta_m() const { return deltaM_; }
    int k_tau() const { return kTau_; }
    const model::SystemModel& system() const { return sys_; }
    const bath::BathModel& bath() const { return bath_; }

    // the assembled density chain; the represented object is
    // exp(log_scale()) * rho()
    const tn::MPS& rho() const { return rho_; }
    double log_scale() const { return logScale_; }

    const std::vector<StepReport>& history() const { return history_; }
    const infl::InfluencePath& path(std::size_t r) const { return paths_[r]; }

    // Retained intermediate stages: the initial chain plus, once the
    // long-time stage has started moving, its current position.
    std::size_t checkpoint_count() const { return mVdash_ == 0 ? 1 : 2; }

    StateSnapshot capture() const;
    // Replaces the dynamic state; the snapshot must match this object's
    // models, grids, and time step.
    void restore(const StateSnapshot& snap);

private:
    void advance_vdash_to(int mu, double& stateDisc);
    void apply_and_compress(const tn::MPO& op, tn::MPS& state, double& log, double& disc);

    model::SystemModel sys_;
    bath::BathModel bath_;
    double dt_{0.1};
    tn::CompressionParams stateParams_;
    tn::CompressionParams pathParams_;
    int deltaM_{1};
    int kTau_{3};

    std::vector<infl::SiteInfluence> sites_;
    std::vector<infl::InfluencePath> paths_;
    std::vector<double> pathDiscSeen_;

    tn::MPS rho0_;
    tn::MPS vdash_;
    double vdashLog_{0.0};
    int mVdash_{0};  // slot of the long-time stage; 0 while still untouched

    tn::MPS rho_;
    double logScale_{0.0};
    int n_{0};

    std::vector<StepReport> history_;
};

}  // namespace quapi::evo
