// phasefactor.hpp - longitudinal field and coupler phases on one time slice

#pragma once

#include <complex>
#include <vector>

#include "quapi/model.hpp"
#include "quapi/tncore.hpp"

namespace quapi::phase {

// Phase factor picked up by the doubled path variables j across the chain on
// coarse slice k of an n-step run (bulk sentinel allowed). Both longitudinal
// fields and nearest-neighbour couplers contribute; the result always has
// unit modulus.
std::complex<double> phase_scalar(const model::SystemModel& sys, double dt, int n, int k,
                                  const std::vector<int>& jconfig);

// The same object as an L-site MPS with physical dimension 4 per site.
// Coupler bonds carry the numerical rank of the 4x4 pair-phase matrix (at
// most 4); without couplers every bond has extent 1.
tn::MPS build_phase_mps(const model::SystemModel& sys, double dt, int n, int k);

}  // namespace quapi::phase
