// observables.hpp - readout of a base-4 density chain and the dense path-sum oracle

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <vector>

#include "quapi/bath.hpp"
#include "quapi/model.hpp"
#include "quapi/tncore.hpp"

namespace quapi::obs {

using cplx = std::complex<double>;

// Trace of the density chain: per-site sum over the diagonal slots j = 0 and
// j = 3. An exact discretized evolution keeps this at 1; lossy compression
// drifts it, which is why the expectation values below divide by it.
cplx trace_rho(const tn::MPS& rho);

// Tr(rho O) / Tr(rho) for a product O of single-site operators. ops[i] acts
// on site firstSite + i as a 2x2 matrix in the spin-z basis (row/column 0 is
// spin up); sites outside the range carry the identity. Hermitian operators
// give results that are real up to accumulated roundoff.
cplx expect_product(const tn::MPS& rho, std::size_t firstSite,
                    const std::vector<Eigen::MatrixXcd>& ops);

// Probability of measuring every spin's z-component in the given +-1
// configuration: the expectation of the product of projectors (1 + s sz)/2.
double spin_config_prob(const tn::MPS& rho, const std::vector<int>& config);

// Sum over sites of hx <sx> + hz <sz> + J <sz sz> with the parameters
// evaluated at time t.
double energy_per_cell(const tn::MPS& rho, const model::SystemModel& sys, double t);

// Realignment test: Schmidt values of the density chain at each bond, divided
// by the trace. A sum above 1 certifies bipartite entanglement across that
// bond; a sum at or below 1 decides nothing, so an unset flag does not imply
// separability.
struct RealignmentResult {
    std::vector<double> schmidtSums;  // bond (r-1, r) at index r-1
    std::vector<bool> entangled;      // schmidtSums[i] > 1 + 1e-10
};
RealignmentResult realignment_check(const tn::MPS& rho);

// The full 2^L x 2^L density matrix of the chain, rows indexed by the forward
// spin configuration and columns by the backward one, site 0 as the most
// significant bit. Cost grows as 4^L; intended for small chains.
Eigen::MatrixXcd dense_rho(const tn::MPS& rho);

// Discretized reduced density matrix after n steps by direct summation over
// every spin path. Shares only the memory-kernel coefficient tables and the
// step-weight tables with the tensor network route, so it serves as an
// independent end-to-end oracle. psi is the initial state over the 2^L basis
// (site 0 most significant; empty selects all spins up) and is normalized
// internally. Guarded to L <= 2 and n <= 3; larger requests are refused with
// a path-count estimate.
Eigen::MatrixXcd brute_force_rho(const model::SystemModel& sys, const bath::BathModel& bth,
                                 int n, double dt,
                                 const Eigen::VectorXcd& psi = Eigen::VectorXcd());

}  // namespace quapi::obs
