// tncore.hpp - dense complex MPS/MPO containers and compression sweeps

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace quapi::tn {

using cplx = std::complex<double>;

// Row-major dense tensor. Rank-3 cores are indexed [left, phys, right],
// rank-4 cores [left, physOut, physIn, right].
struct DenseTensor {
    std::vector<int> shape;
    std::vector<cplx> data;

    static DenseTensor zeros(std::vector<int> extents);

    cplx& at3(int a, int b, int c) {
        return data[std::size_t((a * shape[1] + b) * shape[2] + c)];
    }
    const cplx& at3(int a, int b, int c) const {
        return data[std::size_t((a * shape[1] + b) * shape[2] + c)];
    }
    cplx& at4(int a, int b, int c, int d) {
        return data[std::size_t(((a * shape[1] + b) * shape[2] + c) * shape[3] + d)];
    }
    const cplx& at4(int a, int b, int c, int d) const {
        return data[std::size_t(((a * shape[1] + b) * shape[2] + c) * shape[3] + d)];
    }
};

// Matrix product state. Terminal bonds are usually extent 1; a larger
// terminal extent is a dangling open leg and rides through every sweep as
// part of the boundary core.
struct MPS {
    std::vector<DenseTensor> cores;

    std::size_t sites() const { return cores.size(); }
    int phys_dim(std::size_t i) const { return cores[i].shape[1]; }
    int bond_dim(std::size_t i) const {
        return i == 0 ? cores[0].shape[0] : cores[i - 1].shape[2];
    }
    int max_bond() const;
    // Throws std::invalid_argument on rank or adjacency violations.
    void check() const;
};

// Matrix product operator with per-site input and output physical legs.
struct MPO {
    std::vector<DenseTensor> cores;

    std::size_t sites() const { return cores.size(); }
    void check() const;
};

struct CompressionParams {
    enum class Method { Direct, Zipup };

    Method method{Method::Direct};
    int chiMax{0};          // bond cap; 0 means unlimited
    double epsTrunc{0.0};   // relative discarded-weight tolerance, < 1
    bool renormalize{false};
};

// Truncated SVD of m: m ~= U * diag(s) * Vdag with rank k chosen as the
// smallest value whose discarded tail satisfies sum_{i>k} s_i^2 <=
// epsTrunc^2 * sum_i s_i^2, capped at chiMax (0 = no cap). Singular values
// tied at the cut (relative spread 1e-12) are kept together so degenerate
// multiplets never split. discardedWeight is the dropped fraction of the
// total squared spectrum.
struct Factorization {
    Eigen::MatrixXcd U;
    Eigen::VectorXd s;
    Eigen::MatrixXcd Vdag;
    double discardedWeight{0.0};
};
Factorization truncated_factorization(const Eigen::MatrixXcd& m, int chiMax, double epsTrunc);

// Exact MPO application; output bond extents are the products of the operator
// and state bond extents. No truncation happens here.
MPS apply_mpo(const MPO& o, const MPS& s);

// Squared 2-norm, tracing over any dangling terminal legs.
double norm_squared(const MPS& s);

// Sweep-based compression. The returned pair (mps, logNorm) represents the
// object exp(logNorm) * mps: with renormalize set, mps comes back with unit
// 2-norm and logNorm = log of the input norm, so the represented object keeps
// the input norm exactly and long products stay in floating-point range.
// Without it the cores are returned as truncated and logNorm = 0.
// discardedWeight is the summed per-bond discarded fraction; the squared
// overlap fidelity with the input is bounded below by 1 - discardedWeight.
struct CompressResult {
    MPS mps;
    double discardedWeight{0.0};
    double logNorm{0.0};
};
CompressResult compress(const MPS& s, const CompressionParams& p);

// Gauge the core at site i (1 <= i <= size-1) into right-canonical form,
// pushing the remainder into core i-1, which loses canonicity. Bond i shrinks
// to the smaller of its two matricization extents.
void right_canonicalize_site(std::vector<DenseTensor>& cores, std::size_t i);

// Truncating sweep for a chain whose cores 1..N-1 are already right-canonical
// (core 0 carries the norm). Equivalent to Direct compression with the
// canonicalization pass skipped. Norm bookkeeping is unavailable on this
// entry point, so renormalize is rejected; so is the Zipup method.
CompressResult compress_right_canonical(const MPS& s, const CompressionParams& p);

// Amplitude of one physical configuration. The open variant returns the
// leftBond x rightBond matrix left over after selecting config; the scalar
// variant additionally requires both terminal extents to be 1.
Eigen::MatrixXcd contract_with_config_open(const MPS& s, const std::vector<int>& config);
cplx contract_with_config(const MPS& s, const std::vector<int>& config);

// Schmidt coefficients across the bond between cores r-1 and r (1 <= r <=
// sites-1), nonincreasing. Dangling terminal legs count toward their side of
// the bipartition.
std::vector<double> schmidt_at_bond(const MPS& s, std::size_t r);

}  // namespace quapi::tn
