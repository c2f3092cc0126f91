// Dense MPS/MPO plumbing: factorizations, sweeps, contractions.
#include "quapi/tncore.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace quapi::tn {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using MapRowC = Eigen::Map<const RowMat>;
using SliceMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

constexpr double kTieRel = 1e-12;  // singular values closer than this stay together

// Core viewed as a (left*phys) x right matrix; row-major layout makes this a
// straight reinterpretation.
MapRowC as_lp_r(const DenseTensor& c) {
    return MapRowC(c.data.data(), std::ptrdiff_t(c.shape[0]) * c.shape[1], c.shape[2]);
}
// Core viewed as a left x (phys*right) matrix.
MapRowC as_l_pr(const DenseTensor& c) {
    return MapRowC(c.data.data(), c.shape[0], std::ptrdiff_t(c.shape[1]) * c.shape[2]);
}
// The left x right matrix at a fixed physical index.
SliceMap phys_slice(const DenseTensor& c, int p) {
    return SliceMap(c.data.data() + std::ptrdiff_t(p) * c.shape[2], c.shape[0], c.shape[2],
                    Eigen::OuterStride<>(std::ptrdiff_t(c.shape[1]) * c.shape[2]));
}

DenseTensor core_from(const Eigen::MatrixXcd& m, int dl, int dp, int dr) {
    DenseTensor t;
    t.shape = {dl, dp, dr};
    t.data.resize(std::size_t(dl) * dp * dr);
    MapRow(t.data.data(), std::ptrdiff_t(m.rows()), m.cols()) = m;
    return t;
}

struct ThinQR {
    Eigen::MatrixXcd Q;  // orthonormal columns
    Eigen::MatrixXcd R;  // upper triangular
};

ThinQR thin_qr(const Eigen::MatrixXcd& m) {
    const auto k = std::min(m.rows(), m.cols());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    ThinQR out;
    out.Q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
    out.R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    return out;
}

// Gauge the core at site i into right-canonical form, pushing the remainder
// into site i-1. Bond i shrinks to min of its neighboring matricizations.
void right_canonicalize_step(std::vector<DenseTensor>& cores, std::size_t i) {
    DenseTensor& c = cores[i];
    const int dp = c.shape[1], dr = c.shape[2];
    const auto qr = thin_qr(as_l_pr(c).adjoint());
    const int k = int(qr.Q.cols());
    c = core_from(qr.Q.adjoint(), k, dp, dr);
    DenseTensor& prev = cores[i - 1];
    const Eigen::MatrixXcd carried = as_lp_r(prev) * qr.R.adjoint();
    prev = core_from(carried, prev.shape[0], prev.shape[1], k);
}

// Truncate the bond to the right of site i, pushing diag(s)*Vdag into site
// i+1. Returns the discarded fraction at this bond.
double truncate_step(std::vector<DenseTensor>& cores, std::size_t i, int chiMax,
                     double epsTrunc) {
    DenseTensor& c = cores[i];
    const int dl = c.shape[0], dp = c.shape[1];
    const auto f = truncated_factorization(as_lp_r(c), chiMax, epsTrunc);
    const int k = int(f.s.size());
    c = core_from(f.U, dl, dp, k);
    DenseTensor& next = cores[i + 1];
    const Eigen::MatrixXcd carried = (f.s.asDiagonal() * f.Vdag) * as_l_pr(next);
    next = core_from(carried, k, next.shape[1], next.shape[2]);
    return f.discardedWeight;
}

double frobenius(const DenseTensor& c) {
    double sum = 0.0;
    for (const auto& v : c.data) sum += std::norm(v);
    return std::sqrt(sum);
}

void scale_core(DenseTensor& c, double factor) {
    for (auto& v : c.data) v *= factor;
}

}  // namespace

DenseTensor DenseTensor::zeros(std::vector<int> extents) {
    DenseTensor t;
    std::size_t n = 1;
    for (int e : extents) {
        if (e <= 0) throw std::invalid_argument("DenseTensor: extents must be positive");
        n *= std::size_t(e);
    }
    t.shape = std::move(extents);
    t.data.assign(n, cplx(0.0, 0.0));
    return t;
}

int MPS::max_bond() const {
    int m = 0;
    for (std::size_t i = 0; i <= sites(); ++i) m = std::max(m, bond_dim(i));
    return m;
}

namespace {

void check_cores(const std::vector<DenseTensor>& cores, std::size_t rank,
                 const char* what) {
    if (cores.empty()) throw std::invalid_argument(std::string(what) + ": no cores");
    for (std::size_t i = 0; i < cores.size(); ++i) {
        const auto& c = cores[i];
        if (c.shape.size() != rank) {
            throw std::invalid_argument(std::string(what) + ": core rank mismatch");
        }
        std::size_t n = 1;
        for (int e : c.shape) {
            if (e <= 0) throw std::invalid_argument(std::string(what) + ": bad extent");
            n *= std::size_t(e);
        }
        if (n != c.data.size()) {
            throw std::invalid_argument(std::string(what) + ": data size mismatch");
        }
        if (i > 0 && cores[i - 1].shape.back() != c.shape.front()) {
            throw std::invalid_argument(std::string(what) + ": bond adjacency mismatch");
        }
    }
}

}  // namespace

void MPS::check() const { check_cores(cores, 3, "MPS"); }
void MPO::check() const { check_cores(cores, 4, "MPO"); }

Factorization truncated_factorization(const Eigen::MatrixXcd& m, int chiMax,
                                      double epsTrunc) {
    if (m.rows() == 0 || m.cols() == 0) {
        throw std::invalid_argument("truncated_factorization: empty matrix");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument("truncated_factorization: non-finite entries");
    }
    if (epsTrunc < 0.0 || epsTrunc >= 1.0) {
        throw std::invalid_argument("truncated_factorization: need 0 <= epsTrunc < 1");
    }
    if (chiMax < 0) throw std::invalid_argument("truncated_factorization: chiMax < 0");

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw std::runtime_error("truncated_factorization: SVD did not converge");
    }
    const Eigen::VectorXd sv = svd.singularValues();
    const int kmin = int(sv.size());

    std::vector<double> suffix(std::size_t(kmin) + 1, 0.0);
    for (int i = kmin - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + sv[i] * sv[i];
    const double total = suffix[0];

    int k = 0;
    while (k < kmin && suffix[k] > epsTrunc * epsTrunc * total) ++k;
    k = std::max(k, 1);
    while (k < kmin && sv[k] >= sv[k - 1] * (1.0 - kTieRel)) ++k;
    if (chiMax > 0) k = std::min(k, chiMax);

    Factorization out;
    out.U = svd.matrixU().leftCols(k);
    out.s = sv.head(k);
    out.Vdag = svd.matrixV().leftCols(k).adjoint();
    out.discardedWeight = total > 0.0 ? suffix[k] / total : 0.0;
    return out;
}

MPS apply_mpo(const MPO& o, const MPS& s) {
    o.check();
    s.check();
    if (o.sites() != s.sites()) throw std::invalid_argument("apply_mpo: site count mismatch");

    MPS out;
    out.cores.reserve(s.sites());
    for (std::size_t i = 0; i < s.sites(); ++i) {
        const DenseTensor& w = o.cores[i];
        const DenseTensor& m = s.cores[i];
        const int da = w.shape[0], dpo = w.shape[1], dpi = w.shape[2], db = w.shape[3];
        const int dl = m.shape[0], dr = m.shape[2];
        if (dpi != m.shape[1]) {
            throw std::invalid_argument("apply_mpo: physical dimension mismatch");
        }
        DenseTensor t = DenseTensor::zeros({da * dl, dpo, db * dr});
        for (int a = 0; a < da; ++a) {
            for (int po = 0; po < dpo; ++po) {
                for (int pi = 0; pi < dpi; ++pi) {
                    for (int b = 0; b < db; ++b) {
                        const cplx c = w.at4(a, po, pi, b);
                        if (c == cplx(0.0, 0.0)) continue;
                        for (int l = 0; l < dl; ++l) {
                            for (int r = 0; r < dr; ++r) {
                                t.at3(a * dl + l, po, b * dr + r) += c * m.at3(l, pi, r);
                            }
                        }
                    }
                }
            }
        }
        out.cores.push_back(std::move(t));
    }
    return out;
}

double norm_squared(const MPS& s) {
    s.check();
    Eigen::MatrixXcd T =
        Eigen::MatrixXcd::Identity(s.cores[0].shape[0], s.cores[0].shape[0]);
    for (const auto& c : s.cores) {
        Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(c.shape[2], c.shape[2]);
        for (int p = 0; p < c.shape[1]; ++p) {
            const auto a = phys_slice(c, p);
            next.noalias() += a.adjoint() * (T * a);
        }
        T = std::move(next);
    }
    return T.trace().real();
}

CompressResult compress(const MPS& s, const CompressionParams& p) {
    s.check();
    if (p.epsTrunc < 0.0 || p.epsTrunc >= 1.0) {
        throw std::invalid_argument("compress: need 0 <= epsTrunc < 1");
    }
    if (p.chiMax < 0) throw std::invalid_argument("compress: chiMax < 0");

    CompressResult out;
    out.mps = s;
    auto& cores = out.mps.cores;
    const std::size_t n = cores.size();
    double normIn = 0.0;

    if (p.method == CompressionParams::Method::Direct) {
        for (std::size_t i = n - 1; i >= 1; --i) right_canonicalize_step(cores, i);
        normIn = frobenius(cores[0]);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            out.discardedWeight += truncate_step(cores, i, p.chiMax, p.epsTrunc);
        }
    } else {
        normIn = std::sqrt(std::max(0.0, norm_squared(s)));
        for (std::size_t i = 0; i + 1 < n; ++i) {
            out.discardedWeight += truncate_step(cores, i, p.chiMax, p.epsTrunc / 10.0);
        }
        for (std::size_t i = n - 1; i >= 1; --i) right_canonicalize_step(cores, i);
    }

    if (p.renormalize) {
        // The norm-carrying core sits at the end the final sweep ran toward.
        DenseTensor& carrier =
            (p.method == CompressionParams::Method::Direct) ? cores[n - 1] : cores[0];
        const double normOut = frobenius(carrier);
        if (normOut > 0.0 && normIn > 0.0) {
            scale_core(carrier, 1.0 / normOut);
            out.logNorm = std::log(normIn);
        }
    }
    return out;
}

void right_canonicalize_site(std::vector<DenseTensor>& cores, std::size_t i) {
    if (i < 1 || i >= cores.size()) {
        throw std::invalid_argument("right_canonicalize_site: site index out of range");
    }
    right_canonicalize_step(cores, i);
}

CompressResult compress_right_canonical(const MPS& s, const CompressionParams& p) {
    s.check();
    if (p.epsTrunc < 0.0 || p.epsTrunc >= 1.0) {
        throw std::invalid_argument("compress_right_canonical: need 0 <= epsTrunc < 1");
    }
    if (p.chiMax < 0) throw std::invalid_argument("compress_right_canonical: chiMax < 0");
    if (p.method != CompressionParams::Method::Direct) {
        throw std::invalid_argument("compress_right_canonical: only the direct sweep applies");
    }
    if (p.renormalize) {
        throw std::invalid_argument("compress_right_canonical: norm bookkeeping unavailable");
    }
    CompressResult out;
    out.mps = s;
    auto& cores = out.mps.cores;
    for (std::size_t i = 0; i + 1 < cores.size(); ++i) {
        out.discardedWeight += truncate_step(cores, i, p.chiMax, p.epsTrunc);
    }
    return out;
}

Eigen::MatrixXcd contract_with_config_open(const MPS& s, const std::vector<int>& config) {
    s.check();
    if (config.size() != s.sites()) {
        throw std::invalid_argument("contract_with_config: config length mismatch");
    }
    for (std::size_t i = 0; i < config.size(); ++i) {
        if (config[i] < 0 || config[i] >= s.phys_dim(i)) {
            throw std::out_of_range("contract_with_config: physical index out of range");
        }
    }
    Eigen::MatrixXcd acc = phys_slice(s.cores[0], config[0]);
    for (std::size_t i = 1; i < s.sites(); ++i) {
        acc = acc * phys_slice(s.cores[i], config[i]);
    }
    return acc;
}

cplx contract_with_config(const MPS& s, const std::vector<int>& config) {
    const Eigen::MatrixXcd m = contract_with_config_open(s, config);
    if (m.rows() != 1 || m.cols() != 1) {
        throw std::invalid_argument("contract_with_config: terminal bonds must be extent 1");
    }
    return m(0, 0);
}

std::vector<double> schmidt_at_bond(const MPS& s, std::size_t r) {
    s.check();
    if (r < 1 || r >= s.sites()) {
        throw std::invalid_argument("schmidt_at_bond: bond index out of range");
    }
    std::vector<DenseTensor> cores = s.cores;
    for (std::size_t i = cores.size() - 1; i >= 1; --i) right_canonicalize_step(cores, i);

    // Left-canonicalize up to the bond; the last remainder matrix carries the
    // whole Schmidt spectrum because both environments are then isometric.
    Eigen::MatrixXcd bondMatrix;
    for (std::size_t i = 0; i < r; ++i) {
        DenseTensor& c = cores[i];
        const auto qr = thin_qr(as_lp_r(c));
        c = core_from(qr.Q, c.shape[0], c.shape[1], int(qr.Q.cols()));
        if (i + 1 < r) {
            DenseTensor& next = cores[i + 1];
            const Eigen::MatrixXcd carried = qr.R * as_l_pr(next);
            next = core_from(carried, int(qr.R.rows()), next.shape[1], next.shape[2]);
        } else {
            bondMatrix = qr.R;
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(bondMatrix);
    std::vector<double> out(svd.singularValues().data(),
                            svd.singularValues().data() + svd.singularValues().size());
    return out;
}

}  // namespace quapi::tn
