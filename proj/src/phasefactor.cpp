// phasefactor.cpp - scalar and MPS forms of the longitudinal phase factors

#include "quapi/phasefactor.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "quapi/influence.hpp"

namespace quapi::phase {

namespace {

using cplx = std::complex<double>;

constexpr double kSplitEps = 1e-14;  // rank cut for the coupler split

// Trapezoid-weighted sum of a parameter over the two slices flanking k.
// Zero-weight virtual slices are skipped so the parameter is never evaluated
// outside its time domain.
double edge_sum(const model::TimeScalar& par, double dt, int n, int k) {
    double acc = 0.0;
    for (int kp = k - 1; kp <= k; ++kp) {
        const double w = model::trotter_weight_w(n, kp);
        if (w != 0.0) acc += w * model::eval_scalar(par, kp * dt);
    }
    return acc;
}

// The forward and backward branches enter with opposite signs, so only the
// difference of the branch spin values survives.
double field_angle(const model::SystemModel& sys, double dt, int n, int k, std::size_t r,
                   int j) {
    const int diff = infl::g_alpha(1, j) - infl::g_alpha(-1, j);
    if (diff == 0) return 0.0;
    return -0.5 * dt * diff * edge_sum(sys.hz[r], dt, n, k);
}

double coupler_angle(const model::SystemModel& sys, double dt, int n, int k, std::size_t r,
                     int j1, int j2) {
    const int diff = infl::g_alpha(1, j1) * infl::g_alpha(1, j2) -
                     infl::g_alpha(-1, j1) * infl::g_alpha(-1, j2);
    if (diff == 0) return 0.0;
    return -0.5 * dt * diff * edge_sum(sys.Jzz[r], dt, n, k);
}

void check_args(const model::SystemModel& sys, double dt, int n, int k) {
    if (!(dt > 0.0)) throw std::invalid_argument("phase: dt must be positive");
    if (n < 1) throw std::invalid_argument("phase: n must be at least 1");
    if (k < 0 || (n != model::step_count_bulk && k > n + 1))
        throw std::invalid_argument("phase: slice index k out of range");
    if (sys.L == 0 || sys.hz.size() != sys.L || sys.Jzz.size() != sys.L)
        throw std::invalid_argument("phase: model arrays must have length L");
}

}  // namespace

std::complex<double> phase_scalar(const model::SystemModel& sys, double dt, int n, int k,
                                  const std::vector<int>& jconfig) {
    check_args(sys, dt, n, k);
    if (jconfig.size() != sys.L)
        throw std::invalid_argument("phase_scalar: config length mismatch");
    for (int j : jconfig)
        if (j < 0 || j > 3)
            throw std::invalid_argument("phase_scalar: path variables must be in 0..3");

    double angle = 0.0;
    for (std::size_t r = 0; r < sys.L; ++r)
        angle += field_angle(sys, dt, n, k, r, jconfig[r]);
    for (std::size_t r = 0; r + 1 < sys.L; ++r)
        angle += coupler_angle(sys, dt, n, k, r, jconfig[r], jconfig[r + 1]);
    return std::exp(cplx(0.0, angle));
}

tn::MPS build_phase_mps(const model::SystemModel& sys, double dt, int n, int k) {
    check_args(sys, dt, n, k);
    const std::size_t L = sys.L;

    // Split each coupler matrix across its bond, sharing the singular values
    // evenly between the two halves.
    std::vector<Eigen::MatrixXcd> rightHalf(L), leftHalf(L);
    for (std::size_t r = 0; r + 1 < L; ++r) {
        Eigen::MatrixXcd x(4, 4);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                x(a, b) = std::exp(cplx(0.0, coupler_angle(sys, dt, n, k, r, a, b)));
        const auto f = tn::truncated_factorization(x, 0, kSplitEps);
        const Eigen::VectorXd rootS = f.s.array().sqrt();
        rightHalf[r] = f.U * rootS.asDiagonal();
        leftHalf[r + 1] = rootS.asDiagonal() * f.Vdag;
    }

    tn::MPS out;
    out.cores.reserve(L);
    for (std::size_t r = 0; r < L; ++r) {
        const int dl = (r == 0) ? 1 : static_cast<int>(leftHalf[r].rows());
        const int dr = (r + 1 == L) ? 1 : static_cast<int>(rightHalf[r].cols());
        auto core = tn::DenseTensor::zeros({dl, 4, dr});
        for (int j = 0; j < 4; ++j) {
            const cplx mid = std::exp(cplx(0.0, field_angle(sys, dt, n, k, r, j)));
            for (int l = 0; l < dl; ++l) {
                const cplx lv = (r == 0) ? cplx(1.0, 0.0) : leftHalf[r](l, j);
                for (int c = 0; c < dr; ++c) {
                    const cplx rv = (r + 1 == L) ? cplx(1.0, 0.0) : rightHalf[r](j, c);
                    core.at3(l, j, c) = lv * mid * rv;
                }
            }
        }
        out.cores.push_back(std::move(core));
    }
    return out;
}

}  // namespace quapi::phase
