// quadrature.hpp - adaptive 1D integration, plus weighted oscillatory kernels

#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace quapi::quad {

struct QuadResult {
    double value{0.0};
    double errorEstimate{0.0};
    int subintervalsUsed{0};
};

// Thrown when the subinterval budget runs out before the tolerance is met.
// Carries the best estimate achieved so callers can report or accept it.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, QuadResult best)
        : std::runtime_error(what), best_(best) {}
    const QuadResult& best() const noexcept { return best_; }

private:
    QuadResult best_;
};

inline constexpr int default_subinterval_limit = 2000;

// Adaptive integration of f over [a, b] with an embedded 15-point/7-point
// Gauss-Kronrod pair, bisecting the worst panel until the estimated error
// drops below max(tolAbs, tolRel*|value|) or `limit` panels are in play.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double tolAbs = 1e-12, double tolRel = 1e-12,
                              int limit = default_subinterval_limit);

enum class OscKind { Cos, Sin };

// Integral of f(w)*cos(W*w) or f(w)*sin(W*w) over [a, b] with W >= 0.
//
// W = 0 with a sine kernel is identically zero and returns without touching f.
// Slowly oscillating integrands (W*(b-a) < 2*pi) fall back to the plain
// adaptive rule on the pointwise product. Otherwise the range is pre-split
// into panels no wider than half an oscillation period and each panel is
// integrated adaptively; the total panel budget grows with the number of
// completed oscillations as 2000*(1 + floor(W*(b-a)/(2*pi))).
QuadResult integrate_weighted_osc(const std::function<double(double)>& f, double a, double b,
                                  double W, OscKind kind, double tolAbs = 1e-12,
                                  double tolRel = 1e-12);

}  // namespace quapi::quad
