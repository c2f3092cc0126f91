// Adaptive Gauss-Kronrod integration and the half-period oscillatory scheme.
#include "quapi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace quapi::quad {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (positive abscissae).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the embedded rule (nodes kXgk[1], [3], [5], [7]).
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    const double fc = f(c);
    double kronrod = kWgk[7] * fc;
    double gauss = kWg[3] * fc;

    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        const double fsum = f(c - dx) + f(c + dx);
        kronrod += kWgk[i] * fsum;
        if (i % 2 == 1) gauss += kWg[i / 2] * fsum;
    }

    Panel p;
    p.a = a;
    p.b = b;
    p.value = kronrod * h;
    // Standard scaled error heuristic of the embedded pair.
    const double diff = std::abs((kronrod - gauss) * h);
    p.error = diff;
    if (diff > 0.0) {
        const double scale = std::abs(p.value) + 1e-300;
        p.error = std::min(diff, scale * std::pow(200.0 * diff / scale, 1.5));
        p.error = std::max(p.error, diff * 1e-4);
    }
    return p;
}

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double tolAbs, double tolRel, int limit) {
    if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: need a <= b");
    if (limit < 1) throw std::invalid_argument("integrate_adaptive: limit must be positive");
    if (a == b) return {0.0, 0.0, 0};

    std::vector<Panel> panels;
    panels.reserve(64);
    panels.push_back(evaluate_panel(f, a, b));

    auto totals = [&panels]() {
        double v = 0.0, e = 0.0;
        for (const auto& p : panels) {
            v += p.value;
            e += p.error;
        }
        return std::pair<double, double>(v, e);
    };

    for (;;) {
        auto [value, error] = totals();
        const double tol = std::max(tolAbs, tolRel * std::abs(value));
        if (error <= tol) {
            return {value, error, static_cast<int>(panels.size())};
        }
        if (static_cast<int>(panels.size()) >= limit) {
            throw NonConvergence("integrate_adaptive: subinterval limit reached",
                                 {value, error, static_cast<int>(panels.size())});
        }

        // Split the panel with the largest error, skipping slivers whose
        // midpoint is no longer representable strictly inside the panel.
        std::size_t worst = panels.size();
        double worstErr = -1.0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            const Panel& p = panels[i];
            const double m = 0.5 * (p.a + p.b);
            if (!(m > p.a && m < p.b)) continue;
            if (p.error > worstErr) {
                worstErr = p.error;
                worst = i;
            }
        }
        if (worst == panels.size()) {
            // Nothing left to split; report what we have.
            throw NonConvergence("integrate_adaptive: roundoff floor reached",
                                 {value, error, static_cast<int>(panels.size())});
        }

        const Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        panels[worst] = evaluate_panel(f, p.a, mid);
        panels.push_back(evaluate_panel(f, mid, p.b));
    }
}

QuadResult integrate_weighted_osc(const std::function<double(double)>& f, double a, double b,
                                  double W, OscKind kind, double tolAbs, double tolRel) {
    if (!(a <= b)) throw std::invalid_argument("integrate_weighted_osc: need a <= b");
    if (W < 0.0) throw std::invalid_argument("integrate_weighted_osc: need W >= 0");

    if (W == 0.0 && kind == OscKind::Sin) return {0.0, 0.0, 0};

    auto product = [&f, W, kind](double w) {
        const double kernel = (kind == OscKind::Cos) ? std::cos(W * w) : std::sin(W * w);
        return f(w) * kernel;
    };

    const double cycles = W * (b - a) / (2.0 * M_PI);
    if (cycles < 1.0) {
        return integrate_adaptive(product, a, b, tolAbs, tolRel, default_subinterval_limit);
    }

    // Budget proportional to the number of completed oscillations.
    const int limit = default_subinterval_limit * (1 + static_cast<int>(std::floor(cycles)));

    // Pre-split so no panel spans more than half a period.
    const double halfPeriod = M_PI / W;
    const int nPanels = std::max(1, static_cast<int>(std::ceil((b - a) / halfPeriod)));
    const double width = (b - a) / nPanels;

    QuadResult total;
    const double panelTolAbs = std::max(tolAbs / nPanels, 1e-300);
    for (int i = 0; i < nPanels; ++i) {
        const double pa = a + i * width;
        const double pb = (i + 1 == nPanels) ? b : pa + width;
        const int remaining = limit - total.subintervalsUsed;
        if (remaining < 1) {
            throw NonConvergence("integrate_weighted_osc: panel budget exhausted", total);
        }
        QuadResult r;
        try {
            r = integrate_adaptive(product, pa, pb, panelTolAbs, tolRel,
                                   std::min(remaining, default_subinterval_limit));
        } catch (const NonConvergence& nc) {
            QuadResult best = total;
            best.value += nc.best().value;
            best.errorEstimate += nc.best().errorEstimate;
            best.subintervalsUsed += nc.best().subintervalsUsed;
            throw NonConvergence("integrate_weighted_osc: panel did not converge", best);
        }
        total.value += r.value;
        total.errorEstimate += r.errorEstimate;
        total.subintervalsUsed += r.subintervalsUsed;
    }
    return total;
}

}  // namespace quapi::quad
