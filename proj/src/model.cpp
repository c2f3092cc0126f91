// Time-dependent model parameters: evaluation, validation, Trotter weights.
#include "quapi/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quapi::model {

TimeScalar TimeScalar::constant(double v) {
    TimeScalar s;
    s.kind = Kind::Constant;
    s.value = v;
    return s;
}

TimeScalar TimeScalar::piecewise(std::vector<std::pair<double, double>> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("piecewise TimeScalar needs at least one sample");
    }
    if (!std::is_sorted(samples.begin(), samples.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; })) {
        throw std::invalid_argument("piecewise TimeScalar samples must be sorted by time");
    }
    TimeScalar s;
    s.kind = Kind::PiecewiseLinear;
    s.samples = std::move(samples);
    return s;
}

TimeScalar TimeScalar::tabulated(double t0, double step, std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("tabulated TimeScalar needs at least one value");
    }
    if (step <= 0.0 && values.size() > 1) {
        throw std::invalid_argument("tabulated TimeScalar needs a positive grid step");
    }
    TimeScalar s;
    s.kind = Kind::Tabulated;
    s.t0 = t0;
    s.step = step;
    s.values = std::move(values);
    return s;
}

bool TimeScalar::is_zero() const {
    switch (kind) {
        case Kind::Constant:
            return value == 0.0;
        case Kind::PiecewiseLinear:
            return std::all_of(samples.begin(), samples.end(),
                               [](const auto& s) { return s.second == 0.0; });
        case Kind::Tabulated:
            return std::all_of(values.begin(), values.end(),
                               [](double v) { return v == 0.0; });
    }
    return false;
}

double eval_scalar(const TimeScalar& s, double t) {
    switch (s.kind) {
        case TimeScalar::Kind::Constant:
            return s.value;
        case TimeScalar::Kind::PiecewiseLinear: {
            const auto& xs = s.samples;
            if (t < xs.front().first || t > xs.back().first) {
                throw std::out_of_range("time outside piecewise sample range");
            }
            auto hi = std::lower_bound(xs.begin(), xs.end(), t,
                                       [](const auto& a, double v) { return a.first < v; });
            if (hi == xs.begin()) return hi->second;
            auto lo = hi - 1;
            if (hi == xs.end()) return lo->second;
            const double span = hi->first - lo->first;
            if (span <= 0.0) return hi->second;  // duplicate time, take the later sample
            const double w = (t - lo->first) / span;
            return lo->second + w * (hi->second - lo->second);
        }
        case TimeScalar::Kind::Tabulated: {
            if (s.values.size() == 1) {
                if (t != s.t0) throw std::out_of_range("time outside tabulated grid");
                return s.values.front();
            }
            const double x = (t - s.t0) / s.step;
            const double last = static_cast<double>(s.values.size() - 1);
            if (x < -1e-9 || x > last + 1e-9) {
                throw std::out_of_range("time outside tabulated grid");
            }
            const double xc = std::clamp(x, 0.0, last);
            const auto i = static_cast<std::size_t>(std::floor(xc));
            if (i + 1 >= s.values.size()) return s.values.back();
            const double w = xc - static_cast<double>(i);
            return s.values[i] + w * (s.values[i + 1] - s.values[i]);
        }
    }
    throw std::logic_error("unhandled TimeScalar kind");
}

namespace {

bool scalar_is_finite(const TimeScalar& s) {
    switch (s.kind) {
        case TimeScalar::Kind::Constant:
            return std::isfinite(s.value);
        case TimeScalar::Kind::PiecewiseLinear:
            return std::all_of(s.samples.begin(), s.samples.end(), [](const auto& p) {
                return std::isfinite(p.first) && std::isfinite(p.second);
            });
        case TimeScalar::Kind::Tabulated:
            return std::isfinite(s.t0) && std::isfinite(s.step) &&
                   std::all_of(s.values.begin(), s.values.end(),
                               [](double v) { return std::isfinite(v); });
    }
    return false;
}

void check_family(const std::vector<TimeScalar>& fam, std::size_t L, const char* name,
                  std::vector<std::string>& out) {
    if (fam.size() != L) {
        out.push_back(std::string(name) + ": expected " + std::to_string(L) +
                      " entries, got " + std::to_string(fam.size()));
        return;
    }
    for (std::size_t r = 0; r < fam.size(); ++r) {
        if (!scalar_is_finite(fam[r])) {
            out.push_back(std::string(name) + "[" + std::to_string(r) +
                          "]: nonfinite sample");
        }
    }
}

}  // namespace

std::vector<std::string> validate_model(const SystemModel& m) {
    std::vector<std::string> out;
    if (m.L < 1) {
        out.push_back("L must be at least 1");
        return out;
    }
    check_family(m.hx, m.L, "hx", out);
    check_family(m.hz, m.L, "hz", out);
    check_family(m.Jzz, m.L, "Jzz", out);
    if (m.Jzz.size() == m.L && !m.Jzz.back().is_zero()) {
        out.push_back("Jzz[" + std::to_string(m.L - 1) +
                      "]: boundary coupler must be identically zero on an open chain");
    }
    return out;
}

double trotter_weight_w(int n, int k) {
    if (n < 1) throw std::invalid_argument("trotter_weight_w: n must be >= 1");
    if (k < -1 || k > n + 1) throw std::out_of_range("trotter_weight_w: k out of range");
    if (k == -1 || k == n + 1) return 0.0;
    if (k == 0 || k == n) return 0.5;
    return 1.0;
}

double trotter_weight_wtilde(int n, int l) {
    if (n < 1) throw std::invalid_argument("trotter_weight_wtilde: n must be >= 1");
    if (l < 0 || l > 2 * n + 1) throw std::out_of_range("trotter_weight_wtilde: l out of range");
    if (l == 0 || l == 1 || l == 2 * n || l == 2 * n + 1) return 0.25;
    return 0.5;
}

}  // namespace quapi::model
