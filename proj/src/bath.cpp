// Spectral density shapes, overflow-safe temperature dressing, bath integrals.
#include "quapi/bath.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "quapi/quadrature.hpp"

namespace quapi::bath {

namespace detail {

// A formula compiled to a small stack program.
struct Expr {
    enum class Op : unsigned char {
        Const, Var, Neg, Add, Sub, Mul, Div, Pow,
        Exp, Log, Sin, Cos, Tan, Sinh, Cosh, Tanh, Sqrt, Abs
    };

    std::vector<Op> code;
    std::vector<double> constants;

    double eval(double w) const {
        double stack[64];
        int top = -1;
        std::size_t ci = 0;
        for (const Op op : code) {
            switch (op) {
                case Op::Const: stack[++top] = constants[ci++]; break;
                case Op::Var: stack[++top] = w; break;
                case Op::Neg: stack[top] = -stack[top]; break;
                case Op::Add: --top; stack[top] += stack[top + 1]; break;
                case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
                case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
                case Op::Div: --top; stack[top] /= stack[top + 1]; break;
                case Op::Pow: --top; stack[top] = std::pow(stack[top], stack[top + 1]); break;
                case Op::Exp: stack[top] = std::exp(stack[top]); break;
                case Op::Log: stack[top] = std::log(stack[top]); break;
                case Op::Sin: stack[top] = std::sin(stack[top]); break;
                case Op::Cos: stack[top] = std::cos(stack[top]); break;
                case Op::Tan: stack[top] = std::tan(stack[top]); break;
                case Op::Sinh: stack[top] = std::sinh(stack[top]); break;
                case Op::Cosh: stack[top] = std::cosh(stack[top]); break;
                case Op::Tanh: stack[top] = std::tanh(stack[top]); break;
                case Op::Sqrt: stack[top] = std::sqrt(stack[top]); break;
                case Op::Abs: stack[top] = std::abs(stack[top]); break;
            }
        }
        return stack[0];
    }
};

}  // namespace detail

namespace {

using detail::Expr;

// Recursive-descent parser for the formula grammar documented in bath.hpp.
// Unary minus binds looser than '^', so -w^2 parses as -(w^2).
class ExprParser {
public:
    explicit ExprParser(const std::string& src) : src_(src) {}

    Expr parse() {
        parse_sum();
        skip_space();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        // Depth check: the fixed evaluation stack must suffice.
        if (max_depth_ > 60) fail("formula nests too deeply");
        return std::move(out_);
    }

private:
    const std::string& src_;
    std::size_t pos_{0};
    Expr out_;
    int depth_{0};
    int max_depth_{0};

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("formula error at offset " + std::to_string(pos_) +
                                    ": " + msg);
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void push(Expr::Op op, int stackDelta) {
        out_.code.push_back(op);
        depth_ += stackDelta;
        max_depth_ = std::max(max_depth_, depth_);
    }

    void parse_sum() {
        parse_product();
        for (;;) {
            if (eat('+')) {
                parse_product();
                push(Expr::Op::Add, -1);
            } else if (eat('-')) {
                parse_product();
                push(Expr::Op::Sub, -1);
            } else {
                return;
            }
        }
    }

    void parse_product() {
        parse_unary();
        for (;;) {
            if (eat('*')) {
                parse_unary();
                push(Expr::Op::Mul, -1);
            } else if (eat('/')) {
                parse_unary();
                push(Expr::Op::Div, -1);
            } else {
                return;
            }
        }
    }

    void parse_unary() {
        if (eat('-')) {
            parse_unary();
            push(Expr::Op::Neg, 0);
        } else if (eat('+')) {
            parse_unary();
        } else {
            parse_power();
        }
    }

    void parse_power() {
        parse_primary();
        if (eat('^')) {
            parse_unary();
            push(Expr::Op::Pow, -1);
        }
    }

    void parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of formula");
        const char c = src_[pos_];

        if (c == '(') {
            ++pos_;
            parse_sum();
            if (!eat(')')) fail("missing ')'");
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            out_.constants.push_back(v);
            push(Expr::Op::Const, +1);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   std::isalnum(static_cast<unsigned char>(src_[end]))) {
                ++end;
            }
            const std::string name = src_.substr(pos_, end - pos_);
            pos_ = end;
            if (name == "w") {
                push(Expr::Op::Var, +1);
                return;
            }
            if (name == "pi") {
                out_.constants.push_back(M_PI);
                push(Expr::Op::Const, +1);
                return;
            }
            static const std::pair<const char*, Expr::Op> funcs[] = {
                {"exp", Expr::Op::Exp},   {"log", Expr::Op::Log},
                {"sin", Expr::Op::Sin},   {"cos", Expr::Op::Cos},
                {"tan", Expr::Op::Tan},   {"sinh", Expr::Op::Sinh},
                {"cosh", Expr::Op::Cosh}, {"tanh", Expr::Op::Tanh},
                {"sqrt", Expr::Op::Sqrt}, {"abs", Expr::Op::Abs}};
            for (const auto& [fname, op] : funcs) {
                if (name == fname) {
                    if (!eat('(')) fail("expected '(' after " + name);
                    parse_sum();
                    if (!eat(')')) fail("missing ')'");
                    push(op, 0);
                    return;
                }
            }
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

// Shape-preserving cubic slopes (Fritsch-Carlson). Interior slopes vanish at
// local extrema of the data, endpoints use the clamped three-point estimate.
std::vector<double> monotone_cubic_slopes(const std::vector<double>& x,
                                          const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), d(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        d[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        m[0] = m[1] = d[0];
        return m;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
            m[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    auto endpoint = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return s;
    };
    m[0] = endpoint(h[0], h[1], d[0], d[1]);
    m[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return m;
}

double hermite_eval(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& m, double xq) {
    auto hi = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t i = (hi == x.begin()) ? 0 : static_cast<std::size_t>(hi - x.begin()) - 1;
    if (i + 1 >= x.size()) i = x.size() - 2;
    const double h = x[i + 1] - x[i];
    const double s = (xq - x[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * y[i] + (s3 - 2.0 * s2 + s) * h * m[i] +
           (-2.0 * s3 + 3.0 * s2) * y[i + 1] + (s3 - s2) * h * m[i + 1];
}

void check_cutoffs(double wIR, double wUV) {
    if (!(0.0 <= wIR && wIR <= wUV)) {
        throw std::invalid_argument("spectral component needs 0 <= wIR <= wUV");
    }
    if (!std::isfinite(wUV)) {
        throw std::invalid_argument("spectral component needs a finite wUV");
    }
}

// Finite-difference slope at the origin with the fixed construction step.
double numeric_slope0(const SpectralComponent& c) {
    if (c.wIR > 0.0) return 0.0;
    const double step = 1e-6 * std::max(c.wUV, 1.0);
    const double s = c.zero_temperature(step) / step;
    if (!std::isfinite(s)) {
        throw std::invalid_argument("spectral component has no finite slope at w = 0");
    }
    return s;
}

}  // namespace

SpectralComponent SpectralComponent::ohmic(double eta, double wc, double wIR, double wUV) {
    if (!(wc > 0.0)) throw std::invalid_argument("ohmic component needs wc > 0");
    if (eta < 0.0) throw std::invalid_argument("ohmic component needs eta >= 0");
    check_cutoffs(wIR, wUV);
    SpectralComponent c;
    c.shape = Shape::Ohmic;
    c.eta = eta;
    c.wc = wc;
    c.wIR = wIR;
    c.wUV = wUV;
    c.slope0 = (wIR > 0.0) ? 0.0 : eta;
    return c;
}

SpectralComponent SpectralComponent::tabulated(std::vector<double> w, std::vector<double> a,
                                               double wIR, double wUV) {
    if (w.size() != a.size() || w.size() < 2) {
        throw std::invalid_argument("tabulated component needs >= 2 matching samples");
    }
    if (!std::is_sorted(w.begin(), w.end()) ||
        std::adjacent_find(w.begin(), w.end()) != w.end()) {
        throw std::invalid_argument("tabulated sample frequencies must strictly increase");
    }
    for (double v : a) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("tabulated sample values must be finite and >= 0");
        }
    }
    check_cutoffs(wIR, wUV);
    SpectralComponent c;
    c.shape = Shape::Tabulated;
    c.gridW = std::move(w);
    c.gridA = std::move(a);
    c.gridM = monotone_cubic_slopes(c.gridW, c.gridA);
    c.wIR = wIR;
    c.wUV = wUV;
    c.slope0 = numeric_slope0(c);
    return c;
}

SpectralComponent SpectralComponent::expression(const std::string& formula, double wIR,
                                                double wUV) {
    check_cutoffs(wIR, wUV);
    SpectralComponent c;
    c.shape = Shape::Expression;
    c.formula = formula;
    c.compiled = std::make_shared<const detail::Expr>(ExprParser(formula).parse());
    c.wIR = wIR;
    c.wUV = wUV;
    c.slope0 = numeric_slope0(c);
    return c;
}

double SpectralComponent::zero_temperature(double absOmega) const {
    if (absOmega <= wIR || absOmega > wUV) return 0.0;
    switch (shape) {
        case Shape::Ohmic:
            return eta * absOmega * std::exp(-absOmega / wc);
        case Shape::Tabulated:
            if (absOmega < gridW.front() || absOmega > gridW.back()) return 0.0;
            return std::max(0.0, hermite_eval(gridW, gridA, gridM, absOmega));
        case Shape::Expression:
            return compiled->eval(absOmega);
    }
    return 0.0;
}

double eval_component_at_T(const SpectralComponent& c, double beta, double omega) {
    if (!(beta > 0.0)) throw std::invalid_argument("eval_component_at_T: beta must be > 0");
    if (omega == 0.0) return c.slope0 / beta;

    const double threshold = 1e-3 / beta;
    const double aw = std::abs(omega);
    const double a0 = c.zero_temperature(aw);
    if (a0 == 0.0) return 0.0;

    if (aw < threshold) {
        const double x = beta * omega;
        const double x2 = x * x;
        return a0 / (beta * aw) * (1.0 + 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0);
    }
    if (omega < 0.0) {
        const double e = std::exp(beta * omega);
        return -e * a0 / (e - 1.0);
    }
    return a0 / (1.0 - std::exp(-beta * omega));
}

bool BathModel::any_y_noise() const {
    const auto& y = components[static_cast<std::size_t>(Axis::Y)];
    return std::any_of(y.begin(), y.end(), [](const auto& v) { return !v.empty(); });
}

BathModel BathModel::none(std::size_t L, double beta, double tau) {
    BathModel b;
    b.L = L;
    b.beta = beta;
    b.tau = tau;
    for (auto& axisScale : b.couplingScale) {
        axisScale.assign(L, model::TimeScalar::constant(1.0));
    }
    for (auto& axisComp : b.components) {
        axisComp.assign(L, {});
    }
    return b;
}

std::vector<std::string> validate_bath(const BathModel& b) {
    std::vector<std::string> out;
    if (!(b.beta > 0.0) || !std::isfinite(b.beta)) out.push_back("beta must be positive");
    if (!(b.tau >= 0.0) || !std::isfinite(b.tau)) out.push_back("tau must be >= 0");
    if (b.L < 1) {
        out.push_back("L must be at least 1");
        return out;
    }
    const char* axisName[2] = {"y", "z"};
    for (int axis = 0; axis < 2; ++axis) {
        if (b.couplingScale[axis].size() != b.L) {
            out.push_back(std::string("couplingScale[") + axisName[axis] + "]: expected " +
                          std::to_string(b.L) + " entries");
        }
        if (b.components[axis].size() != b.L) {
            out.push_back(std::string("components[") + axisName[axis] + "]: expected " +
                          std::to_string(b.L) + " entries");
            continue;
        }
        for (std::size_t r = 0; r < b.L; ++r) {
            for (const auto& c : b.components[axis][r]) {
                if (!(0.0 <= c.wIR && c.wIR <= c.wUV) || !std::isfinite(c.wUV)) {
                    out.push_back(std::string("components[") + axisName[axis] + "][" +
                                  std::to_string(r) + "]: cutoffs must satisfy 0 <= wIR <= wUV");
                }
                if (!std::isfinite(c.slope0)) {
                    out.push_back(std::string("components[") + axisName[axis] + "][" +
                                  std::to_string(r) + "]: nonfinite slope at w = 0");
                }
            }
        }
    }
    return out;
}

double eval_spectral_density(const BathModel& b, Axis nu, std::size_t r, double omega) {
    const auto& comps = b.components[static_cast<std::size_t>(nu)];
    if (r >= comps.size()) throw std::out_of_range("eval_spectral_density: site out of range");
    double sum = 0.0;
    for (const auto& c : comps[r]) sum += eval_component_at_T(c, b.beta, omega);
    return sum;
}

namespace {

// Frequency-axis nodes where A_T or its evaluation branch changes character.
std::vector<double> integration_nodes(const BathModel& b, Axis nu, std::size_t r) {
    const auto& comps = b.components[static_cast<std::size_t>(nu)][r];
    double wMax = 0.0;
    for (const auto& c : comps) wMax = std::max(wMax, c.wUV);
    if (wMax == 0.0) return {};

    std::set<double> pts{-wMax, 0.0, wMax};
    auto add = [&pts, wMax](double w) {
        if (w > 0.0 && w < wMax) {
            pts.insert(w);
            pts.insert(-w);
        }
    };
    add(1e-3 / b.beta);
    for (const auto& c : comps) {
        add(c.wIR);
        add(c.wUV);
    }
    return {pts.begin(), pts.end()};
}

}  // namespace

std::complex<double> bath_correlation(const BathModel& b, Axis nu, std::size_t r, double t) {
    const auto& comps = b.components[static_cast<std::size_t>(nu)];
    if (r >= comps.size()) throw std::out_of_range("bath_correlation: site out of range");
    const auto nodes = integration_nodes(b, nu, r);
    if (nodes.empty()) return {0.0, 0.0};

    auto density = [&b, nu, r](double w) { return eval_spectral_density(b, nu, r, w); };
    const double W = std::abs(t);
    // exp(-i w t) = cos(|t| w) -/+ i sin(|t| w) for t >= 0 / t < 0.
    const double sinSign = (t >= 0.0) ? -1.0 : 1.0;

    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        re += quad::integrate_weighted_osc(density, nodes[i], nodes[i + 1], W,
                                           quad::OscKind::Cos).value;
        im += sinSign * quad::integrate_weighted_osc(density, nodes[i], nodes[i + 1], W,
                                                     quad::OscKind::Sin).value;
    }
    return std::complex<double>(re, im) / (2.0 * M_PI);
}

double noise_strength(const BathModel& b, Axis nu, std::size_t r) {
    return bath_correlation(b, nu, r, 0.0).real();
}

}  // namespace quapi::bath
