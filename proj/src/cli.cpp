// cli.cpp - config schema, run driver, and the subcommand bodies

#include "quapi/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "quapi/eta.hpp"
#include "quapi/evolution.hpp"
#include "quapi/observables.hpp"
#include "quapi/snapshot.hpp"

namespace quapi::cli {
namespace {

using json = nlohmann::json;
using cplx = std::complex<double>;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw std::invalid_argument("config: " + path + ": " + msg);
}

std::string joined(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

const json& need(const json& obj, const std::string& parent, const std::string& key) {
    if (!obj.contains(key)) fail(joined(parent, key), "missing required field");
    return obj.at(key);
}

double need_number(const json& obj, const std::string& parent, const std::string& key) {
    const json& v = need(obj, parent, key);
    if (!v.is_number()) fail(joined(parent, key), "missing required number");
    return v.get<double>();
}

int need_int(const json& obj, const std::string& parent, const std::string& key) {
    const json& v = need(obj, parent, key);
    if (!v.is_number_integer()) fail(joined(parent, key), "expected an integer");
    return v.get<int>();
}

std::string need_string(const json& obj, const std::string& parent, const std::string& key) {
    const json& v = need(obj, parent, key);
    if (!v.is_string()) fail(joined(parent, key), "expected a string");
    return v.get<std::string>();
}

const json& need_array(const json& obj, const std::string& parent, const std::string& key) {
    const json& v = need(obj, parent, key);
    if (!v.is_array()) fail(joined(parent, key), "expected an array");
    return v;
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

// A time-dependent parameter: a bare number, or an object selecting the
// piecewise-linear or sampled representation.
model::TimeScalar parse_field(const json& v, const std::string& path) {
    if (v.is_number()) return model::TimeScalar::constant(v.get<double>());
    if (!v.is_object()) fail(path, "expected a number or a {type: ...} object");
    std::string type = need_string(v, path, "type");
    try {
        if (type == "piecewise") {
            const json& js = need_array(v, path, "samples");
            std::vector<std::pair<double, double>> samples;
            for (std::size_t i = 0; i < js.size(); ++i) {
                const json& s = js[i];
                if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
                    fail(path + ".samples[" + std::to_string(i) + "]", "expected a [t, value] pair");
                samples.emplace_back(s[0].get<double>(), s[1].get<double>());
            }
            return model::TimeScalar::piecewise(std::move(samples));
        }
        if (type == "tabulated") {
            double t0 = need_number(v, path, "t0");
            double step = need_number(v, path, "step");
            std::vector<double> values = number_list(need(v, path, "values"), path + ".values");
            return model::TimeScalar::tabulated(t0, step, std::move(values));
        }
    } catch (const std::invalid_argument& e) {
        std::string what = e.what();
        if (what.rfind("config:", 0) == 0) throw;
        fail(path, what);
    }
    fail(path + ".type", "expected \"piecewise\" or \"tabulated\"");
}

// Parse errors for a whole parameter family (one entry per site).
std::vector<model::TimeScalar> parse_field_array(const json& obj, const std::string& parent,
                                                 const std::string& key, std::size_t L) {
    const json& v = need_array(obj, parent, key);
    if (v.size() != L)
        fail(joined(parent, key), "expected " + std::to_string(L) + " entries, got " +
                                      std::to_string(v.size()));
    std::vector<model::TimeScalar> out;
    out.reserve(L);
    for (std::size_t i = 0; i < L; ++i)
        out.push_back(parse_field(v[i], joined(parent, key) + "[" + std::to_string(i) + "]"));
    return out;
}

void verify_coverage(const model::TimeScalar& ts, const std::string& path, double tEnd) {
    if (ts.kind == model::TimeScalar::Kind::Constant) return;
    try {
        model::eval_scalar(ts, 0.0);
        model::eval_scalar(ts, tEnd);
    } catch (const std::out_of_range&) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", tEnd);
        fail(path, std::string("must cover times [0, ") + buf + "]");
    }
}

bath::SpectralComponent parse_component(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected a component object");
    std::string shape = need_string(v, path, "shape");
    double wIR = v.contains("wIR") ? need_number(v, path, "wIR") : 0.0;
    double wUV = need_number(v, path, "wUV");
    try {
        if (shape == "ohmic")
            return bath::SpectralComponent::ohmic(need_number(v, path, "eta"),
                                                  need_number(v, path, "wc"), wIR, wUV);
        if (shape == "tabulated")
            return bath::SpectralComponent::tabulated(
                number_list(need(v, path, "w"), path + ".w"),
                number_list(need(v, path, "a"), path + ".a"), wIR, wUV);
        if (shape == "expression")
            return bath::SpectralComponent::expression(need_string(v, path, "formula"), wIR, wUV);
    } catch (const std::invalid_argument& e) {
        std::string what = e.what();
        if (what.rfind("config:", 0) == 0) throw;
        fail(path, what);
    }
    fail(path + ".shape", "expected \"ohmic\", \"tabulated\", or \"expression\"");
}

// Per-site bath list for one coupling axis: null entries mean no noise there.
void parse_axis_baths(const json& obj, const std::string& parent, const std::string& key,
                      bath::Axis axis, bath::BathModel& b, double tEnd) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_array()) fail(joined(parent, key), "expected an array with one entry per site");
    if (v.size() != b.L)
        fail(joined(parent, key), "expected " + std::to_string(b.L) + " entries, got " +
                                      std::to_string(v.size()));
    const std::size_t a = static_cast<std::size_t>(axis);
    for (std::size_t r = 0; r < b.L; ++r) {
        const std::string sitePath = joined(parent, key) + "[" + std::to_string(r) + "]";
        const json& site = v[r];
        if (site.is_null()) continue;
        if (!site.is_object()) fail(sitePath, "expected null or a {components: ...} object");
        if (site.contains("scale")) {
            b.couplingScale[a][r] = parse_field(site.at("scale"), sitePath + ".scale");
            verify_coverage(b.couplingScale[a][r], sitePath + ".scale", tEnd);
        }
        const json& comps = need_array(site, sitePath, "components");
        if (comps.empty()) fail(sitePath + ".components", "expected at least one component");
        for (std::size_t c = 0; c < comps.size(); ++c)
            b.components[a][r].push_back(parse_component(
                comps[c], sitePath + ".components[" + std::to_string(c) + "]"));
    }
}

std::vector<Eigen::Vector2cd> parse_initial(const json& run, std::size_t L, unsigned seed) {
    const Eigen::Vector2cd up(1.0, 0.0);
    if (!run.contains("initial")) return std::vector<Eigen::Vector2cd>(L, up);
    const json& v = run.at("initial");
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s == "up") return std::vector<Eigen::Vector2cd>(L, up);
        if (s == "plus") {
            const double q = 1.0 / std::sqrt(2.0);
            return std::vector<Eigen::Vector2cd>(L, Eigen::Vector2cd(q, q));
        }
        if (s == "random") {
            std::mt19937 gen(seed);
            std::normal_distribution<double> nd;
            std::vector<Eigen::Vector2cd> amps(L);
            for (std::size_t r = 0; r < L; ++r) {
                Eigen::Vector2cd a(cplx(nd(gen), nd(gen)), cplx(nd(gen), nd(gen)));
                amps[r] = a / a.norm();
            }
            return amps;
        }
        fail("run.initial", "expected \"up\", \"plus\", \"random\", or per-site amplitudes");
    }
    if (!v.is_array() || v.size() != L)
        fail("run.initial", "expected a string or " + std::to_string(L) + " per-site entries");
    std::vector<Eigen::Vector2cd> amps(L);
    for (std::size_t r = 0; r < L; ++r) {
        const std::string path = "run.initial[" + std::to_string(r) + "]";
        const json& site = v[r];
        if (!site.is_array() || site.size() != 2) fail(path, "expected two [re, im] amplitudes");
        for (int j = 0; j < 2; ++j) {
            const json& a = site[j];
            if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
                fail(path + "[" + std::to_string(j) + "]", "expected an [re, im] pair");
            amps[r](j) = cplx(a[0].get<double>(), a[1].get<double>());
        }
        double nrm = amps[r].norm();
        if (nrm < 1e-300) fail(path, "amplitudes must not all vanish");
        amps[r] /= nrm;
    }
    return amps;
}

std::vector<ObservableSpec> parse_observables(const json& doc, std::size_t L) {
    const json& v = need_array(doc, "", "observables");
    std::vector<ObservableSpec> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string path = "observables[" + std::to_string(i) + "]";
        const json& o = v[i];
        if (!o.is_object()) fail(path, "expected an observable object");
        std::string kind = need_string(o, path, "kind");
        ObservableSpec spec;
        if (kind == "sx" || kind == "sy" || kind == "sz") {
            spec.kind = kind == "sx"   ? ObservableSpec::Kind::Sx
                        : kind == "sy" ? ObservableSpec::Kind::Sy
                                       : ObservableSpec::Kind::Sz;
            int site = need_int(o, path, "site");
            if (site < 0 || std::size_t(site) >= L) fail(path + ".site", "site index out of range");
            spec.site = std::size_t(site);
            spec.column = kind + "[" + std::to_string(site) + "]";
        } else if (kind == "prob") {
            spec.kind = ObservableSpec::Kind::Prob;
            const json& cfg = need_array(o, path, "config");
            if (cfg.size() != L)
                fail(path + ".config", "expected " + std::to_string(L) + " entries");
            std::string tag;
            for (std::size_t r = 0; r < L; ++r) {
                const int s = cfg[r].is_number_integer() ? cfg[r].get<int>() : 0;
                if (s != 1 && s != -1)
                    fail(path + ".config[" + std::to_string(r) + "]", "expected +1 or -1");
                spec.config.push_back(s);
                tag += s > 0 ? '+' : '-';
            }
            spec.column = "prob[" + tag + "]";
        } else if (kind == "energy" || kind == "trace" || kind == "realign") {
            spec.kind = kind == "energy"  ? ObservableSpec::Kind::Energy
                        : kind == "trace" ? ObservableSpec::Kind::Trace
                                          : ObservableSpec::Kind::Realign;
            spec.column = kind;
        } else {
            fail(path + ".kind", "unknown observable kind \"" + kind + "\"");
        }
        out.push_back(std::move(spec));
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_dense_csv(const std::string& path, const Eigen::MatrixXcd& m) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "row,col,re,im\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            f << i << "," << j << "," << fmt(m(i, j).real()) << "," << fmt(m(i, j).imag())
              << "\n";
    if (!f.good()) throw std::runtime_error("failed while writing " + path);
}

Eigen::MatrixXcd read_dense_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("row,col,re,im", 0) != 0)
        throw std::invalid_argument(path + ": not a dense-matrix CSV");
    struct Entry {
        long row, col;
        double re, im;
    };
    std::vector<Entry> entries;
    long maxIdx = -1;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        Entry e;
        char comma;
        std::istringstream is(line);
        if (!(is >> e.row >> comma >> e.col >> comma >> e.re >> comma >> e.im))
            throw std::invalid_argument(path + ": malformed line \"" + line + "\"");
        maxIdx = std::max({maxIdx, e.row, e.col});
        entries.push_back(e);
    }
    if (maxIdx < 0) throw std::invalid_argument(path + ": no matrix entries");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(maxIdx + 1, maxIdx + 1);
    for (const auto& e : entries) m(e.row, e.col) = cplx(e.re, e.im);
    return m;
}

std::string out_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::invalid_argument("cannot create output directory " + dir + ": " +
                                        ec.message());
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config: expected a top-level JSON object");

    RunConfig cfg;

    // run section first: the horizon governs the coverage checks below
    const json& jr = need(doc, "", "run");
    if (!jr.is_object()) fail("run", "expected an object");
    cfg.dt = need_number(jr, "run", "dt");
    if (!(cfg.dt > 0.0)) fail("run.dt", "must be positive");
    cfg.nSteps = need_int(jr, "run", "nSteps");
    if (cfg.nSteps < 1) fail("run.nSteps", "must be at least 1");
    const double tEnd = cfg.nSteps * cfg.dt;

    if (jr.contains("chiMax")) {
        cfg.params.chiMax = need_int(jr, "run", "chiMax");
        if (cfg.params.chiMax < 0) fail("run.chiMax", "must be nonnegative (0 = unlimited)");
    }
    if (jr.contains("epsTrunc")) {
        cfg.params.epsTrunc = need_number(jr, "run", "epsTrunc");
        if (cfg.params.epsTrunc < 0.0 || cfg.params.epsTrunc >= 1.0)
            fail("run.epsTrunc", "must lie in [0, 1)");
    }
    if (jr.contains("method")) {
        std::string m = need_string(jr, "run", "method");
        if (m == "direct")
            cfg.params.method = tn::CompressionParams::Method::Direct;
        else if (m == "zipup")
            cfg.params.method = tn::CompressionParams::Method::Zipup;
        else
            fail("run.method", "expected \"direct\" or \"zipup\"");
    }
    if (jr.contains("seed")) {
        long long s = need_int(jr, "run", "seed");
        if (s < 0) fail("run.seed", "must be nonnegative");
        cfg.seed = static_cast<unsigned>(s);
    }
    if (jr.contains("csv")) cfg.csvName = need_string(jr, "run", "csv");
    if (jr.contains("report")) cfg.reportName = need_string(jr, "run", "report");
    if (jr.contains("rho")) cfg.rhoName = need_string(jr, "run", "rho");

    // model section
    const json& jm = need(doc, "", "model");
    if (!jm.is_object()) fail("model", "expected an object");
    int L = need_int(jm, "model", "L");
    if (L < 1) fail("model.L", "must be at least 1");
    cfg.sys.L = std::size_t(L);
    cfg.sys.hx = parse_field_array(jm, "model", "hx", cfg.sys.L);
    cfg.sys.hz = parse_field_array(jm, "model", "hz", cfg.sys.L);
    cfg.sys.Jzz = parse_field_array(jm, "model", "Jzz", cfg.sys.L);
    for (std::size_t r = 0; r < cfg.sys.L; ++r) {
        verify_coverage(cfg.sys.hx[r], "model.hx[" + std::to_string(r) + "]", tEnd);
        verify_coverage(cfg.sys.hz[r], "model.hz[" + std::to_string(r) + "]", tEnd);
        verify_coverage(cfg.sys.Jzz[r], "model.Jzz[" + std::to_string(r) + "]", tEnd);
    }
    for (const std::string& msg : model::validate_model(cfg.sys)) fail("model", msg);

    // bath section
    const json& jb = need(doc, "", "bath");
    if (!jb.is_object()) fail("bath", "expected an object");
    double beta = need_number(jb, "bath", "beta");
    double tau = need_number(jb, "bath", "tau");
    cfg.bathM = bath::BathModel::none(cfg.sys.L, beta, tau);
    parse_axis_baths(jb, "bath", "y", bath::Axis::Y, cfg.bathM, tEnd);
    parse_axis_baths(jb, "bath", "z", bath::Axis::Z, cfg.bathM, tEnd);
    for (const std::string& msg : bath::validate_bath(cfg.bathM)) fail("bath", msg);

    cfg.initialAmps = parse_initial(jr, cfg.sys.L, cfg.seed);
    cfg.observables = parse_observables(doc, cfg.sys.L);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

int run_simulation(const RunConfig& cfg, const RunOptions& opt) {
    if (opt.threads < 1) throw std::invalid_argument("run: --threads must be at least 1");
    Eigen::setNbThreads(opt.threads);
    ensure_out_dir(opt.outDir);

    evo::SystemState st(cfg.sys, cfg.bathM, cfg.dt, cfg.params, evo::product_state(cfg.initialAmps));

    std::string resumedFrom = "-";
    if (!opt.resumePath.empty()) {
        evo::StateSnapshot loaded;
        try {
            loaded = snap::load_snapshot(opt.resumePath);
        } catch (const std::runtime_error& e) {
            throw std::invalid_argument(std::string("resume: ") + e.what());
        }
        st.restore(loaded);
        if (st.n() > cfg.nSteps)
            throw std::invalid_argument("resume: snapshot is already past run.nSteps");
        resumedFrom = opt.resumePath;
    }

    Eigen::MatrixXcd sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, cplx(0, -1), cplx(0, 1), 0;
    sz << 1, 0, 0, -1;

    auto column_value = [&](const ObservableSpec& spec) -> double {
        const tn::MPS& rho = st.rho();
        switch (spec.kind) {
        case ObservableSpec::Kind::Sx:
            return obs::expect_product(rho, spec.site, {sx}).real();
        case ObservableSpec::Kind::Sy:
            return obs::expect_product(rho, spec.site, {sy}).real();
        case ObservableSpec::Kind::Sz:
            return obs::expect_product(rho, spec.site, {sz}).real();
        case ObservableSpec::Kind::Prob:
            return obs::spin_config_prob(rho, spec.config);
        case ObservableSpec::Kind::Energy:
            return obs::energy_per_cell(rho, cfg.sys, st.t());
        case ObservableSpec::Kind::Trace:
            return (std::exp(st.log_scale()) * obs::trace_rho(rho)).real();
        case ObservableSpec::Kind::Realign: {
            obs::RealignmentResult r = obs::realignment_check(rho);
            double worst = 0.0;
            for (double s : r.schmidtSums) worst = std::max(worst, s);
            return worst;
        }
        }
        return 0.0;
    };

    const std::string csvPath = out_path(opt.outDir, cfg.csvName);
    std::ofstream csv(csvPath);
    if (!csv) throw std::runtime_error("cannot open " + csvPath + " for writing");
    csv << "t";
    for (const auto& spec : cfg.observables) csv << "," << spec.column;
    csv << "\n";

    auto write_row = [&]() {
        csv << fmt(st.t());
        for (const auto& spec : cfg.observables) {
            double v = column_value(spec);
            if (!std::isfinite(v))
                throw std::runtime_error("run: step " + std::to_string(st.n()) +
                                         " failed: column " + spec.column + " is not finite");
            csv << "," << fmt(v);
        }
        csv << "\n";
    };

    auto bond_profile = [&]() {
        const tn::MPS& rho = st.rho();
        if (rho.sites() < 2) return std::string("-");
        std::string s;
        for (std::size_t i = 1; i < rho.sites(); ++i) {
            if (!s.empty()) s += ";";
            s += std::to_string(rho.bond_dim(i));
        }
        return s;
    };

    const auto wallStart = std::chrono::steady_clock::now();
    std::map<int, std::string> profiles;
    profiles[st.n()] = bond_profile();

    write_row();
    while (st.n() < cfg.nSteps) {
        const int stepping = st.n() + 1;
        try {
            st.evolve_step();
            write_row();
        } catch (const std::exception& e) {
            std::string what = e.what();
            if (what.rfind("run: step ", 0) == 0) throw;
            throw std::runtime_error("run: step " + std::to_string(stepping) +
                                     " failed: " + what);
        }
        profiles[st.n()] = bond_profile();
        if (!opt.checkpointPath.empty()) snap::save_snapshot(st.capture(), opt.checkpointPath);
    }
    csv.close();
    if (!csv.good()) throw std::runtime_error("failed while writing " + csvPath);

    const double wallTotal =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wallStart).count();

    const std::string reportPath = out_path(opt.outDir, cfg.reportName);
    std::ofstream rep(reportPath);
    if (!rep) throw std::runtime_error("cannot open " + reportPath + " for writing");
    rep << "quapi run report\n";
    rep << "sites: " << cfg.sys.L << "\n";
    rep << "dt: " << fmt(cfg.dt) << "\n";
    rep << "steps: " << cfg.nSteps << "\n";
    rep << "fine_slots_per_step: " << st.delta_m() << "\n";
    rep << "window_steps: " << st.k_tau() << "\n";
    rep << "chi_max: " << cfg.params.chiMax << "\n";
    rep << "eps_trunc: " << fmt(cfg.params.epsTrunc) << "\n";
    rep << "method: "
        << (cfg.params.method == tn::CompressionParams::Method::Direct ? "direct" : "zipup")
        << "\n";
    rep << "threads: " << opt.threads << "\n";
    rep << "resumed_from: " << resumedFrom << "\n";
    rep << "final_trace: " << fmt((std::exp(st.log_scale()) * obs::trace_rho(st.rho())).real())
        << "\n";
    rep << "final_log_scale: " << fmt(st.log_scale()) << "\n";
    rep << "total_wall_seconds: " << fmt(wallTotal) << "\n";
    rep << "\n";
    rep << "step t influence_discarded state_discarded max_bond bonds log_scale wall_seconds\n";
    for (const evo::StepReport& h : st.history()) {
        auto it = profiles.find(h.n);
        rep << h.n << " " << fmt(h.n * cfg.dt) << " " << fmt(h.influenceDiscarded) << " "
            << fmt(h.stateDiscarded) << " " << h.maxBond << " "
            << (it == profiles.end() ? "-" : it->second) << " " << fmt(h.logScale) << " "
            << fmt(h.wallSeconds) << "\n";
    }
    rep.close();
    if (!rep.good()) throw std::runtime_error("failed while writing " + reportPath);

    if (cfg.sys.L <= 8) {
        Eigen::MatrixXcd dense = std::exp(st.log_scale()) * obs::dense_rho(st.rho());
        write_dense_csv(out_path(opt.outDir, cfg.rhoName), dense);
    }
    return 0;
}

int cmd_validate(const std::string& configPath) {
    RunConfig cfg = parse_config(configPath);
    std::cout << "ok: " << cfg.sys.L << " sites, " << cfg.nSteps << " steps of dt=" << cfg.dt
              << ", " << cfg.observables.size() << " observables\n";
    return 0;
}

int cmd_bath_info(const std::string& configPath, const std::string& outDir) {
    RunConfig cfg = parse_config(configPath);
    ensure_out_dir(outDir);
    const std::string path = out_path(outDir, "bath_info.csv");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "axis,site,omega,A_T\n";
    const int samples = 200;
    for (bath::Axis axis : {bath::Axis::Y, bath::Axis::Z}) {
        const char* name = axis == bath::Axis::Y ? "y" : "z";
        for (std::size_t r = 0; r < cfg.bathM.L; ++r) {
            if (!cfg.bathM.has_noise(axis, r)) continue;
            double wUV = 0.0;
            for (const auto& c : cfg.bathM.components[std::size_t(axis)][r])
                wUV = std::max(wUV, c.wUV);
            f << name << "," << r << ",0," << fmt(eval_spectral_density(cfg.bathM, axis, r, 0.0))
              << "\n";
            for (int j = 0; j <= samples; ++j) {
                double w = -wUV + 2.0 * wUV * j / samples;
                if (w == 0.0) continue;
                f << name << "," << r << "," << fmt(w) << ","
                  << fmt(eval_spectral_density(cfg.bathM, axis, r, w)) << "\n";
            }
        }
    }
    f.close();
    if (!f.good()) throw std::runtime_error("failed while writing " + path);
    std::cout << "bath-info: wrote " << path << "\n";
    return 0;
}

int cmd_eta_dump(const std::string& configPath, const std::string& outDir, int steps) {
    RunConfig cfg = parse_config(configPath);
    ensure_out_dir(outDir);
    if (steps <= 0) steps = eta::k_tau(cfg.bathM.tau, cfg.dt);
    const std::string path = out_path(outDir, "eta_dump.csv");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "axis,site,n,l1,l2,re,im\n";
    long rows = 0;
    for (bath::Axis axis : {bath::Axis::Y, bath::Axis::Z}) {
        const char* name = axis == bath::Axis::Y ? "y" : "z";
        for (std::size_t r = 0; r < cfg.bathM.L; ++r) {
            if (!cfg.bathM.has_noise(axis, r)) continue;
            eta::EtaCaches caches = eta::build_eta_caches(cfg.bathM, axis, r, cfg.dt);
            for (int l1 = 0; l1 <= 2 * steps + 1; ++l1)
                for (int l2 = 0; l2 <= l1; ++l2) {
                    auto v = eta::eta_lookup(caches, steps, l1, l2);
                    if (!v) continue;
                    f << name << "," << r << "," << steps << "," << l1 << "," << l2 << ","
                      << fmt(v->real()) << "," << fmt(v->imag()) << "\n";
                    ++rows;
                }
        }
    }
    f.close();
    if (!f.good()) throw std::runtime_error("failed while writing " + path);
    std::cout << "eta-dump: wrote " << path << " (" << rows << " coefficients)\n";
    return 0;
}

int cmd_brute(const std::string& configPath, const std::string& outDir,
              const std::string& comparePath) {
    RunConfig cfg = parse_config(configPath);
    ensure_out_dir(outDir);

    const std::size_t dim = std::size_t(1) << cfg.sys.L;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi(0) = 1.0;
    for (std::size_t r = 0; r < cfg.sys.L; ++r) {
        Eigen::VectorXcd next = Eigen::VectorXcd::Zero(dim);
        const std::size_t block = dim >> (r + 1);
        for (std::size_t i = 0; i < dim; ++i) {
            if (psi(i) == 0.0) continue;
            next(i) += psi(i) * cfg.initialAmps[r](0);
            next(i + block) += psi(i) * cfg.initialAmps[r](1);
        }
        psi = next;
    }

    Eigen::MatrixXcd m = obs::brute_force_rho(cfg.sys, cfg.bathM, cfg.nSteps, cfg.dt, psi);
    const std::string path = out_path(outDir, "rho_brute.csv");
    write_dense_csv(path, m);
    std::cout << "brute: wrote " << path << "\n";

    if (!comparePath.empty()) {
        Eigen::MatrixXcd other = read_dense_csv(comparePath);
        if (other.rows() != m.rows())
            throw std::invalid_argument("compare: dimension mismatch: " +
                                        std::to_string(other.rows()) + " vs " +
                                        std::to_string(m.rows()));
        double maxDiff = (other - m).cwiseAbs().maxCoeff();
        std::cout << "max_abs_diff = " << fmt(maxDiff) << "\n";
    }
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"windowed path-integral evolution of a driven open spin chain"};
    app.require_subcommand(1);

    std::string config, out = ".", checkpoint, resume, compare;
    int threads = 1, steps = 0;

    CLI::App* run = app.add_subcommand("run", "evolve the chain and write observables");
    run->add_option("--config", config, "JSON config file")->required();
    run->add_option("--out", out, "output directory");
    run->add_option("--threads", threads, "threads for dense linear algebra");
    run->add_option("--checkpoint", checkpoint, "write a resumable snapshot here every step");
    run->add_option("--resume", resume, "restore this snapshot before stepping");

    CLI::App* val = app.add_subcommand("validate", "check a config and exit");
    val->add_option("--config", config, "JSON config file")->required();

    CLI::App* binfo = app.add_subcommand("bath-info", "tabulate the dressed spectral densities");
    binfo->add_option("--config", config, "JSON config file")->required();
    binfo->add_option("--out", out, "output directory");

    CLI::App* edump = app.add_subcommand("eta-dump", "tabulate the memory-kernel coefficients");
    edump->add_option("--config", config, "JSON config file")->required();
    edump->add_option("--out", out, "output directory");
    edump->add_option("--steps", steps, "step count for the index table (default: window)");

    CLI::App* brute = app.add_subcommand("brute", "dense path-sum evolution for small chains");
    brute->add_option("--config", config, "JSON config file")->required();
    brute->add_option("--out", out, "output directory");
    brute->add_option("--compare", compare, "dense-matrix CSV to diff against");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) {
            RunConfig cfg = parse_config(config);
            RunOptions opt;
            opt.outDir = out;
            opt.threads = threads;
            opt.checkpointPath = checkpoint;
            opt.resumePath = resume;
            return run_simulation(cfg, opt);
        }
        if (val->parsed()) return cmd_validate(config);
        if (binfo->parsed()) return cmd_bath_info(config, out);
        if (edump->parsed()) return cmd_eta_dump(config, out, steps);
        if (brute->parsed()) return cmd_brute(config, out, compare);
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace quapi::cli
