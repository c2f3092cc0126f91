// snapshot.cpp - versioned JSON persistence of evolution state

#include "quapi/snapshot.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace quapi::snap {

namespace {

using nlohmann::json;

json tensor_to_json(const tn::DenseTensor& t) {
    json j;
    j["shape"] = t.shape;
    std::vector<double> re(t.data.size()), im(t.data.size());
    for (std::size_t i = 0; i < t.data.size(); ++i) {
        re[i] = t.data[i].real();
        im[i] = t.data[i].imag();
    }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j;
}

tn::DenseTensor tensor_from_json(const json& j) {
    tn::DenseTensor t = tn::DenseTensor::zeros(j.at("shape").get<std::vector<int>>());
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != t.data.size() || im.size() != t.data.size())
        throw std::runtime_error("snapshot: tensor payload does not match its shape");
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = {re[i], im[i]};
    return t;
}

json mps_to_json(const tn::MPS& s) {
    json j = json::array();
    for (const auto& c : s.cores) j.push_back(tensor_to_json(c));
    return j;
}

tn::MPS mps_from_json(const json& j) {
    tn::MPS s;
    for (const auto& c : j) s.cores.push_back(tensor_from_json(c));
    return s;
}

json report_to_json(const evo::StepReport& r) {
    return json{{"n", r.n},
                {"influenceDiscarded", r.influenceDiscarded},
                {"stateDiscarded", r.stateDiscarded},
                {"maxBond", r.maxBond},
                {"logScale", r.logScale},
                {"wallSeconds", r.wallSeconds}};
}

evo::StepReport report_from_json(const json& j) {
    evo::StepReport r;
    r.n = j.at("n").get<int>();
    r.influenceDiscarded = j.at("influenceDiscarded").get<double>();
    r.stateDiscarded = j.at("stateDiscarded").get<double>();
    r.maxBond = j.at("maxBond").get<int>();
    r.logScale = j.at("logScale").get<double>();
    r.wallSeconds = j.at("wallSeconds").get<double>();
    return r;
}

}  // namespace

std::string to_json(const evo::StateSnapshot& s) {
    json j;
    j["format"] = "quapi-state";
    j["version"] = s.version;
    j["L"] = s.L;
    j["deltaM"] = s.deltaM;
    j["kTau"] = s.kTau;
    j["n"] = s.n;
    j["dt"] = s.dt;
    j["logScale"] = s.logScale;
    j["vdashLog"] = s.vdashLog;
    j["mVdash"] = s.mVdash;
    j["rho0"] = mps_to_json(s.rho0);
    j["vdash"] = mps_to_json(s.vdash);
    j["rho"] = mps_to_json(s.rho);
    json windows = json::array();
    for (const auto& w : s.windows) windows.push_back(mps_to_json(w));
    j["windows"] = std::move(windows);
    json archives = json::array();
    for (const auto& a : s.archives) {
        json nodes = json::array();
        for (const auto& t : a) nodes.push_back(tensor_to_json(t));
        archives.push_back(std::move(nodes));
    }
    j["archives"] = std::move(archives);
    j["pathSlots"] = s.pathSlots;
    j["pathDiscarded"] = s.pathDiscarded;
    json hist = json::array();
    for (const auto& r : s.history) hist.push_back(report_to_json(r));
    j["history"] = std::move(hist);
    return j.dump(1);
}

evo::StateSnapshot from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (!j.is_object() || j.value("format", "") != "quapi-state")
            throw std::runtime_error("snapshot: not a quapi-state document");
        evo::StateSnapshot s;
        s.version = j.at("version").get<int>();
        s.L = j.at("L").get<std::size_t>();
        s.deltaM = j.at("deltaM").get<int>();
        s.kTau = j.at("kTau").get<int>();
        s.n = j.at("n").get<int>();
        s.dt = j.at("dt").get<double>();
        s.logScale = j.at("logScale").get<double>();
        s.vdashLog = j.at("vdashLog").get<double>();
        s.mVdash = j.at("mVdash").get<int>();
        s.rho0 = mps_from_json(j.at("rho0"));
        s.vdash = mps_from_json(j.at("vdash"));
        s.rho = mps_from_json(j.at("rho"));
        for (const auto& w : j.at("windows")) s.windows.push_back(mps_from_json(w));
        for (const auto& a : j.at("archives")) {
            std::vector<tn::DenseTensor> nodes;
            for (const auto& t : a) nodes.push_back(tensor_from_json(t));
            s.archives.push_back(std::move(nodes));
        }
        s.pathSlots = j.at("pathSlots").get<std::vector<int>>();
        s.pathDiscarded = j.at("pathDiscarded").get<std::vector<double>>();
        for (const auto& r : j.at("history")) s.history.push_back(report_from_json(r));
        return s;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("snapshot: malformed document: ") + e.what());
    }
}

void save_snapshot(const evo::StateSnapshot& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("snapshot: cannot open " + path + " for writing");
    out << to_json(s);
    out.close();
    if (!out) throw std::runtime_error("snapshot: write to " + path + " failed");
}

evo::StateSnapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

}  // namespace quapi::snap
