// cli.hpp - batch front end: config parsing, run driver, utility subcommands

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "quapi/bath.hpp"
#include "quapi/model.hpp"
#include "quapi/tncore.hpp"

namespace quapi::cli {

// One requested output column. Site-resolved kinds (Sx, Sy, Sz) read a single
// spin; Prob takes a full +-1 configuration; Energy, Trace, and Realign act
// on the whole chain.
struct ObservableSpec {
    enum class Kind { Sx, Sy, Sz, Prob, Energy, Trace, Realign };

    Kind kind{Kind::Sz};
    std::size_t site{0};
    std::vector<int> config;
    std::string column;
};

// A fully parsed and validated run configuration. The initial state is a
// product state resolved at parse time (the random kind draws from the
// config seed, so reruns are deterministic).
struct RunConfig {
    model::SystemModel sys;
    bath::BathModel bathM;
    double dt{0.1};
    int nSteps{1};
    tn::CompressionParams params;
    unsigned seed{0};
    std::vector<Eigen::Vector2cd> initialAmps;
    std::vector<ObservableSpec> observables;
    std::string csvName{"observables.csv"};
    std::string reportName{"report.txt"};
    std::string rhoName{"rho_final.csv"};
};

// Parse a JSON config with sections model / bath / run / observables. Schema
// violations throw std::invalid_argument naming the offending field path
// (for example "config: bath.beta: missing required number").
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

struct RunOptions {
    std::string outDir{"."};
    int threads{1};
    std::string checkpointPath;  // write a snapshot here after every step
    std::string resumePath;      // restore from this snapshot before stepping
};

// Execute the configured evolution: observables CSV (first column t, columns
// in declared order), a per-step report, and for small chains the dense final
// density matrix. Returns a process exit status.
int run_simulation(const RunConfig& cfg, const RunOptions& opt);

// Subcommand bodies; each writes its artifact under outDir.
int cmd_validate(const std::string& configPath);
int cmd_bath_info(const std::string& configPath, const std::string& outDir);
int cmd_eta_dump(const std::string& configPath, const std::string& outDir, int steps);
int cmd_brute(const std::string& configPath, const std::string& outDir,
              const std::string& comparePath);

// Full argv-level entry point used by the installed binary. Exit codes:
// 0 success, 1 usage or config problems, 2 numeric failures.
int dispatch(int argc, char** argv);

}  // namespace quapi::cli
