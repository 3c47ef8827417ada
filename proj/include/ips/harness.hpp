#pragma once

#include <string>
#include <vector>

#include "ips/stats.hpp"

namespace ips::harness {

/// Resolved experiment configuration; defaults match the desk-scale checks.
struct ExperimentConfig {
    std::string kind;  // verify-ybe | verify-intertwining | verify-lax | simulate |
                       // couple-swap | couple-slowdown | couple-speedup | poisson-coupling
    std::string system = "ct-qtasep";  // for simulate
    double q = 0.0;
    double gamma = 1.5;    // q-Hahn q^J
    double nu = 0.3;       // Schur
    double r = 0.7;        // geometric speed ratio
    double alpha0 = 1.0;   // leading speed
    double alpha1 = 0.6;   // second speed (two-car scenarios)
    double tau = 0.7;      // slowdown/speedup duration
    double t_end = 1.0;    // simulation horizon
    int swap_n = 1;
    int max_entries = 6;   // Yang-Baxter boundary bound
    int draws = 100;       // random parameter draws per regime
    std::vector<int> J_list = {1, 2, 3};
    long long replicas = 100000;
    std::uint64_t seed = 1;
    double significance = 0.001;
    int workers = 1;
    std::string out_dir;  // empty: no artifact files
    bool emit_trajectories = false;

    void validate() const;  // throws ConfigError
};

struct RunResult {
    std::vector<stats::TestReport> reports;
    bool all_pass = true;
};

/// Execute one experiment; deterministic given (config, seed). Writes
/// report.json / summary.csv (and optional artifacts) under out_dir.
RunResult run(const ExperimentConfig& cfg);

// individual experiment drivers (reused by the acceptance suite)
std::vector<stats::TestReport> run_verify_ybe(const ExperimentConfig& cfg);
std::vector<stats::TestReport> run_verify_intertwining(const ExperimentConfig& cfg);
std::vector<stats::TestReport> run_verify_lax(const ExperimentConfig& cfg);
std::vector<stats::TestReport> run_simulate(const ExperimentConfig& cfg);
std::vector<stats::TestReport> run_couple_swap(const ExperimentConfig& cfg);
std::vector<stats::TestReport> run_couple_slowdown(const ExperimentConfig& cfg);
std::vector<stats::TestReport> run_couple_speedup(const ExperimentConfig& cfg);
std::vector<stats::TestReport> run_poisson_coupling(const ExperimentConfig& cfg);

void write_outputs(const ExperimentConfig& cfg, const std::vector<stats::TestReport>& reports);

/// 1 - e Gamma(0,1), the no-op probability of the dilation chain.
double dilation_noop_probability();

}  // namespace ips::harness
