#include <CLI11.hpp>

#include <chrono>
#include <cstdio>

#include "ips/errors.hpp"
#include "ips/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ips - integrable particle system simulation and certification"};
    app.require_subcommand(1);

    ips::harness::ExperimentConfig cfg;
    const char* kinds[] = {"verify-ybe",   "verify-intertwining", "verify-lax",
                           "simulate",     "couple-swap",         "couple-slowdown",
                           "couple-speedup", "poisson-coupling"};
    std::vector<CLI::App*> subs;
    for (const char* kind : kinds) {
        CLI::App* sub = app.add_subcommand(kind, kind);
        sub->set_config("--config", "", "TOML configuration file");
        sub->add_option("--seed", cfg.seed, "master seed");
        sub->add_option("--replicas", cfg.replicas, "replica count");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--q", cfg.q, "quantum parameter q in [0,1)");
        sub->add_option("--tau", cfg.tau, "slowdown/speedup duration");
        sub->add_option("--t-end", cfg.t_end, "simulation horizon");
        sub->add_option("--r", cfg.r, "geometric speed ratio");
        sub->add_option("--alpha0", cfg.alpha0, "leading speed");
        sub->add_option("--alpha1", cfg.alpha1, "second speed");
        sub->add_option("--gamma", cfg.gamma, "q-Hahn parameter q^J");
        sub->add_option("--nu", cfg.nu, "Schur parameter nu");
        sub->add_option("--swap-n", cfg.swap_n, "swap operator index n");
        sub->add_option("--draws", cfg.draws, "random parameter draws per regime");
        sub->add_option("--max-entries", cfg.max_entries, "Yang-Baxter boundary bound");
        sub->add_option("--significance", cfg.significance, "statistical acceptance level");
        sub->add_option("--workers", cfg.workers, "concurrent replica workers");
        sub->add_option("--system", cfg.system,
                        "system for simulate: qhahn|geo-qtasep|ct-qtasep|backwards-qtasep|schur");
        sub->add_flag("--trajectories", cfg.emit_trajectories, "emit trajectories.jsonl");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);
    cfg.kind = app.get_subcommands().front()->get_name();

    try {
        auto start = std::chrono::steady_clock::now();
        ips::harness::RunResult result = ips::harness::run(cfg);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& r : result.reports)
            std::printf("%-38s %s  statistic=%.6g  p=%.4g\n", r.name.c_str(),
                        r.pass ? "PASS" : "FAIL", r.statistic, r.p_value);
        std::printf("%s: %s (%.2fs, %zu tests)\n", cfg.kind.c_str(),
                    result.all_pass ? "all tests passed" : "FAILURES present", secs,
                    result.reports.size());
        return result.all_pass ? 0 : 1;
    } catch (const ips::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
