#include "ips/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "ips/errors.hpp"
#include "ips/rewrite.hpp"
#include "ips/rng.hpp"
#include "ips/systems.hpp"
#include "ips/yangbaxter.hpp"

namespace ips::harness {

using operators::ParticleConfig;
using operators::PathConfig;
using operators::Sequence;
using stats::KeyedHistogram;
using stats::TestReport;

namespace {

TestReport residual_report(const std::string& name, double residual, double tol) {
    TestReport rep;
    rep.name = name;
    rep.statistic = residual;
    rep.level = tol;
    rep.p_value = residual < tol ? 1.0 : 0.0;
    rep.pass = residual < tol;
    return rep;
}

std::string config_key(const Trajectory& traj, const std::vector<double>& times, int upto) {
    std::ostringstream os;
    for (double t : times) {
        os << "|";
        for (int n = 1; n <= upto; ++n) os << traj.pos(n, t) << ",";
    }
    return os.str();
}

/// Parallel replica loop: replica i always uses the child stream of index
/// base + i, so the aggregate is independent of scheduling and worker count.
KeyedHistogram for_replicas(long long replicas, int workers, std::uint64_t seed,
                            std::uint64_t base,
                            const std::function<void(Rng&, KeyedHistogram&)>& body) {
    int w = std::max(1, workers);
    std::vector<KeyedHistogram> parts(w);
    std::vector<std::thread> threads;
    for (int k = 0; k < w; ++k) {
        threads.emplace_back([&, k] {
            for (long long i = k; i < replicas; i += w) {
                Rng rng = Rng::child(seed, base + static_cast<std::uint64_t>(i));
                body(rng, parts[k]);
            }
        });
    }
    for (auto& t : threads) t.join();
    KeyedHistogram out;
    for (int k = 0; k < w; ++k) out.merge(parts[k]);
    return out;
}

/// Move particle n of a configuration down by the continuous-time q-TASEP
/// swap law phi_{q, ratio, 0}(new gap | old gap).
ParticleConfig swap_particle_ct(Rng& rng, double q, double ratio, int n,
                                const ParticleConfig& x) {
    long long below = x.pos(n + 1);
    int gap = static_cast<int>(x.pos(n) - below - 1);
    qkernel::PhiParams p{q, ratio, 0.0, qkernel::classify_phi_regime(q, ratio, 0.0)};
    int new_gap = qkernel::phi_sample(rng, p, gap);
    std::vector<long long> pos;
    int upto = std::max(x.stored(), n + 1);
    for (int m = 1; m <= upto; ++m) pos.push_back(m == n ? below + 1 + new_gap : x.pos(m));
    return ParticleConfig(std::move(pos));
}

}  // namespace

void ExperimentConfig::validate() const {
    static const std::vector<std::string> kinds = {
        "verify-ybe",      "verify-intertwining", "verify-lax",      "simulate",
        "couple-swap",     "couple-slowdown",     "couple-speedup",  "poisson-coupling"};
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
        throw ConfigError("unknown experiment kind: " + kind);
    if (replicas < 1) throw ConfigError("replicas must be >= 1");
    if (!(significance > 0.0 && significance < 1.0))
        throw ConfigError("significance must lie in (0,1)");
    if (q < 0.0 || q >= 1.0) throw ConfigError("q must lie in [0,1)");
    if (t_end <= 0.0) throw ConfigError("t_end must be positive");
    if (workers < 1) throw ConfigError("workers must be >= 1");
}

double dilation_noop_probability() {
    // 1 - e Gamma(0,1); Gamma(0,1) = E_1(1)
    const double e1 = 0.21938393439552026;
    return 1.0 - std::exp(1.0) * e1;
}

// ------------------------------------------------------------------ verify-ybe

std::vector<TestReport> run_verify_ybe(const ExperimentConfig& cfg) {
    using weights::CrossParams;
    using weights::VertexParams;
    std::vector<TestReport> out;
    const char* regime_names[] = {"generic-q", "q-zero", "q-hahn"};
    for (int J : cfg.J_list) {
        for (int regime = 0; regime < 3; ++regime) {
            double max_res = 0;
            Rng rng(cfg.seed, 0xB0ULL + 1000 * J + regime);
            for (int draw = 0; draw < cfg.draws; ++draw) {
                double q, s1, s2, z;
                if (regime == 0) {
                    q = 0.05 + 0.9 * rng.uniform();
                    s1 = -0.9 + 0.8 * rng.uniform();
                    s2 = -0.9 + 0.8 * rng.uniform();
                    double zmax = std::min({s1 / s2, s2 / s1, q / (s1 * s2)});
                    z = zmax * rng.uniform();
                } else if (regime == 1) {
                    q = 0.0;
                    do {
                        s1 = -0.9 + 0.8 * rng.uniform();
                        s2 = -0.9 + 0.8 * rng.uniform();
                        z = std::min(s1 / s2, s2 / s1) * rng.uniform();
                    } while (s1 * s1 + s2 * s2 > 1.0 + z * s1 * s2);
                } else {
                    q = 0.05 + 0.9 * rng.uniform();
                    s1 = -0.9 + 0.8 * rng.uniform();
                    s2 = s1 * (0.2 + 0.8 * rng.uniform());
                    z = s2 / s1;
                }
                double u1 = 0.1 + 1.5 * rng.uniform();
                double u2 = z * u1;
                VertexParams v1 = VertexParams::integer_spin(q, u1, s1, J);
                VertexParams v2 = VertexParams::integer_spin(q, u2, s2, J);
                CrossParams cross = CrossParams::make(q, z, s1, s2);
                yangbaxter::YbeCache cache;
                for (int i1 = 0; i1 <= J; ++i1)
                    for (int j1 = 0; j1 <= J; ++j1)
                        for (int a = 0; a <= cfg.max_entries; ++a)
                            for (int b = 0; b <= cfg.max_entries; ++b)
                                for (int c = 0; c <= std::min(cfg.max_entries, a + b + i1); ++c) {
                                    int j3 = a + b - c + i1 - j1;
                                    if (j3 < 0 || j3 > cfg.max_entries) continue;
                                    yangbaxter::YbeBoundary bd{i1, j1, a, b, c};
                                    auto terms = yangbaxter::ybe_terms(v1, v2, cross, bd, &cache);
                                    max_res = std::max(
                                        max_res, std::abs(terms.lhs_sum() - terms.rhs_sum()));
                                }
            }
            std::ostringstream name;
            name << "ybe_J" << J << "_" << regime_names[regime];
            out.push_back(residual_report(name.str(), max_res, 1e-10));
        }
    }
    return out;
}

// ------------------------------------------------------------ verify-intertwining

std::vector<TestReport> run_verify_intertwining(const ExperimentConfig& cfg) {
    std::vector<TestReport> out;
    std::vector<PathConfig> interior;
    for (auto& g : operators::Enumeration::displacement_window(2, 6).states) interior.push_back(g);

    // generic J=1 swap, random admissible parameter draws
    {
        Rng rng(cfg.seed, 0x51ULL);
        double max_res = 0;
        int draws = std::max(1, cfg.draws / 5);
        for (int d = 0; d < draws; ++d) {
            double q = 0.2 + 0.6 * rng.uniform();
            double s0 = -0.6 + 0.2 * rng.uniform();
            double s1 = -0.6 + 0.2 * rng.uniform();
            double zmax = std::min({s0 / s1, s1 / s0, q / (s0 * s1)});
            double z = zmax * (0.2 + 0.7 * rng.uniform());
            double u0 = 0.4 + 0.4 * rng.uniform();
            Sequence u = Sequence::prefix({u0, z * u0}, 0.3);
            Sequence s = Sequence::prefix({s0, s1}, -0.4);
            auto spec = operators::ModelSpec::make(q, 1, u, s);
            auto rep = operators::verify_intertwining_swap(spec, 1, interior);
            max_res = std::max(max_res, rep.residual);
        }
        out.push_back(residual_report("intertwining_swap_J1_generic", max_res, 1e-10));
    }
    // q-Hahn swap specialization at a pinned spec
    {
        Sequence s = Sequence::prefix({-0.6, -0.45, -0.5}, -0.4);
        auto spec = operators::ModelSpec::make_analytic(cfg.q > 0 ? cfg.q : 0.5, 1.4, s, s);
        auto rep1 = operators::verify_intertwining_swap(spec, 1, interior);
        auto rep2 = operators::verify_intertwining_swap(spec, 2, interior);
        out.push_back(residual_report("intertwining_swap_qhahn",
                                      std::max(rep1.residual, rep2.residual), 1e-10));
    }
    // shift intertwining for a J=1 model in the shift domain
    {
        auto spec = operators::ModelSpec::make(0.4, 1, Sequence::geometric(0.8, 0.8),
                                               Sequence::constant(-0.5));
        auto rep = operators::verify_intertwining_shift(spec, interior);
        out.push_back(residual_report("intertwining_shift_J1", rep.residual, 1e-10));
    }
    // geometric q-TASEP shift
    {
        auto rep = systems::verify_intertwining_geo(cfg.q > 0 ? cfg.q : 0.4,
                                                    Sequence::geometric(0.6, 0.8), interior);
        out.push_back(residual_report("intertwining_shift_geo_qtasep", rep.residual, 1e-10));
    }
    // Schur vertex model shift under the ratio condition
    {
        systems::SchurParams schur{0.3, Sequence::geometric(0.5, 0.9)};
        schur.require_shift_domain();
        auto rep = operators::verify_intertwining_shift(schur.model(), interior);
        out.push_back(residual_report("intertwining_shift_schur", rep.residual, 1e-10));
    }
    return out;
}

// ------------------------------------------------------------------ verify-lax

std::vector<TestReport> run_verify_lax(const ExperimentConfig& cfg) {
    std::vector<TestReport> out;
    for (double q : {0.0, cfg.q > 0 ? cfg.q : 0.5}) {
        auto rep12 = systems::verify_lax(q, 12, 0.2, 0.3);
        std::ostringstream nm;
        nm << "lax_semigroup_q" << q << "_K12";
        out.push_back(residual_report(nm.str(), rep12.semigroup_residual, 1e-6));
        std::ostringstream nm2;
        nm2 << "lax_equation_q" << q << "_K12";
        out.push_back(residual_report(nm2.str(), rep12.lax_residual, 1e-6));
        auto rep8 = systems::verify_lax(q, 8, 0.2, 0.3);
        auto rep14 = systems::verify_lax(q, 14, 0.2, 0.3);
        std::ostringstream nm3;
        nm3 << "lax_truncation_decay_q" << q;
        bool decays = rep14.lax_residual * 10.0 <= rep8.lax_residual &&
                      rep14.semigroup_residual * 10.0 <= rep8.semigroup_residual;
        TestReport rep;
        rep.name = nm3.str();
        rep.statistic = rep8.lax_residual / std::max(rep14.lax_residual, 1e-300);
        rep.level = 10.0;
        rep.pass = decays;
        rep.p_value = decays ? 1.0 : 0.0;
        out.push_back(rep);
    }
    return out;
}

// ------------------------------------------------------------------ simulate

std::vector<TestReport> run_simulate(const ExperimentConfig& cfg) {
    std::vector<TestReport> out;
    std::ofstream traj_out;
    if (!cfg.out_dir.empty() && cfg.emit_trajectories) {
        std::filesystem::create_directories(cfg.out_dir);
        traj_out.open(cfg.out_dir + "/trajectories.jsonl");
    }
    long long events = 0;
    for (long long rep = 0; rep < cfg.replicas; ++rep) {
        Rng stream = Rng::child(cfg.seed, static_cast<std::uint64_t>(rep));
        Trajectory traj;
        if (cfg.system == "ct-qtasep") {
            systems::ct_qtasep_simulate(stream, cfg.q, Sequence::geometric(cfg.alpha0, cfg.r),
                                        ParticleConfig{}, cfg.t_end, &traj);
        } else if (cfg.system == "backwards-qtasep") {
            ParticleConfig x0({3, 1, -1});
            systems::backwards_qtasep_simulate(stream, cfg.q, x0, cfg.t_end);
            continue;
        } else if (cfg.system == "qhahn") {
            ParticleConfig x;
            Sequence s = Sequence::constant(-0.5);
            for (int t = 0; t < static_cast<int>(cfg.t_end); ++t)
                x = systems::qhahn_step(stream, cfg.q, cfg.gamma, s, x);
            continue;
        } else if (cfg.system == "geo-qtasep") {
            ParticleConfig x;
            for (int t = 0; t < static_cast<int>(cfg.t_end); ++t)
                x = systems::geo_qtasep_step(stream, cfg.q, Sequence::geometric(0.6, cfg.r), x);
            continue;
        } else if (cfg.system == "schur") {
            systems::SchurParams p{cfg.nu, Sequence::geometric(0.5, 0.9)};
            PathConfig g;
            for (int t = 0; t < static_cast<int>(cfg.t_end); ++t) g = systems::schur_step(stream, p, g);
            continue;
        } else {
            throw ConfigError("simulate: unknown system " + cfg.system);
        }
        if (traj_out.is_open()) {
            for (int n = 1; n <= traj.particles(); ++n) {
                long long p = traj.initial(n);
                for (double t : traj.jumps_of(n)) {
                    traj_out << "{\"time\":" << t << ",\"particle\":" << n << ",\"from\":" << p
                             << ",\"to\":" << p + 1 << "}\n";
                    ++p;
                }
            }
        }
        events += traj.event_times().size();
    }
    TestReport rep;
    rep.name = "simulate_" + cfg.system;
    rep.statistic = static_cast<double>(events) / static_cast<double>(cfg.replicas);
    rep.pass = true;
    rep.p_value = 1.0;
    out.push_back(rep);
    return out;
}

// ------------------------------------------------------------------ couple-swap

namespace {

// Theorem-1.2 scenario: joint law of the back car at two times, FS versus
// randomized-start SF.
TestReport couple_swap_two_cars(const ExperimentConfig& cfg, long long gap0, double level) {
    const double t1 = 0.5, t2 = 1.5;
    Sequence fs = Sequence::prefix({cfg.alpha0, cfg.alpha1}, cfg.alpha1);
    Sequence sf = fs.swapped(0, 1);
    ParticleConfig x0({gap0 - 2, -2});  // x1 = x2 + gap0, x2 = -2
    std::uint64_t base = static_cast<std::uint64_t>(gap0) << 32;
    KeyedHistogram ha = for_replicas(cfg.replicas, cfg.workers, cfg.seed, base,
                                     [&](Rng& rng, KeyedHistogram& h) {
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, fs, x0, t2 + 1e-9, &traj);
        std::ostringstream key;
        key << traj.pos(2, t1) << "|" << traj.pos(2, t2);
        h.add(key.str());
    });
    KeyedHistogram hb = for_replicas(cfg.replicas, cfg.workers, cfg.seed, base + (1u << 24),
                                     [&](Rng& rng, KeyedHistogram& h) {
        ParticleConfig y0 = swap_particle_ct(rng, cfg.q, cfg.alpha1 / cfg.alpha0, 1, x0);
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, sf, y0, t2 + 1e-9, &traj);
        std::ostringstream key;
        key << traj.pos(2, t1) << "|" << traj.pos(2, t2);
        h.add(key.str());
    });
    auto [va, vb] = KeyedHistogram::align(ha, hb);
    TestReport rep = stats::chi_square_two_sample(va, vb, level);
    std::ostringstream nm;
    nm << "two_car_coupling_gap" << gap0;
    rep.name = nm.str();
    return rep;
}

// Propositions 9.2/9.3 scenario at q > 0: rewritten trajectory versus the
// swapped-parameter process, two-time joint configuration law.
std::pair<TestReport, TestReport> couple_swap_rewrite(const ExperimentConfig& cfg, double level) {
    const double M = cfg.t_end;
    const int n = cfg.swap_n;
    Sequence alpha = Sequence::geometric(cfg.alpha0, cfg.r);
    Sequence alpha_sw = alpha.swapped(n - 1, n);
    ParticleConfig x0({2, 0, -2});
    std::vector<double> times = {M / 2, M};
    yangbaxter::RatePair rates{alpha.at(n - 1), alpha.at(n)};
    const int upto = 5;
    KeyedHistogram down_a = for_replicas(cfg.replicas, cfg.workers, cfg.seed, 0,
                                         [&](Rng& rng, KeyedHistogram& h) {
        // down: rewrite the FS trajectory from a swapped terminal point
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, alpha, x0, M, &traj);
        ParticleConfig end = traj.config_right(M);
        ParticleConfig end_swapped =
            swap_particle_ct(rng, cfg.q, alpha.at(n) / alpha.at(n - 1), n, end);
        Trajectory rew = rewrite::rewrite_past_ct(rng, cfg.q, rates, n, traj, end_swapped.pos(n));
        h.add(config_key(rew, times, upto));
    });
    KeyedHistogram down_b = for_replicas(cfg.replicas, cfg.workers, cfg.seed, 1u << 24,
                                         [&](Rng& rng, KeyedHistogram& h) {
        ParticleConfig y0 = swap_particle_ct(rng, cfg.q, alpha.at(n) / alpha.at(n - 1), n, x0);
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, alpha_sw, y0, M, &traj);
        h.add(config_key(traj, times, upto));
    });
    KeyedHistogram up_a = for_replicas(cfg.replicas, cfg.workers, cfg.seed, 2u << 24,
                                       [&](Rng& rng, KeyedHistogram& h) {
        // up: rewrite the SF trajectory forward from the FS starting point
        ParticleConfig y0 = swap_particle_ct(rng, cfg.q, alpha.at(n) / alpha.at(n - 1), n, x0);
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, alpha_sw, y0, M, &traj);
        Trajectory rew = rewrite::rewrite_future_ct(rng, cfg.q, rates, n, traj, x0.pos(n));
        h.add(config_key(rew, times, upto));
    });
    KeyedHistogram up_b = for_replicas(cfg.replicas, cfg.workers, cfg.seed, 3u << 24,
                                       [&](Rng& rng, KeyedHistogram& h) {
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, alpha, x0, M, &traj);
        h.add(config_key(traj, times, upto));
    });
    auto [da, db] = KeyedHistogram::align(down_a, down_b);
    TestReport down = stats::chi_square_two_sample(da, db, level);
    down.name = "ct_rewrite_past";
    auto [ua, ub] = KeyedHistogram::align(up_a, up_b);
    TestReport up = stats::chi_square_two_sample(ua, ub, level);
    up.name = "ct_rewrite_future";
    return {down, up};
}

}  // namespace

std::vector<TestReport> run_couple_swap(const ExperimentConfig& cfg) {
    std::vector<TestReport> out;
    if (cfg.q == 0.0) {
        double level = cfg.significance / 2;  // Bonferroni over the two scenarios
        out.push_back(couple_swap_two_cars(cfg, 1, level));
        out.push_back(couple_swap_two_cars(cfg, 4, level));
    } else {
        double level = cfg.significance / 2;
        auto [down, up] = couple_swap_rewrite(cfg, level);
        out.push_back(down);
        out.push_back(up);
    }
    return out;
}

// ---------------------------------------------------------------- couple-slowdown

std::vector<TestReport> run_couple_slowdown(const ExperimentConfig& cfg) {
    const double M = cfg.t_end, tau = cfg.tau;
    const double shrink = std::exp(-tau);
    ParticleConfig x0({2, 0, -2});
    std::vector<double> times = {M / 2, M};
    const int upto = 6;
    KeyedHistogram ha = for_replicas(cfg.replicas, cfg.workers, cfg.seed, 0,
                                     [&](Rng& rng, KeyedHistogram& h) {
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, Sequence::constant(1.0), x0, M, &traj);
        Trajectory slowed = rewrite::slowdown_apply(rng, cfg.q, tau, std::move(traj));
        h.add(config_key(slowed, times, upto));
    });
    KeyedHistogram hb = for_replicas(cfg.replicas, cfg.workers, cfg.seed, 1u << 24,
                                     [&](Rng& rng, KeyedHistogram& h) {
        ParticleConfig y0 = systems::backwards_qtasep_simulate(rng, cfg.q, x0, tau);
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, Sequence::constant(1.0), y0, shrink * M + 1e-12,
                                    &traj);
        std::ostringstream key;
        for (double t : times) {
            key << "|";
            for (int n = 1; n <= upto; ++n) key << traj.pos(n, shrink * t) << ",";
        }
        h.add(key.str());
    });
    auto [va, vb] = KeyedHistogram::align(ha, hb);
    TestReport rep = stats::chi_square_two_sample(va, vb, cfg.significance);
    rep.name = "slowdown_vs_timechange";
    return {rep};
}

// ---------------------------------------------------------------- couple-speedup

std::vector<TestReport> run_couple_speedup(const ExperimentConfig& cfg) {
    const double M = cfg.t_end, tau = cfg.tau;
    const double stretch = std::exp(tau);
    std::vector<double> times = {M / 2, M};
    const int upto = 6;
    KeyedHistogram ha = for_replicas(cfg.replicas, cfg.workers, cfg.seed, 0,
                                     [&](Rng& rng, KeyedHistogram& h) {
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, Sequence::constant(1.0), ParticleConfig{}, M,
                                    &traj);
        Trajectory sped = rewrite::speedup_apply(rng, cfg.q, tau, std::move(traj));
        h.add(config_key(sped, times, upto));
    });
    KeyedHistogram hb = for_replicas(cfg.replicas, cfg.workers, cfg.seed, 1u << 24,
                                     [&](Rng& rng, KeyedHistogram& h) {
        Trajectory traj;
        systems::ct_qtasep_simulate(rng, cfg.q, Sequence::constant(1.0), ParticleConfig{},
                                    stretch * M + 1e-12, &traj);
        std::ostringstream key;
        for (double t : times) {
            key << "|";
            for (int n = 1; n <= upto; ++n) key << traj.pos(n, stretch * t) << ",";
        }
        h.add(key.str());
    });
    auto [va, vb] = KeyedHistogram::align(ha, hb);
    TestReport rep = stats::chi_square_two_sample(va, vb, cfg.significance);
    rep.name = "speedup_vs_timechange";
    return {rep};
}

// ---------------------------------------------------------------- poisson-coupling

std::vector<TestReport> run_poisson_coupling(const ExperimentConfig& cfg) {
    std::vector<TestReport> out;
    double level = cfg.significance / 3;  // three simultaneous distribution tests

    // 1) Theorem-1.3 walk: inter-jump times of the coupled fast walk
    {
        std::vector<double> gaps;
        long long target = cfg.replicas;
        Rng rng(cfg.seed, 0xfa57ULL);
        const double horizon = 60.0 / cfg.alpha0;
        const std::size_t keep = 30;  // first jumps only, to avoid censoring bias
        while (static_cast<long long>(gaps.size()) < target) {
            Trajectory slow(horizon, ParticleConfig{});
            slow.ensure(1);
            for (double t : rng.poisson_times(cfg.alpha1, horizon)) slow.add_jump(1, t);
            Trajectory fast =
                rewrite::rewrite_future_ct(rng, 0.0, {cfg.alpha0, cfg.alpha1}, 1, slow, -1);
            double prev = 0.0;
            const auto& js = fast.jumps_of(1);
            for (std::size_t k = 0; k < js.size() && k < keep; ++k) {
                gaps.push_back(js[k] - prev);
                prev = js[k];
            }
        }
        gaps.resize(target);
        TestReport rep = stats::ks_exponential(std::move(gaps), cfg.alpha0, level);
        rep.name = "coupled_fast_walk_interjump";
        out.push_back(rep);
    }
    // 2) growth process at tau_hat = 1: Poisson(2h) counts
    {
        const double h = 1.0;
        std::vector<double> counts;
        Rng rng(cfg.seed, 0x960ULL);
        for (long long i = 0; i < cfg.replicas; ++i) {
            auto start = rng.poisson_times(1.0, h);
            auto grown = rewrite::poisson_grow(rng, 1.0, std::move(start), h);
            std::size_t k = grown.size();
            if (counts.size() <= k) counts.resize(k + 1, 0.0);
            counts[k] += 1;
        }
        std::vector<double> probs(counts.size());
        double lam = 2.0 * h;
        for (std::size_t k = 0; k < probs.size(); ++k)
            probs[k] = std::exp(-lam + k * std::log(lam) - std::lgamma(k + 1.0));
        TestReport rep =
            stats::chi_square_goodness(counts, probs, static_cast<double>(cfg.replicas), level);
        rep.name = "growth_poisson_counts";
        out.push_back(rep);
    }
    // 3) dilation chain: Poisson(1) count preservation and no-op frequency
    {
        std::vector<double> counts;
        long long noop = 0;
        Rng rng(cfg.seed, 0xd11aULL);
        long long n = cfg.replicas;
        for (long long i = 0; i < n; ++i) {
            auto start = rng.poisson_times(1.0, 1.0);
            auto step = rewrite::poisson_dilation_step(rng, start);
            noop += step.noop ? 1 : 0;
            std::size_t k = step.jumps.size();
            if (counts.size() <= k) counts.resize(k + 1, 0.0);
            counts[k] += 1;
        }
        std::vector<double> probs(counts.size());
        for (std::size_t k = 0; k < probs.size(); ++k)
            probs[k] = std::exp(-1.0 - std::lgamma(k + 1.0));
        TestReport rep = stats::chi_square_goodness(counts, probs, static_cast<double>(n), level);
        rep.name = "dilation_poisson_invariance";
        out.push_back(rep);

        double p = dilation_noop_probability();
        double freq = static_cast<double>(noop) / static_cast<double>(n);
        double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
        TestReport noop_rep;
        noop_rep.name = "dilation_noop_frequency";
        noop_rep.statistic = (freq - p) / sigma;
        noop_rep.level = 3.0;
        noop_rep.pass = std::abs(noop_rep.statistic) <= 3.0;
        noop_rep.p_value = noop_rep.pass ? 1.0 : 0.0;
        out.push_back(noop_rep);
    }
    return out;
}

// ------------------------------------------------------------------ dispatch + IO

void write_outputs(const ExperimentConfig& cfg, const std::vector<TestReport>& reports) {
    if (cfg.out_dir.empty()) return;
    std::filesystem::create_directories(cfg.out_dir);
    nlohmann::json j;
    j["config"] = {{"kind", cfg.kind},           {"system", cfg.system},
                   {"q", cfg.q},                 {"gamma", cfg.gamma},
                   {"nu", cfg.nu},               {"r", cfg.r},
                   {"alpha0", cfg.alpha0},       {"alpha1", cfg.alpha1},
                   {"tau", cfg.tau},             {"t_end", cfg.t_end},
                   {"swap_n", cfg.swap_n},       {"max_entries", cfg.max_entries},
                   {"draws", cfg.draws},         {"J_list", cfg.J_list},
                   {"replicas", cfg.replicas},   {"seed", cfg.seed},
                   {"significance", cfg.significance}};
    j["reports"] = nlohmann::json::array();
    for (const auto& r : reports)
        j["reports"].push_back({{"name", r.name},
                                {"statistic", r.statistic},
                                {"dof", r.dof},
                                {"p_value", r.p_value},
                                {"level", r.level},
                                {"pass", r.pass}});
    std::ofstream(cfg.out_dir + "/report.json") << j.dump(2) << "\n";
    std::ofstream csv(cfg.out_dir + "/summary.csv");
    csv << "name,statistic,dof,p_value,level,pass\n";
    csv.precision(17);
    for (const auto& r : reports)
        csv << r.name << "," << r.statistic << "," << r.dof << "," << r.p_value << "," << r.level
            << "," << (r.pass ? 1 : 0) << "\n";
}

RunResult run(const ExperimentConfig& cfg) {
    cfg.validate();
    RunResult result;
    if (cfg.kind == "verify-ybe")
        result.reports = run_verify_ybe(cfg);
    else if (cfg.kind == "verify-intertwining")
        result.reports = run_verify_intertwining(cfg);
    else if (cfg.kind == "verify-lax")
        result.reports = run_verify_lax(cfg);
    else if (cfg.kind == "simulate")
        result.reports = run_simulate(cfg);
    else if (cfg.kind == "couple-swap")
        result.reports = run_couple_swap(cfg);
    else if (cfg.kind == "couple-slowdown")
        result.reports = run_couple_slowdown(cfg);
    else if (cfg.kind == "couple-speedup")
        result.reports = run_couple_speedup(cfg);
    else if (cfg.kind == "poisson-coupling")
        result.reports = run_poisson_coupling(cfg);
    for (const auto& r : result.reports) result.all_pass = result.all_pass && r.pass;
    write_outputs(cfg, result.reports);
    return result;
}

}  // namespace ips::harness
