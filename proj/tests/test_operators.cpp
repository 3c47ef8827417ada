#include <doctest.h>

#include <cmath>
#include <map>

#include "ips/operators.hpp"
#include "ips/rng.hpp"
#include "ips/stats.hpp"
#include "ips/weights.hpp"

using namespace ips::operators;
using ips::Rng;
using ips::weights::VertexParams;

TEST_CASE("gap-particle transformation") {
    // step configuration maps to the empty occupancy configuration
    CHECK(gap_particle(ParticleConfig{}).support() == 0);
    // x = (3, -2, -3, ...) -> g = (4, 0, 0, ...)
    ParticleConfig x({3});
    PathConfig g = gap_particle(x);
    CHECK(g.site(1) == 4);
    CHECK(g.support() == 1);
    CHECK(particle_gap(g) == x);
    // round trip on random configurations
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> occ(1 + rng.uniform_int(5));
        for (auto& v : occ) v = static_cast<int>(rng.uniform_int(5));
        PathConfig cfg(occ);
        CHECK(gap_particle(particle_gap(cfg)) == cfg);
    }
}

namespace {

ModelSpec generic_spec() {
    return ModelSpec::make(0.4, 1, Sequence::prefix({0.8, 0.4, 0.5}, 0.45),
                           Sequence::prefix({-0.5, -0.45, -0.5}, -0.4));
}

ModelSpec qhahn_spec() {
    Sequence s = Sequence::prefix({-0.6, -0.5, -0.42}, -0.4);
    return ModelSpec::make_analytic(0.5, 1.4, s, s);
}

ModelSpec spin2_spec() {
    return ModelSpec::make(0.3, 2, Sequence::constant(0.6), Sequence::constant(-0.45));
}

}  // namespace

TEST_CASE("transfer matrix rows are stochastic with explicit leak") {
    Enumeration states = Enumeration::displacement_window(3, 7);
    for (const ModelSpec& spec : {generic_spec(), qhahn_spec(), spin2_spec()}) {
        TruncatedOperator T = transfer_matrix(spec, states);
        for (int i = 0; i < states.size(); ++i) {
            double total = T.row_sum(i) + T.leak[i];
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            for (auto& [j, v] : T.rows[i]) CHECK(v >= -1e-14);
        }
    }
}

TEST_CASE("transfer entries against hand-multiplied spin-1 products") {
    ModelSpec spec = generic_spec();
    VertexParams p0 = spec.site_params(0), p1 = spec.site_params(1), p2 = spec.site_params(2);
    PathConfig g({1});
    double b0 = ips::weights::l_boundary_weight(p0, 0);
    double b1 = ips::weights::l_boundary_weight(p0, 1);
    // stay put: no inflow, no move
    CHECK(transfer_weight(spec, g, PathConfig({1})) ==
          doctest::Approx(b0 * ips::weights::l1_weight(p1, 1, 0, 1, 0)).epsilon(1e-13));
    // inflow joins the stack
    CHECK(transfer_weight(spec, g, PathConfig({2})) ==
          doctest::Approx(b1 * ips::weights::l1_weight(p1, 1, 1, 2, 0)).epsilon(1e-13));
    // the stack's path hops one site right
    CHECK(transfer_weight(spec, g, PathConfig({0, 1})) ==
          doctest::Approx(b0 * ips::weights::l1_weight(p1, 1, 0, 0, 1) *
                          ips::weights::l1_weight(p2, 0, 1, 1, 0))
              .epsilon(1e-13));
    CHECK(transfer_weight(spec, g, PathConfig({0})) == 0.0);  // mass cannot vanish
}

TEST_CASE("transfer sampler matches its exact matrix row") {
    Enumeration window = Enumeration::displacement_window(4, 18);
    int pinned = 0;
    for (const ModelSpec& spec : {generic_spec(), qhahn_spec(), spin2_spec()}) {
        ++pinned;
        SparseRow row = transfer_row(spec, PathConfig({2, 1}), window);
        std::map<std::string, int> index;
        std::vector<double> probs;
        for (auto& [cfg, w] : row.entries) {
            index[cfg.str()] = static_cast<int>(probs.size());
            probs.push_back(w);
        }
        std::vector<double> counts(probs.size(), 0.0);
        Rng rng(100 + pinned);
        const long long n = 100000;
        for (long long i = 0; i < n; ++i) {
            PathConfig out = transfer_sample(rng, spec, PathConfig({2, 1}));
            auto it = index.find(out.str());
            if (it == index.end()) continue;  // falls into the leak cell
            counts[it->second] += 1.0;
        }
        auto rep = ips::stats::chi_square_goodness(counts, probs, n);
        CHECK(rep.p_value > 0.001);
    }
}

TEST_CASE("exclusion order is preserved by the particle-side transfer") {
    ModelSpec spec = qhahn_spec();
    Rng rng(17);
    ParticleConfig x({4, 1, -1});
    for (int t = 0; t < 200; ++t) {
        PathConfig g = gap_particle(x);
        x = particle_gap(transfer_sample(rng, spec, g));
        for (int m = 1; m <= x.stored(); ++m) REQUIRE(x.pos(m) > x.pos(m + 1));
    }
}

TEST_CASE("q-Hahn swap moves the spotlighted site down and fixes the step") {
    ModelSpec spec = qhahn_spec();
    Rng rng(19);
    // row-stochastic and supported on smaller occupancies
    SparseRow row = swap_row(spec, 2, PathConfig({3, 2}));
    double sum = row.tail;
    for (auto& [cfg, w] : row.entries) {
        CHECK(cfg.site(2) <= 2);
        CHECK(cfg.site(1) + cfg.site(2) == 5);
        sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // boundary swap at n = 1 only lowers g_1
    SparseRow brow = swap_row(spec, 1, PathConfig({3}));
    for (auto& [cfg, w] : brow.entries) CHECK(cfg.site(1) <= 3);
    // the empty configuration is fixed
    CHECK(swap_sample(rng, spec, 1, PathConfig{}) == PathConfig{});
    CHECK(swap_weight(spec, 1, PathConfig{}, PathConfig{}) == doctest::Approx(1.0));
}

TEST_CASE("equal vertical parameters make the swap the identity") {
    Sequence s = Sequence::constant(-0.5);
    ModelSpec spec = ModelSpec::make_analytic(0.4, 1.3, s, s);
    for (const PathConfig& g : {PathConfig({2, 1}), PathConfig({0, 3}), PathConfig({5})})
        CHECK(swap_weight(spec, 2, g, g) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shift operator: product formula matches the sequential matrix product") {
    ModelSpec spec = ModelSpec::make(0.4, 1, Sequence::geometric(0.8, 0.75),
                                     Sequence::constant(-0.5));
    spec.require_shift_domain();
    Enumeration states = Enumeration::displacement_window(3, 6);
    TruncatedOperator B = shift_matrix(spec, states);
    // sequential product of swap matrices over a wider window
    Enumeration wide = Enumeration::displacement_window(4, 8);
    std::vector<std::vector<double>> prod(wide.size(), std::vector<double>(wide.size(), 0.0));
    for (int i = 0; i < wide.size(); ++i) prod[i][i] = 1.0;
    for (int m = 1; m <= 5; ++m) {
        TruncatedOperator P = swap_matrix(spec, m, wide);
        std::vector<std::vector<double>> next(wide.size(), std::vector<double>(wide.size(), 0.0));
        for (int i = 0; i < wide.size(); ++i)
            for (int k = 0; k < wide.size(); ++k) {
                if (prod[i][k] == 0.0) continue;
                for (auto& [j, v] : P.rows[k]) next[i][j] += prod[i][k] * v;
            }
        prod = std::move(next);
    }
    for (int i = 0; i < states.size(); ++i) {
        int wi = wide.idx(states.states[i]);
        for (int j = 0; j < states.size(); ++j) {
            int wj = wide.idx(states.states[j]);
            CHECK(B.entry(i, j) == doctest::Approx(prod[wi][wj]).epsilon(1e-10));
        }
    }
}

TEST_CASE("shift sampler matches the exact shift row") {
    ModelSpec spec = ModelSpec::make(0.4, 1, Sequence::geometric(0.8, 0.75),
                                     Sequence::constant(-0.5));
    PathConfig g({2, 1});
    SparseRow row = shift_row(spec, g);
    std::map<std::string, int> index;
    std::vector<double> probs;
    for (auto& [cfg, w] : row.entries) {
        index[cfg.str()] = static_cast<int>(probs.size());
        probs.push_back(w);
    }
    Rng rng(23);
    std::vector<double> counts(probs.size(), 0.0);
    const long long n = 100000;
    for (long long i = 0; i < n; ++i) {
        PathConfig out = shift_sample(rng, spec, g);
        auto it = index.find(out.str());
        REQUIRE(it != index.end());
        counts[it->second] += 1.0;
    }
    auto rep = ips::stats::chi_square_goodness(counts, probs, n);
    CHECK(rep.p_value > 0.001);
}

TEST_CASE("intertwining of transfer and swap operators, exactly") {
    std::vector<PathConfig> interior;
    for (auto& g : Enumeration::displacement_window(2, 6).states) interior.push_back(g);
    Rng rng(29);
    for (int trial = 0; trial < 12; ++trial) {
        double q = 0.2 + 0.6 * rng.uniform();
        double s0 = -0.6 + 0.2 * rng.uniform();
        double s1 = -0.6 + 0.2 * rng.uniform();
        double z = std::min({s0 / s1, s1 / s0, q / (s0 * s1)}) * (0.2 + 0.7 * rng.uniform());
        double u0 = 0.4 + 0.4 * rng.uniform();
        auto spec = ModelSpec::make(q, 1, Sequence::prefix({u0, z * u0}, 0.3),
                                    Sequence::prefix({s0, s1}, -0.4));
        auto rep = verify_intertwining_swap(spec, 1, interior);
        CHECK(rep.residual < 1e-10);
    }
    // q-Hahn specialization, generalized initial data
    auto repq = verify_intertwining_swap(qhahn_spec(), 1, interior);
    CHECK(repq.residual < 1e-10);
    auto repq2 = verify_intertwining_swap(qhahn_spec(), 2, interior);
    CHECK(repq2.residual < 1e-10);
    // spin 2
    auto spec2 = ModelSpec::make(0.3, 2, Sequence::prefix({0.6, 0.3}, 0.4),
                                 Sequence::constant(-0.45));
    auto rep2 = verify_intertwining_swap(spec2, 1, interior);
    CHECK(rep2.residual < 1e-10);
}

TEST_CASE("intertwining of transfer and shift operators, exactly") {
    std::vector<PathConfig> interior;
    for (auto& g : Enumeration::displacement_window(2, 5).states) interior.push_back(g);
    auto spec = ModelSpec::make(0.4, 1, Sequence::geometric(0.8, 0.75), Sequence::constant(-0.5));
    auto rep = verify_intertwining_shift(spec, interior);
    CHECK(rep.residual < 1e-10);
}

namespace {

BetaSpec beta_spec() {
    return BetaSpec{0.4, 0.8, Sequence::prefix({-0.7, -0.55, -0.45}, -0.4)};
}

}  // namespace

TEST_CASE("detailed balance of the bijectivised swap couplings") {
    BetaSpec bspec = beta_spec();
    ModelSpec model = bspec.model();
    std::vector<PathConfig> space;
    for (int g1 = 0; g1 <= 5; ++g1)
        for (int g2 = 0; g2 <= 5; ++g2) space.push_back(PathConfig({g1, g2}));
    Enumeration window = Enumeration::displacement_window(3, 14);
    for (int n : {1, 2}) {
        ModelSpec model_sigma = model.sigma(n);
        double worst = 0;
        for (const PathConfig& g : space) {
            SparseRow rowT = transfer_row(model, g, window);
            for (auto& [gp, wT] : rowT.entries) {
                if (wT < 1e-14) continue;
                SparseRow rowP = swap_row(model, n, gp);
                for (auto& [dp, wP] : rowP.entries) {
                    if (wP < 1e-14) continue;
                    // enumerate candidate d on the conserving fiber through g
                    int pair_sum = g.site(std::max(1, n - 1)) + g.site(n);
                    for (int dn = 0; dn <= pair_sum + 2; ++dn) {
                        PathConfig d = g;
                        if (n >= 2) {
                            int dnm1 = pair_sum - dn;
                            if (dnm1 < 0) continue;
                            d.set_site(n - 1, dnm1);
                        }
                        d.set_site(n, dn);
                        double lhs =
                            wT * wP * down_step_prob(bspec, n, g, gp, dp, d);
                        double rhs = swap_weight(model, n, g, d) *
                                     transfer_weight(model_sigma, d, dp) *
                                     up_step_prob(bspec, n, g, d, dp, gp);
                        worst = std::max(worst, std::abs(lhs - rhs));
                    }
                }
            }
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("bijectivised steps are stochastic and deterministic when forced") {
    BetaSpec bspec = beta_spec();
    ModelSpec model = bspec.model();
    PathConfig g({3, 2});
    SparseRow rowT = transfer_row(model, g, Enumeration::displacement_window(3, 12));
    Rng rng(31);
    for (auto& [gp, wT] : rowT.entries) {
        if (wT < 1e-12) continue;
        SparseRow rowP = swap_row(model, 2, gp);
        for (auto& [dp, wP] : rowP.entries) {
            if (wP < 1e-12) continue;
            double total = 0;
            for (int dn = 0; dn <= 5; ++dn) {
                PathConfig d = g;
                d.set_site(1, 5 - dn);
                d.set_site(2, dn);
                total += down_step_prob(bspec, 2, g, gp, dp, d);
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // blocking: c = 0 and no incoming path forces the stay outcome
    PathConfig gp = g, dp = g;
    // build a swapped target with c = d'_n = 0
    dp.set_site(1, 5);
    dp.set_site(2, 0);
    PathConfig d = down_step(rng, bspec, 2, g, gp, dp);
    CHECK(d.site(2) == 0);
}

TEST_CASE("detailed balance of the bullet couplings for the shift") {
    BetaSpec bspec{0.4, 0.8, Sequence::geometric(-0.6, 0.85)};
    ModelSpec model = bspec.model();
    model.require_shift_domain();
    ModelSpec model_sh = model.shifted();
    std::vector<PathConfig> space;
    for (int g1 = 0; g1 <= 3; ++g1)
        for (int g2 = 0; g2 <= 3; ++g2) space.push_back(PathConfig({g1, g2}));
    Enumeration window = Enumeration::displacement_window(3, 10);
    double worst = 0;
    for (const PathConfig& g : space) {
        SparseRow rowT = transfer_row(model, g, window);
        for (auto& [gp, wT] : rowT.entries) {
            if (wT < 1e-10) continue;
            SparseRow rowB = shift_row(model, gp);
            for (auto& [dp, wB] : rowB.entries) {
                if (wB < 1e-10) continue;
                SparseRow rowBg = shift_row(model, g);
                for (auto& [d, wBg] : rowBg.entries) {
                    double lhs = wT * wB * down_bullet_prob(bspec, g, gp, dp, d);
                    double rhs = wBg * transfer_weight(model_sh, d, dp) *
                                 up_bullet_prob(bspec, g, d, dp, gp);
                    worst = std::max(worst, std::abs(lhs - rhs));
                }
            }
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("bullet couplings stabilize and fix step endpoints") {
    BetaSpec bspec{0.4, 0.8, Sequence::geometric(-0.6, 0.85)};
    Rng rng(37);
    PathConfig empty;
    CHECK(down_bullet(rng, bspec, empty, empty, empty) == empty);
    CHECK(up_bullet(rng, bspec, empty, empty, empty) == empty);
    CHECK(down_bullet_prob(bspec, empty, empty, empty, empty) == doctest::Approx(1.0));
}

TEST_CASE("bullet sampler frequencies match the exact bullet law") {
    BetaSpec bspec{0.4, 0.8, Sequence::geometric(-0.6, 0.85)};
    ModelSpec model = bspec.model();
    PathConfig g({2, 1});
    Rng rng(43);
    // fix a (g', d') pair with positive probability
    PathConfig gp = transfer_sample(rng, model, g);
    PathConfig dp = shift_sample(rng, model, gp);
    std::map<std::string, double> law;
    SparseRow rowBg = shift_row(model, g);
    for (auto& [d, w] : rowBg.entries) {
        double p = down_bullet_prob(bspec, g, gp, dp, d);
        if (p > 1e-12) law[d.str()] = p;
    }
    std::map<std::string, double> counts;
    const long long n = 50000;
    for (long long i = 0; i < n; ++i)
        counts[down_bullet(rng, bspec, g, gp, dp).str()] += 1.0;
    std::vector<double> cvec, pvec;
    for (auto& [key, p] : law) {
        pvec.push_back(p);
        cvec.push_back(counts.count(key) ? counts[key] : 0.0);
    }
    auto rep = ips::stats::chi_square_goodness(cvec, pvec, n);
    CHECK(rep.p_value > 0.001);
}
