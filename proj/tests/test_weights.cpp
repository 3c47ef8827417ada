#include <doctest.h>

#include <cmath>

#include "ips/qkernel.hpp"
#include "ips/rng.hpp"
#include "ips/weights.hpp"

using namespace ips::weights;
using ips::Rng;
using ips::qkernel::kInfinity;
using ips::qkernel::PhiParams;
using ips::qkernel::phi_weight;

TEST_CASE("spin-1 table: pinned entries") {
    VertexParams p = VertexParams::integer_spin(0.3, 0.5, -0.4, 1);
    double su = -0.2;
    CHECK(l1_weight(p, 2, 0, 2, 0) ==
          doctest::Approx((1 - 0.09 * su) / (1 - su)).epsilon(1e-14));
    CHECK(l1_weight(p, 0, 0, 0, 0) == doctest::Approx(1.0));
    CHECK(l1_weight(p, 2, 1, 1, 1) == 0.0);  // conservation 2+1 != 1+1
}

TEST_CASE("fused weight at J = 1 reproduces the rational table") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        double q = 0.85 * rng.uniform();
        double u = 1.5 * rng.uniform();
        double s = -0.9 * rng.uniform();
        VertexParams table = VertexParams::integer_spin(q, u, s, 1);
        VertexParams series{q, u, s, q, 0};  // force the series route
        for (int i1 = 0; i1 <= 8; ++i1)
            for (int j1 = 0; j1 <= 1; ++j1)
                for (int j2 = 0; j2 <= 1; ++j2) {
                    int i2 = i1 + j1 - j2;
                    if (i2 < 0 || i2 > 8) continue;
                    double a = l1_weight(table, i1, j1, i2, j2);
                    double b = (q > 0) ? lj_weight(series, i1, j1, i2, j2)
                                       : fused_weight(q, u, s, 1, i1, j1, i2, j2);
                    CHECK(a == doctest::Approx(b).epsilon(1e-10));
                }
    }
}

TEST_CASE("u = s reduction is the q-beta-binomial row") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        double q = 0.8 * rng.uniform() + 0.05;
        double s = -0.8 * rng.uniform() - 0.05;
        double qJ = std::pow(q, 1 + static_cast<int>(rng.uniform_int(3)));
        VertexParams p = VertexParams::analytic(q, s, s, qJ);
        for (int i1 = 0; i1 <= 6; ++i1)
            for (int j1 = 0; j1 <= 3; ++j1)
                for (int j2 = 0; j2 <= i1 + j1; ++j2) {
                    int i2 = i1 + j1 - j2;
                    double got = lj_weight(p, i1, j1, i2, j2);
                    double expect = (j2 <= i1)
                                        ? phi_weight(PhiParams{q, qJ * s * s, s * s}, j2, i1)
                                        : 0.0;
                    CHECK(got == doctest::Approx(expect).epsilon(1e-11));
                }
    }
}

TEST_CASE("fusion oracle agrees with the closed fused form for J = 2, 3") {
    Rng rng(7);
    for (int J : {2, 3}) {
        for (int trial = 0; trial < 8; ++trial) {
            double q = 0.1 + 0.7 * rng.uniform();
            double u = 0.2 + 1.0 * rng.uniform();
            double s = -0.7 * rng.uniform() - 0.1;
            VertexParams p = VertexParams::integer_spin(q, u, s, J);
            for (int i1 = 0; i1 <= 5; ++i1)
                for (int j1 = 0; j1 <= J; ++j1)
                    for (int j2 = 0; j2 <= J; ++j2) {
                        int i2 = i1 + j1 - j2;
                        if (i2 < 0) continue;
                        double closed = lj_weight(p, i1, j1, i2, j2);
                        double fused = fused_weight(q, u, s, J, i1, j1, i2, j2);
                        CHECK(closed == doctest::Approx(fused).epsilon(1e-10));
                    }
        }
    }
}

TEST_CASE("stochasticity of the fused weights") {
    Rng rng(9);
    for (int J : {1, 2, 3}) {
        for (int trial = 0; trial < 6; ++trial) {
            double q = 0.85 * rng.uniform();
            double u = 1.4 * rng.uniform();
            double s = -0.85 * rng.uniform();
            VertexParams p = VertexParams::integer_spin(q, u, s, J);
            for (int i1 = 0; i1 <= 6; ++i1)
                for (int j1 = 0; j1 <= J; ++j1) {
                    double sum = 0;
                    for (int j2 = 0; j2 <= std::min(J, i1 + j1); ++j2) {
                        double w = lj_weight(p, i1, j1, i1 + j1 - j2, j2);
                        CHECK(w >= -1e-12);
                        CHECK(w <= 1.0 + 1e-12);
                        sum += w;
                    }
                    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
                }
        }
    }
}

TEST_CASE("boundary weight: pinned value, normalization, large-occupancy limit") {
    VertexParams p = VertexParams::integer_spin(0.3, 0.5, -0.4, 1);
    // j2 = 0 entry equals (mu;q)_inf/(nu;q)_inf with mu = s u q^J, nu = s u
    double nu = -0.2, mu = -0.2 * 0.3;
    CHECK(l_boundary_weight(p, 0) ==
          doctest::Approx(ips::qkernel::q_pochhammer_inf(mu, 0.3) /
                          ips::qkernel::q_pochhammer_inf(nu, 0.3))
              .epsilon(1e-12));
    double sum = 0;
    for (int j = 0; j <= 40; ++j) sum += l_boundary_weight(p, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    // finite-occupancy weights converge to the boundary weight
    for (int j2 = 0; j2 <= 1; ++j2) {
        int i = 60;
        double fin = lj_weight(p, i, 1, i + 1 - j2, j2);
        CHECK(fin == doctest::Approx(l_boundary_weight(p, j2)).epsilon(1e-8));
    }
}

TEST_CASE("regime classification") {
    CHECK(validate_regime(0.5, 0.9, -0.5, -0.5) == CrossRegime::GenericQ);
    CHECK(validate_regime(0.0, 0.5, -0.6, -0.5) == CrossRegime::QZero);
    CHECK(validate_regime(0.3, -0.5 / -0.6, -0.6, -0.5) == CrossRegime::QHahn);
    CHECK(validate_regime(0.0, 0.9, -0.9, -0.8) == CrossRegime::Unchecked);
}

TEST_CASE("cross weights: q-Hahn reduction and generic-series agreement") {
    Rng rng(11);
    for (int trial = 0; trial < 15; ++trial) {
        double q = 0.1 + 0.8 * rng.uniform();
        double s1 = -0.8 * rng.uniform() - 0.1;
        double s2 = s1 * (0.3 + 0.7 * rng.uniform());
        double z = s2 / s1;
        CrossParams hahn = CrossParams::make(q, z, s1, s2);
        REQUIRE(hahn.regime == CrossRegime::QHahn);
        CrossParams generic{q, z, s1, s2, CrossRegime::Unchecked};  // series route
        for (int i2 = 0; i2 <= 5; ++i2)
            for (int j1 = 0; j1 <= 5; ++j1)
                for (int j2 = 0; j2 <= i2 + j1; ++j2) {
                    int i1 = i2 + j1 - j2;
                    double a = r_weight(hahn, i1, i2, j1, j2);
                    double b = r_weight(generic, i1, i2, j1, j2);
                    CHECK(a == doctest::Approx(b).epsilon(1e-9));
                    double expect =
                        (j2 <= j1)
                            ? phi_weight(PhiParams{q, s2 * s2 / (s1 * s1), s2 * s2}, j2, j1)
                            : 0.0;
                    CHECK(a == doctest::Approx(expect).epsilon(1e-11));
                }
    }
}

TEST_CASE("cross weights: stochasticity and nonnegativity in every regime") {
    Rng rng(13);
    for (int regime = 0; regime < 3; ++regime) {
        for (int trial = 0; trial < 12; ++trial) {
            double q, s1, s2, z;
            if (regime == 0) {
                q = 0.05 + 0.9 * rng.uniform();
                s1 = -0.9 + 0.8 * rng.uniform();
                s2 = -0.9 + 0.8 * rng.uniform();
                z = std::min({s1 / s2, s2 / s1, q / (s1 * s2)}) * rng.uniform();
            } else if (regime == 1) {
                q = 0.0;
                do {
                    s1 = -0.9 + 0.8 * rng.uniform();
                    s2 = -0.9 + 0.8 * rng.uniform();
                    z = std::min(s1 / s2, s2 / s1) * rng.uniform();
                } while (s1 * s1 + s2 * s2 > 1.0 + z * s1 * s2);
            } else {
                q = 0.9 * rng.uniform();
                s1 = -0.9 + 0.8 * rng.uniform();
                s2 = s1 * rng.uniform();
                z = s2 / s1;
            }
            CrossParams p = CrossParams::make(q, z, s1, s2);
            REQUIRE(p.regime != CrossRegime::Unchecked);
            for (int i2 = 0; i2 <= 6; ++i2)
                for (int j1 = 0; j1 <= 6; ++j1) {
                    double sum = 0;
                    for (int j2 = 0; j2 <= i2 + j1; ++j2) {
                        double w = r_weight(p, i2 + j1 - j2, i2, j1, j2);
                        CHECK(w >= -1e-12);
                        sum += w;
                    }
                    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
                }
            for (int j1 = 0; j1 <= 6; ++j1) {
                double sum = 0;
                for (int j2 = 0; j2 <= 400; ++j2) {
                    double w = r_bdry_weight(p, j1, j2);
                    CHECK(w >= -1e-12);
                    sum += w;
                    if (j2 > j1 && w < 1e-14 && 1.0 - sum < 1e-12) break;
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("cross weight symmetry under swapping the spectral roles") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        double q = 0.1 + 0.8 * rng.uniform();
        double s1 = -0.8 + 0.6 * rng.uniform();
        double s2 = -0.8 + 0.6 * rng.uniform();
        double z = 0.05 + 0.6 * rng.uniform();
        CrossParams a{q, z, s1, s2, CrossRegime::Unchecked};
        CrossParams b{q, z, s2, s1, CrossRegime::Unchecked};
        int i2 = static_cast<int>(rng.uniform_int(5));
        int j1 = static_cast<int>(rng.uniform_int(5));
        int j2 = static_cast<int>(rng.uniform_int(i2 + j1 + 1));
        int i1 = i2 + j1 - j2;
        double lhs = r_weight(a, i1, i2, j1, j2);
        double pref = std::pow(z, j2 - i2) * std::pow(s2, i2 + j2) / std::pow(s1, i1 + j1);
        double rhs = pref * r_weight(b, j2, j1, i2, i1);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("q -> 0 continuity of the cross weights") {
    double s1 = -0.6, s2 = -0.5, z = 0.5;
    CrossParams small{1e-6, z, s1, s2, CrossRegime::Unchecked};
    CrossParams zero = CrossParams::make(0.0, z, s1, s2);
    REQUIRE(zero.regime == CrossRegime::QZero);
    for (int i2 = 0; i2 <= 8; ++i2)
        for (int j1 = 0; j1 <= 8; ++j1)
            for (int j2 = 0; j2 <= i2 + j1; ++j2) {
                double a = r_weight(small, i2 + j1 - j2, i2, j1, j2);
                double b = r_weight(zero, i2 + j1 - j2, i2, j1, j2);
                CHECK(a == doctest::Approx(b).epsilon(1e-4));
            }
    for (int j1 = 0; j1 <= 6; ++j1)
        for (int j2 = 0; j2 <= 10; ++j2) {
            double a = r_bdry_weight(small, j1, j2);
            double b = r_bdry_weight(zero, j1, j2);
            CHECK(a == doctest::Approx(b).epsilon(1e-4));
        }
}

TEST_CASE("boundary cross weight is the large-occupancy limit") {
    double q = 0.4, s1 = -0.6, s2 = -0.45;
    double z = std::min({s1 / s2, s2 / s1, q / (s1 * s2)}) * 0.8;
    CrossParams p = CrossParams::make(q, z, s1, s2);
    for (int j1 = 0; j1 <= 4; ++j1)
        for (int j2 = 0; j2 <= 4; ++j2) {
            int L = 60;
            double fin = r_weight(p, L, L + j2 - j1, j1, j2);
            CHECK(fin == doctest::Approx(r_bdry_weight(p, j1, j2)).epsilon(1e-8));
        }
}

TEST_CASE("equal-s boundary cross weight at q = 0 takes the product form") {
    double nu = 0.36, root = std::sqrt(nu);
    for (double z : {0.3, 0.8, 1.0}) {
        CrossParams p{0.0, z, -root, -root, CrossRegime::QZero};
        for (int j = 0; j <= 8; ++j) {
            double expect =
                std::pow(nu, j) * (1 - nu) * (1 - (j > 0 ? z : 0.0)) / (1 - nu * z);
            CHECK(r_bdry_weight(p, 0, j) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}
