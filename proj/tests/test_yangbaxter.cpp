#include <doctest.h>

#include <cmath>

#include "ips/qkernel.hpp"
#include "ips/rng.hpp"
#include "ips/yangbaxter.hpp"

using namespace ips::yangbaxter;
using ips::Rng;
using ips::weights::CrossParams;
using ips::weights::CrossRegime;
using ips::weights::VertexParams;

namespace {

struct Draw {
    VertexParams v1, v2;
    CrossParams cross;
};

Draw random_draw(Rng& rng, int J, int regime) {
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
        s2 = s1 * (0.2 + 0.8 * rng.uniform());
        z = s2 / s1;
    }
    double u1 = 0.1 + 1.5 * rng.uniform();
    return {VertexParams::integer_spin(q, u1, s1, J),
            VertexParams::integer_spin(q, z * u1, s2, J), CrossParams::make(q, z, s1, s2)};
}

}  // namespace

TEST_CASE("both sides of the vertical Yang-Baxter equation balance") {
    Rng rng(23);
    for (int J : {1, 2, 3}) {
        for (int trial = 0; trial < 70; ++trial) {
            Draw d = random_draw(rng, J, trial % 3);
            YbeBoundary bd;
            bd.i1 = static_cast<int>(rng.uniform_int(J + 1));
            bd.j1 = static_cast<int>(rng.uniform_int(J + 1));
            bd.a = static_cast<int>(rng.uniform_int(7));
            bd.b = static_cast<int>(rng.uniform_int(7));
            bd.c = static_cast<int>(rng.uniform_int(bd.b + 2));
            if (bd.j3() < 0) continue;
            auto terms = ybe_terms(d.v1, d.v2, d.cross, bd);
            CHECK(std::abs(terms.lhs_sum() - terms.rhs_sum()) < 1e-10);
        }
    }
}

TEST_CASE("empty boundary reduces to the single empty-crossing product") {
    Rng rng(29);
    Draw d = random_draw(rng, 1, 0);
    YbeBoundary bd{0, 0, 0, 0, 0};
    auto terms = ybe_terms(d.v1, d.v2, d.cross, bd);
    CHECK(terms.lhs[0] == doctest::Approx(terms.rhs[0]).epsilon(1e-12));
    CHECK(terms.lhs[1] == 0.0);
    CHECK(terms.rhs[1] == 0.0);
}

TEST_CASE("boundary row terms are the large-occupancy limits") {
    BetaVertexParams p{0.35, 0.8, -0.6, -0.45};
    for (int j1 : {0, 1})
        for (int b : {0, 2, 5})
            for (int c = 0; c <= b + 1; ++c) {
                YbeBoundary inf_bd{0, j1, kInfinityBoundary, b, c};
                auto lim = ybe_terms(p.vertex1(), p.vertex2(), p.cross(), inf_bd);
                YbeBoundary fin_bd{0, j1, 60, b, c};
                auto fin = ybe_terms(p.vertex1(), p.vertex2(), p.cross(), fin_bd);
                for (int k = 0; k <= 1; ++k) {
                    CHECK(std::abs(lim.lhs[k] - fin.lhs[k]) < 1e-8);
                    CHECK(std::abs(lim.rhs[k] - fin.rhs[k]) < 1e-8);
                }
            }
}

TEST_CASE("independent bijectivisation: normalization and the blocking edge") {
    BetaVertexParams p{0.4, 1.2, -0.7, -0.5};
    YbeBoundary bd{0, 0, 3, 4, 2};
    auto down = bij_down(p, bd);
    auto up = bij_up(p, bd);
    CHECK(down[0] + down[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(up[0] + up[1] == doctest::Approx(1.0).epsilon(1e-14));
    // blocking: c = 0 with j1 = 0 forces the down outcome k1' = 0
    YbeBoundary blocked{0, 0, 3, 4, 0};
    auto pb = bij_down(p, blocked);
    CHECK(pb[1] == doctest::Approx(0.0));
    CHECK(pb[0] == doctest::Approx(1.0));
}

TEST_CASE("down transition matches the displayed closed form") {
    // p_down_{0,0}[* -> 1] expressed through phi_{q, s2^2/s1^2, s2^2}
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        double q = 0.8 * rng.uniform();
        double s1 = -0.85 + 0.6 * rng.uniform();
        double s2 = s1 * (0.3 + 0.69 * rng.uniform());
        double beta = 0.2 + 2.0 * rng.uniform();
        if (beta * s1 * s1 >= 1.0) continue;  // keep the boundary weights summable
        BetaVertexParams p{q, beta, s1, s2};
        int b = static_cast<int>(rng.uniform_int(6));
        int c = static_cast<int>(rng.uniform_int(b + 2));
        int a = static_cast<int>(rng.uniform_int(6));
        YbeBoundary bd{0, 0, a, b, c};
        if (bd.j3() < 0) continue;
        auto down = bij_down(p, bd);
        auto phi = [&](int j, int m) {
            return ips::qkernel::phi_weight(
                ips::qkernel::PhiParams{q, s2 * s2 / (s1 * s1), s2 * s2}, j, m);
        };
        auto qp = [&](double base, int e) { return std::pow(base, e); };
        double upper = (1 - qp(q, c - 1) * s1 * s1 * 0 - 0);  // silence unused warnings
        (void)upper;
        double num = (1 - (c >= 1 ? qp(q, c - 1) : 0.0) * s1 * s1) * beta * s2 * s2 *
                     (1 - qp(q, a + b - c + 1)) * phi(c - 1, b);
        double den = (1 + qp(q, c) * beta * s1 * s1) * (1 + qp(q, a + b - c) * beta * s2 * s2) *
                         phi(c, b) +
                     num;
        if (den <= 0) continue;
        CHECK(down[1] == doctest::Approx(num / den).epsilon(1e-9));
    }
}

TEST_CASE("detailed balance of the independent bijectivisation") {
    Rng rng(37);
    for (int trial = 0; trial < 100; ++trial) {
        double q = 0.85 * rng.uniform();
        double s1 = -0.85 + 0.6 * rng.uniform();
        double s2 = s1 * (0.3 + 0.69 * rng.uniform());
        double beta = 0.2 + 1.5 * rng.uniform();
        if (beta * s1 * s1 >= 1.0) continue;
        BetaVertexParams p{q, beta, s1, s2};
        YbeBoundary bd;
        bd.i1 = static_cast<int>(rng.uniform_int(2));
        bd.j1 = static_cast<int>(rng.uniform_int(2));
        bd.a = (trial % 5 == 0) ? kInfinityBoundary : static_cast<int>(rng.uniform_int(6));
        bd.b = static_cast<int>(rng.uniform_int(6));
        bd.c = static_cast<int>(rng.uniform_int(bd.b + 2));
        if (bd.a != kInfinityBoundary && bd.j3() < 0) continue;
        auto terms = ybe_terms(p.vertex1(), p.vertex2(), p.cross(), bd);
        if (terms.lhs_sum() <= 0 || terms.rhs_sum() <= 0) continue;
        auto down = bij_down(p, bd);
        auto up = bij_up(p, bd);
        for (int k1 = 0; k1 <= 1; ++k1)
            for (int k1p = 0; k1p <= 1; ++k1p) {
                double lhs = terms.lhs[k1] * down[k1p];
                double rhs = terms.rhs[k1p] * up[k1];
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
            }
    }
}

TEST_CASE("bijectivisation at the left boundary equals its finite-occupancy limit") {
    BetaVertexParams p{0.45, 0.9, -0.6, -0.4};
    for (int j1 : {0, 1})
        for (int b : {1, 4})
            for (int c = 0; c <= b; ++c) {
                YbeBoundary lim{0, j1, kInfinityBoundary, b, c};
                YbeBoundary fin{0, j1, 70, b, c};
                auto pl = bij_down(p, lim);
                auto pf = bij_down(p, fin);
                CHECK(pl[1] == doctest::Approx(pf[1]).epsilon(1e-7));
                auto ul = bij_up(p, lim);
                auto uf = bij_up(p, fin);
                CHECK(ul[1] == doctest::Approx(uf[1]).epsilon(1e-7));
            }
}

TEST_CASE("down and up jump rates: edges and pinned forms") {
    RatePair rates{1.0, 0.6};
    CHECK(rate_down(0.3, rates, 2, 5, 0).value == 0.0);       // blocked
    CHECK(rate_down(0.3, rates, 2, 5, 6).infinite);           // pushed
    CHECK(rate_up(0.3, rates, 0, 5, 2).value == 0.0);         // blocked above
    CHECK(rate_up(0.3, rates, 2, 5, 6).infinite);             // pushed up
    // q = 0 forms: alpha_prev - alpha_cur 1{b = c}
    CHECK(rate_down(0.0, rates, 3, 4, 2).value == doctest::Approx(1.0));
    CHECK(rate_down(0.0, rates, 3, 4, 4).value == doctest::Approx(0.4));
    CHECK(rate_up(0.0, rates, 3, 4, 2).value == doctest::Approx(1.0));
    CHECK(rate_up(0.0, rates, 3, 4, 4).value == doctest::Approx(0.4));
    // worked figure values
    double q = 0.37;
    RatePair ab{0.9, 0.55};
    double expect_down = (0.9 - 0.55 * q * q) * (1 - std::pow(q, 4));
    CHECK(rate_down(q, ab, 1, 5, 3).value == doctest::Approx(expect_down).epsilon(1e-13));
    double expect_up =
        (0.9 - 0.55 * q) * (1 - q) * (1 - std::pow(q, 5)) / (1 - q * q);
    CHECK(rate_up(q, ab, 1, 4, 3).value == doctest::Approx(expect_up).epsilon(1e-13));
}

TEST_CASE("epsilon expansion of the transition probabilities recovers the rates") {
    Rng rng(41);
    const double eps = 1e-5, beta = 1e6;
    int checked = 0;
    for (int trial = 0; trial < 200 && checked < 50; ++trial) {
        double q = 0.85 * rng.uniform();
        double a0 = 0.3 + 1.2 * rng.uniform();
        double a1 = a0 * (0.2 + 0.75 * rng.uniform());
        int a = static_cast<int>(rng.uniform_int(6));
        int b = static_cast<int>(rng.uniform_int(6));
        int c = static_cast<int>(rng.uniform_int(b + 2));
        double s1 = -std::sqrt(eps * a0 / beta);
        double s2 = -std::sqrt(eps * a1 / beta);
        BetaVertexParams p{q, beta, s1, s2};
        YbeBoundary bd{0, 0, a, b, c};
        if (bd.j3() < 0) continue;
        RatePair rates{a0, a1};
        auto rd = rate_down(q, rates, a, b, c);
        auto ru = rate_up(q, rates, a, b, c);
        if (rd.infinite || ru.infinite) {
            auto down = bij_down(p, bd);
            CHECK(down[1] == doctest::Approx(1.0).epsilon(1e-3));
            continue;
        }
        auto down = bij_down(p, bd);
        auto up = bij_up(p, bd);
        double slope_down = down[1] / eps;
        double slope_up = up[1] / eps;
        if (rd.value > 1e-6) {
            CHECK(slope_down == doctest::Approx(rd.value).epsilon(1e-3));
            ++checked;
        } else {
            CHECK(slope_down < 1e-3);
        }
        if (ru.value > 1e-6)
            CHECK(slope_up == doctest::Approx(ru.value).epsilon(1e-3));
        else
            CHECK(slope_up < 1e-3);
    }
    CHECK(checked >= 50);
}
