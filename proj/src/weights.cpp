#include "ips/weights.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace ips::weights {

using qkernel::kInfinity;
using qkernel::PhiParams;
using qkernel::phi_weight;
using qkernel::q_pochhammer;
using qkernel::q_pochhammer_inf;

namespace {

long double ipowl(long double base, long long e) {
    if (e < 0) return 1.0L / ipowl(base, -e);
    long double r = 1.0L;
    long double b = base;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

// q-Pochhammer in extended precision; intermediate factors in the fused
// series reach magnitudes far beyond double range before cancelling
long double pochl(long double a, long double q, int k) {
    if (k >= 0) {
        long double prod = 1.0L;
        long double aqi = a;
        for (int i = 0; i < k; ++i) {
            prod *= 1.0L - aqi;
            aqi *= q;
        }
        return prod;
    }
    long double prod = 1.0L;
    long double aqi = a;
    for (int i = 1; i <= -k; ++i) {
        aqi /= q;
        long double factor = 1.0L - aqi;
        if (factor == 0.0L)
            throw DivisionByZero("q_pochhammer: vanishing factor at negative index");
        prod *= factor;
    }
    return 1.0L / prod;
}

double ipow(double base, long long e) {
    if (e < 0) return 1.0 / ipow(base, -e);
    double r = 1.0;
    double b = base;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

}  // namespace

VertexParams VertexParams::integer_spin(double q, double u, double s, int J) {
    if (J < 1) throw Error("VertexParams: J must be >= 1");
    return VertexParams{q, u, s, ipow(q, J), J};
}

VertexParams VertexParams::analytic(double q, double u, double s, double qJ) {
    return VertexParams{q, u, s, qJ, 0};
}

double l1_weight(const VertexParams& p, int i1, int j1, int i2, int j2) {
    if (i1 < 0 || i2 < 0 || j1 < 0 || j1 > 1 || j2 < 0 || j2 > 1) return 0.0;
    if (i1 + j1 != i2 + j2) return 0.0;
    const double su = p.s * p.u;
    const double qg = ipow(p.q, i1);
    if (j1 == 0 && j2 == 0) return (1.0 - qg * su) / (1.0 - su);
    if (j1 == 0 && j2 == 1) return -su * (1.0 - qg) / (1.0 - su);
    if (j1 == 1 && j2 == 1) return (-su + qg * p.s * p.s) / (1.0 - su);
    return (1.0 - qg * p.s * p.s) / (1.0 - su);  // (g,1;g+1,0)
}

double fused_weight(double q, double u, double s, int J, int i1, int j1, int i2, int j2) {
    if (J < 1 || J > 4) throw Error("fused_weight: supported for 1 <= J <= 4");
    if (i1 < 0 || i2 < 0 || j1 < 0 || j1 > J || j2 < 0 || j2 > J) return 0.0;
    if (i1 + j1 != i2 + j2) return 0.0;
    // Distribute the j1 incoming paths over rows 0..J-1 q-exchangeably
    // (weight q^{#inversions}, bottom-packed arrangement dominant), then
    // stack spin-1 rows with spectral parameters u, qu, ..., q^{J-1}u.
    std::vector<std::pair<unsigned, double>> arrangements;
    double Z = 0.0;
    for (unsigned mask = 0; mask < (1u << J); ++mask) {
        if (__builtin_popcount(mask) != j1) continue;
        long long inv = 0;
        int seen = 0;
        for (int r = 0; r < J; ++r) {
            if (mask & (1u << r)) {
                inv += r - seen;
                ++seen;
            }
        }
        double w = ipow(q, inv);
        arrangements.push_back({mask, w});
        Z += w;
    }
    double total = 0.0;
    for (auto [mask, wS] : arrangements) {
        // enumerate the 2^J output-edge patterns
        for (unsigned out = 0; out < (1u << J); ++out) {
            if (__builtin_popcount(out) != j2) continue;
            double prod = 1.0;
            int v = i1;
            bool ok = true;
            for (int r = 0; r < J && ok; ++r) {
                int hin = (mask >> r) & 1;
                int hout = (out >> r) & 1;
                int vnext = v + hin - hout;
                if (vnext < 0) {
                    ok = false;
                    break;
                }
                VertexParams row{q, ipow(q, r) * u, s, q, 1};
                prod *= l1_weight(row, v, hin, vnext, hout);
                v = vnext;
            }
            if (ok && v == i2) total += wS / Z * prod;
        }
    }
    return total;
}

double lj_weight(const VertexParams& p, int i1, int j1, int i2, int j2) {
    if (i1 < 0 || i2 < 0 || j1 < 0 || j2 < 0) return 0.0;
    if (p.J >= 1 && (j1 > p.J || j2 > p.J)) return 0.0;
    if (i1 + j1 != i2 + j2) return 0.0;
    const double q = p.q, u = p.u, s = p.s, qJ = p.qJ;
    if (p.J == 1) return l1_weight(p, i1, j1, i2, j2);
    if (u == s) {
        // q-Hahn reduction: L^{(J)}_{s,s} = 1{j2 <= i1} phi_{q, qJ s^2, s^2}(j2 | i1)
        if (j2 > i1) return 0.0;
        return phi_weight(PhiParams{q, qJ * s * s, s * s}, j2, i1);
    }
    if (q == 0.0) {
        if (p.J >= 1) return fused_weight(q, u, s, p.J, i1, j1, i2, j2);
        throw Error("lj_weight: q = 0 with non-integer spin is not supported");
    }
    // regularized 4-phi-3 form, with z- and u-safe factor grouping
    const long double ql = q, ul = u, sl = s, qJl = qJ;
    long long ex = static_cast<long long>(i1) * (i1 + 2LL * j1 - 1) / 2;
    long double pref = (i1 % 2 ? -1.0L : 1.0L) * ipowl(ql, ex) * ipowl(sl, j1 + j2 - i2) *
                       pochl(ul / sl, ql, j2 - i1) /
                       (pochl(ql, ql, i2) * pochl(sl * ul, ql, i2 + j2) *
                        pochl(qJl * ipowl(ql, 1 - j1), ql, j1 - j2));
    const int kmax = std::min(i1, i2);
    long double sum = 0.0L;
    long double A = 1.0L;  // q^k (q^{-i2};q)_k / (q;q)_k
    long double q_to_k = 1.0L;
    const long double q_to_neg_i2 = ipowl(ql, -i2);
    for (int k = 0; k <= kmax; ++k) {
        long double term = A;
        term *= pochl(ipowl(ql, -i1), ql, k);
        term *= pochl(sl * ul * qJl, ql, k);
        // u^{i1} (q s / u; q)_k = u^{i1-k} prod_{i<k} (u - s q^{1+i})
        long double D = ipowl(ul, i1 - k);
        {
            long double sq = sl * ql;
            for (int i = 0; i < k; ++i) {
                D *= ul - sq;
                sq *= ql;
            }
        }
        term *= D;
        term *= pochl(sl * sl * q_to_k, ql, i2 - k);
        term *= pochl(ipowl(ql, 1 + j2 - i1) * q_to_k, ql, i2 - k);
        term *= pochl(qJl * ipowl(ql, 1 - i2 - j2) * q_to_k, ql, i2 - k);
        sum += term;
        if (k < kmax) {
            A *= ql * (1.0L - q_to_k * q_to_neg_i2) / (1.0L - ql * q_to_k);
            q_to_k *= ql;
        }
    }
    return static_cast<double>(pref * sum);
}

double l_boundary_weight(const VertexParams& p, int j2) {
    if (j2 < 0) return 0.0;
    const double nu = p.s * p.u;
    const double mu = nu * p.qJ;
    if (p.J >= 1) {
        // integer spin: (mu;q)_inf / (nu;q)_inf = 1 / (nu;q)_J, valid for any s u
        if (j2 > p.J) return 0.0;
        double head = 1.0;
        double nuqi = nu;
        for (int i = 0; i < j2; ++i) {
            head *= mu - nuqi;
            nuqi *= p.q;
        }
        return head / q_pochhammer(p.q, p.q, j2) / q_pochhammer(nu, p.q, p.J);
    }
    if (std::abs(nu) >= 1.0 || std::abs(mu) >= 1.0)
        throw NonConvergent("l_boundary_weight: |s u| >= 1");
    return phi_weight(PhiParams{p.q, mu, nu}, j2, kInfinity);
}

CrossParams CrossParams::make(double q, double z, double s1, double s2) {
    return CrossParams{q, z, s1, s2, validate_regime(q, z, s1, s2)};
}

CrossRegime validate_regime(double q, double z, double s1, double s2) {
    const double eps = 1e-12;
    bool s_open = (-1.0 < s1 && s1 < 0.0 && -1.0 < s2 && s2 < 0.0);
    bool s_halfopen = (-1.0 < s1 && s1 <= 0.0 && -1.0 < s2 && s2 <= 0.0);
    if (s_halfopen && std::abs(s2) <= std::abs(s1) && s1 != 0.0 &&
        std::abs(z - s2 / s1) <= 1e-9 * std::max(1.0, std::abs(z)))
        return CrossRegime::QHahn;
    if (q > 0.0 && q < 1.0 && s_open && z >= -eps &&
        z <= std::min({s1 / s2, s2 / s1, q / (s1 * s2)}) + eps)
        return CrossRegime::GenericQ;
    if (q == 0.0 && s_open && z >= -eps && z <= std::min(s1 / s2, s2 / s1) + eps &&
        s1 * s1 + s2 * s2 <= 1.0 + z * s1 * s2 + eps)
        return CrossRegime::QZero;
    return CrossRegime::Unchecked;
}

namespace {

// hat-R of the q = 0 specialization, Prop 3.4
double r_q0_hat(double z, double s1, double s2, int i1, int i2, int j1, int j2) {
    double num = (1.0 - z * s1 / s2 * (j2 > j1 ? 1.0 : 0.0)) *
                 (1.0 - s2 * s2 * (i1 > 0 ? 1.0 : 0.0)) *
                 (1.0 - s1 * s1 * ((i2 == 0 && j1 > 0) ? 1.0 : 0.0));
    double den = 1.0 - z * s1 * s2 * ((i1 + j2 > 0) ? 1.0 : 0.0);
    double corr = 0.0;
    if (i1 == i2 && i1 > 0 && j1 > 0) corr = (-s1) * (s2 * z - s1) / (1.0 - z * s1 * s2);
    return ipow(z, j1) * ipow(s1 * s2, -j1) * ipow(s2, 2LL * j2) * (num / den - corr);
}

double r_q0(double z, double s1, double s2, int i1, int i2, int j1, int j2) {
    if (j1 <= j2) return r_q0_hat(z, s1, s2, i1, i2, j1, j2);
    return ipow(z, j2 - i2) * ipow(s2, i2 + j2) * ipow(s1, -(i1 + j1)) *
           r_q0_hat(z, s2, s1, j2, j1, i2, i1);
}

double r_bdry_q0_hat(double z, double s1, double s2, int j1, int j2) {
    double bracket = (1.0 - z * s1 / s2 * (j2 > j1 ? 1.0 : 0.0)) * (1.0 - s2 * s2);
    if (j1 == j2 && j1 > 0) bracket += z * s1 * s2 - s1 * s1;
    return ipow(z, j1) * ipow(s1 * s2, -j1) * ipow(s2, 2LL * j2) / (1.0 - z * s1 * s2) * bracket;
}

double r_bdry_q0(double z, double s1, double s2, int j1, int j2) {
    if (j1 <= j2) return r_bdry_q0_hat(z, s1, s2, j1, j2);
    return ipow(s2, 2LL * j2) * ipow(s1, -2LL * j1) /
           (1.0 - s1 * s1 * (j2 == 0 ? 1.0 : 0.0)) * r_bdry_q0_hat(z, s2, s1, j2, j1);
}

}  // namespace

namespace {

// direct series evaluation, well conditioned for j1 <= j2 (all powers of q
// in a term are nonnegative after cancellation)
long double r_series(long double q, long double z, long double s1, long double s2, int i1,
                     int i2, int j1, int j2) {
    long long ex = static_cast<long long>(j1) * (j1 + 2LL * i2 - 1) / 2;
    long double pref = ipowl(-s1, j1) * ipowl(q, ex) * ipowl(s2, i2 + j2 - i1) *
                       pochl(z * s1 / s2, q, j2 - j1) /
                       (pochl(q, q, i1) * pochl(z * s1 * s2, q, i1 + j2) *
                        pochl(ipowl(s1, -2) * ipowl(q, 1 - i2), q, i2 - j2));
    const int kmax = std::min(i1, j1);
    long double sum = 0.0L;
    long double A = 1.0L;  // q^k (q^{-i1};q)_k / (q;q)_k
    long double q_to_k = 1.0L;
    const long double q_to_neg_i1 = ipowl(q, -i1);
    for (int k = 0; k <= kmax; ++k) {
        long double term = A;
        term *= pochl(ipowl(q, -j1), q, k);
        term *= pochl(z * s2 / s1, q, k);
        // z^{j1} (q s2/(z s1); q)_k = z^{j1-k} prod_{i<k} (z - q^{1+i} s2/s1)
        long double D = ipowl(z, j1 - k);
        {
            long double f = q * s2 / s1;
            for (int i = 0; i < k; ++i) {
                D *= z - f;
                f *= q;
            }
        }
        term *= D;
        term *= pochl(s2 * s2 * q_to_k, q, i1 - k);
        term *= pochl(ipowl(q, 1 + j2 - j1) * q_to_k, q, i1 - k);
        term *= pochl(ipowl(s1, -2) * ipowl(q, 1 - i1 - j2) * q_to_k, q, i1 - k);
        sum += term;
        if (k < kmax) {
            A *= q * (1.0L - q_to_k * q_to_neg_i1) / (1.0L - q * q_to_k);
            q_to_k *= q;
        }
    }
    return pref * sum;
}

}  // namespace

double r_weight(const CrossParams& p, int i1, int i2, int j1, int j2) {
    if (i1 < 0 || i2 < 0 || j1 < 0 || j2 < 0) return 0.0;
    if (i1 + j2 != i2 + j1) return 0.0;
    const double q = p.q, z = p.z, s1 = p.s1, s2 = p.s2;
    if (p.regime == CrossRegime::QHahn) {
        if (j2 > j1) return 0.0;
        return phi_weight(PhiParams{q, s2 * s2 / (s1 * s1), s2 * s2}, j2, j1);
    }
    if (q == 0.0) return r_q0(z, s1, s2, i1, i2, j1, j2);
    if (j1 > j2) {
        // reduce to j1 <= j2 through the spectral-role symmetry
        long double pref = ipowl(z, j2 - i2) * ipowl(s2, i2 + j2) * ipowl(s1, -(i1 + j1));
        return static_cast<double>(pref * r_series(q, z, s2, s1, j2, j1, i2, i1));
    }
    return static_cast<double>(r_series(q, z, s1, s2, i1, i2, j1, j2));
}

double r_bdry_weight(const CrossParams& p, int j1, int j2) {
    if (j1 < 0 || j2 < 0) return 0.0;
    const double q = p.q, z = p.z, s1 = p.s1, s2 = p.s2;
    if (p.regime == CrossRegime::QHahn) {
        if (j2 > j1) return 0.0;
        return phi_weight(PhiParams{q, s2 * s2 / (s1 * s1), s2 * s2}, j2, j1);
    }
    if (q == 0.0) return r_bdry_q0(z, s1, s2, j1, j2);
    long long ex = static_cast<long long>(j1) * (j1 - 1) / 2;
    double pref = (j1 % 2 ? -1.0 : 1.0) * ipow(q, ex) * ipow(s2, 2LL * j2) *
                  q_pochhammer(s1 * z / s2, q, j2 - j1) /
                  (q_pochhammer(q, q, j2) * q_pochhammer(s2 * s2, q, j1)) *
                  q_pochhammer_inf(s2 * s2, q) / q_pochhammer_inf(z * s1 * s2, q);
    const std::array<double, 2> upper = {z * s2 / s1, ipow(q, j2 - j1) * z * s1 / s2};
    const std::array<double, 2> lower = {ipow(q, j2 - j1 + 1), ipow(q, 1 - j1) * z / (s1 * s2)};
    return pref * qkernel::q_hyper_reg(upper, lower, j1, q, q);
}

}  // namespace ips::weights
