#include "ips/yangbaxter.hpp"

#include <cmath>

namespace ips::yangbaxter {

using weights::CrossParams;
using weights::VertexParams;

double YbeTerms::lhs_sum() const {
    double s = 0;
    for (double w : lhs) s += w;
    return s;
}

double YbeTerms::rhs_sum() const {
    double s = 0;
    for (double w : rhs) s += w;
    return s;
}

namespace {

std::uint64_t pack4(int a, int b, int c, int d) {
    auto u = [](int v) { return static_cast<std::uint64_t>(v) & 0xFFFF; };
    return (u(a) << 48) | (u(b) << 32) | (u(c) << 16) | u(d);
}

template <typename F>
double memo(std::unordered_map<std::uint64_t, double>* table, std::uint64_t key, F&& f) {
    if (!table) return f();
    auto it = table->find(key);
    if (it != table->end()) return it->second;
    double v = f();
    table->emplace(key, v);
    return v;
}

}  // namespace

YbeTerms ybe_terms(const VertexParams& v1, const VertexParams& v2, const CrossParams& cross,
                   const YbeBoundary& bd, YbeCache* cache) {
    const int J = v1.J >= 1 ? v1.J : 1;
    auto L1 = [&](int a, int b, int c, int d) {
        return memo(cache ? &cache->l1 : nullptr, pack4(a, b, c, d),
                    [&] { return weights::lj_weight(v1, a, b, c, d); });
    };
    auto L2 = [&](int a, int b, int c, int d) {
        return memo(cache ? &cache->l2 : nullptr, pack4(a, b, c, d),
                    [&] { return weights::lj_weight(v2, a, b, c, d); });
    };
    auto R = [&](int a, int b, int c, int d) {
        return memo(cache ? &cache->r : nullptr, pack4(a, b, c, d),
                    [&] { return weights::r_weight(cross, a, b, c, d); });
    };
    auto RB = [&](int a, int b) {
        return memo(cache ? &cache->rb : nullptr, pack4(a, b, 0, 0),
                    [&] { return weights::r_bdry_weight(cross, a, b); });
    };
    auto B1 = [&](int a) {
        return memo(cache ? &cache->b1 : nullptr, pack4(a, 0, 0, 0),
                    [&] { return weights::l_boundary_weight(v1, a); });
    };
    auto B2 = [&](int a) {
        return memo(cache ? &cache->b2 : nullptr, pack4(a, 0, 0, 0),
                    [&] { return weights::l_boundary_weight(v2, a); });
    };
    const int i1 = bd.i1, j1 = bd.j1, b = bd.b, c = bd.c;
    if (i1 < 0 || i1 > J || j1 < 0 || j1 > J || b < 0 || c < 0)
        throw InfeasibleBoundary("ybe_terms: boundary out of range");
    YbeTerms out;
    out.lhs.assign(J + 1, 0.0);
    out.rhs.assign(J + 1, 0.0);
    if (bd.a == kInfinityBoundary) {
        // left-boundary row: vertical counts at the wall are infinite
        for (int k1 = 0; k1 <= J; ++k1) {
            int k3 = b + k1 - j1;
            if (k3 < 0) continue;
            out.lhs[k1] = B1(k1) * L2(b, k1, k3, j1) * RB(k3, c);
        }
        for (int k1p = 0; k1p <= J; ++k1p) {
            int k2p = j1 + c - k1p;
            if (k2p < 0) continue;
            out.rhs[k1p] = B2(k1p) * L1(k2p, k1p, c, j1) * RB(b, k2p);
        }
        return out;
    }
    const int a = bd.a;
    const int j3 = bd.j3();
    if (j3 < 0) throw InfeasibleBoundary("ybe_terms: no conserving internal state");
    for (int k1 = 0; k1 <= J; ++k1) {
        int k2 = a + i1 - k1;
        int k3 = b + k1 - j1;
        if (k2 < 0 || k3 < 0) continue;
        out.lhs[k1] = R(j3, k2, k3, c) * L1(a, i1, k2, k1) * L2(b, k1, k3, j1);
    }
    for (int k1p = 0; k1p <= J; ++k1p) {
        int k2p = j1 + c - k1p;
        int k3p = a + b - c - j1 + k1p;
        if (k2p < 0 || k3p < 0) continue;
        out.rhs[k1p] = L2(k3p, i1, j3, k1p) * L1(k2p, k1p, c, j1) * R(k3p, a, b, k2p);
    }
    return out;
}

VertexParams BetaVertexParams::vertex1() const {
    return VertexParams::integer_spin(q, -beta * s1, s1, 1);
}

VertexParams BetaVertexParams::vertex2() const {
    return VertexParams::integer_spin(q, -beta * s2, s2, 1);
}

CrossParams BetaVertexParams::cross() const {
    return CrossParams::make(q, s2 / s1, s1, s2);
}

std::array<double, 2> bij_down(const BetaVertexParams& p, const YbeBoundary& bd) {
    YbeTerms terms = ybe_terms(p.vertex1(), p.vertex2(), p.cross(), bd);
    double total = terms.rhs_sum();
    if (total <= 0.0)
        throw NoBijectivisation("bij_down: both right-hand terms vanish");
    return {terms.rhs[0] / total, terms.rhs[1] / total};
}

std::array<double, 2> bij_up(const BetaVertexParams& p, const YbeBoundary& bd) {
    YbeTerms terms = ybe_terms(p.vertex1(), p.vertex2(), p.cross(), bd);
    double total = terms.lhs_sum();
    if (total <= 0.0)
        throw NoBijectivisation("bij_up: both left-hand terms vanish");
    return {terms.lhs[0] / total, terms.lhs[1] / total};
}

namespace {

double qpow(double q, long long k) {
    if (k == 0) return 1.0;
    double r = 1.0;
    for (long long i = 0; i < k; ++i) r *= q;
    return r;
}

}  // namespace

ExtendedRate rate_down(double q, const RatePair& rates, int a, int b, int c) {
    if (c < 0 || c > b + 1) throw Error("rate_down: need 0 <= c <= b+1");
    if (c == 0) return ExtendedRate::finite(0.0);
    if (c == b + 1) return ExtendedRate::inf();
    double drive = rates.alpha_prev - rates.alpha_cur * qpow(q, b - c);
    double wall = (a == kInfinityBoundary) ? 1.0 : 1.0 - qpow(q, static_cast<long long>(a) + b + 1 - c);
    double v = drive * wall * (1.0 - qpow(q, c)) / (1.0 - qpow(q, b - c + 1));
    return ExtendedRate::finite(v);
}

ExtendedRate rate_up(double q, const RatePair& rates, int a, int b, int c) {
    if (c < 0 || c > b + 1) throw Error("rate_up: need 0 <= c <= b+1");
    if (c == b + 1) return ExtendedRate::inf();
    if (a == 0) return ExtendedRate::finite(0.0);
    double drive = rates.alpha_prev - rates.alpha_cur * qpow(q, b - c);
    double awall = (a == kInfinityBoundary) ? 1.0 : 1.0 - qpow(q, a);
    double v = drive * awall * (1.0 - qpow(q, static_cast<long long>(b) + 1)) / (1.0 - qpow(q, b - c + 1));
    return ExtendedRate::finite(v);
}

}  // namespace ips::yangbaxter
