#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ips/weights.hpp"

namespace ips::yangbaxter {

/// Fixed boundary data of one vertical Yang-Baxter equation, in the
/// shorthand a = i2, b = i3, c = j2; j3 is recovered by path conservation.
/// a == kInfinityBoundary encodes the left-boundary row i2 = j3 = infinity.
inline constexpr int kInfinityBoundary = qkernel::kInfinity;

struct YbeBoundary {
    int i1 = 0;
    int j1 = 0;
    int a = 0;
    int b = 0;
    int c = 0;

    int j3() const {
        if (a == kInfinityBoundary) return kInfinityBoundary;
        return a + b - c + i1 - j1;
    }
};

struct YbeTerms {
    std::vector<double> lhs;  // indexed by the internal edge k1 = 0..J
    std::vector<double> rhs;  // indexed by k1'
    double lhs_sum() const;
    double rhs_sum() const;
};

/// Memoizes the vertex and cross weights of one parameter draw across many
/// boundary evaluations.
struct YbeCache {
    std::unordered_map<std::uint64_t, double> l1, l2, r, b1, b2, rb;
};

/// Enumerate the terms on both sides of the vertical Yang-Baxter equation
/// for vertex parameters (u1,s1), (u2,s2) and the cross weight at z = u2/u1.
YbeTerms ybe_terms(const weights::VertexParams& v1, const weights::VertexParams& v2,
                   const weights::CrossParams& cross, const YbeBoundary& bd,
                   YbeCache* cache = nullptr);

/// The J = 1, u_i = -beta s_i subfamily in which the independent
/// bijectivisation has explicit transition probabilities.
struct BetaVertexParams {
    double q = 0;
    double beta = 0;
    double s1 = 0;  // |s2| <= |s1|, both in (-1,0)
    double s2 = 0;

    weights::VertexParams vertex1() const;
    weights::VertexParams vertex2() const;
    weights::CrossParams cross() const;
};

/// Down transition of the independent bijectivisation: distribution of the
/// right-hand internal edge k1' in {0,1}, independent of k1.
std::array<double, 2> bij_down(const BetaVertexParams& p, const YbeBoundary& bd);

/// Up transition: distribution of the left-hand internal edge k1 in {0,1}.
std::array<double, 2> bij_up(const BetaVertexParams& p, const YbeBoundary& bd);

struct RatePair {
    double alpha_prev = 0;  // alpha_{n-1}
    double alpha_cur = 0;   // alpha_n, with alpha_prev >= alpha_cur
};

/// Extended-real jump rate; pushing events are tagged infinite rather than
/// carried as a float infinity through arithmetic.
struct ExtendedRate {
    double value = 0;
    bool infinite = false;

    static ExtendedRate inf() { return {0.0, true}; }
    static ExtendedRate finite(double v) { return {v, false}; }
};

/// Down jump rate of the continuous-time rewriting walk:
/// (a_prev - a_cur q^{b-c})(1-q^{a+b+1-c})(1-q^c)/(1-q^{b-c+1});
/// zero at c = 0 (blocking), infinite at c = b+1 (pushing);
/// a may be kInfinityBoundary.
ExtendedRate rate_down(double q, const RatePair& rates, int a, int b, int c);

/// Up jump rate: (a_prev - a_cur q^{b-c})(1-q^a)(1-q^{b+1})/(1-q^{b-c+1});
/// zero at a = 0 (blocking), infinite at c = b+1 (pushing).
ExtendedRate rate_up(double q, const RatePair& rates, int a, int b, int c);

}  // namespace ips::yangbaxter
