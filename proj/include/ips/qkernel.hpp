#pragma once

#include <limits>
#include <span>

#include "ips/errors.hpp"
#include "ips/rng.hpp"

namespace ips::qkernel {

/// Sentinel for an infinite row count m in the q-beta-binomial weights.
inline constexpr int kInfinity = std::numeric_limits<int>::max();

/// q-Pochhammer symbol (a;q)_k. Negative k uses the standard convention
/// (a;q)_{-m} = 1 / prod_{i=1}^{m} (1 - a q^{-i}); a vanishing factor there
/// raises DivisionByZero.
double q_pochhammer(double a, double q, int k);

/// Infinite product (a;q)_inf for |a| < 1e300, 0 <= q < 1. Factors are
/// multiplied until |a q^i| < 1e-17, then a log-tail correction is applied.
double q_pochhammer_inf(double a, double q);

/// Regularized terminating q-hypergeometric series
///   sum_{k=0}^{n} z^k (q^{-n};q)_k / (q;q)_k
///       * prod_i (upper_i;q)_k * prod_i (lower_i q^k;q)_{n-k}.
/// The regularization removes all denominators in the lower parameters.
/// Requires q in (0,1) when n >= 1.
double q_hyper_reg(std::span<const double> upper, std::span<const double> lower, int n, double q,
                   double z);

enum class PhiRegime {
    MuInUnit_NuBelow,   // 0 <= mu <= 1 and nu <= mu
    NuNonpos_MuIsQJNu,  // nu <= 0 and mu = q^J nu for an integer J >= 0
    Unchecked,
};

struct PhiParams {
    double q = 0;
    double mu = 0;
    double nu = 0;
    PhiRegime regime = PhiRegime::Unchecked;
};

/// Classify (q, mu, nu) into the strongest nonnegativity regime it satisfies.
PhiRegime classify_phi_regime(double q, double mu, double nu);

/// q-deformed beta-binomial weight phi_{q,mu,nu}(j | m); m = kInfinity selects
/// the infinite-row form. Returns 0 outside 0 <= j <= m.
double phi_weight(const PhiParams& p, int j, int m);

/// Inverse-CDF sample from phi_{q,mu,nu}(. | m). The regime must certify
/// nonnegative weights.
int phi_sample(Rng& rng, const PhiParams& p, int m);

}  // namespace ips::qkernel
