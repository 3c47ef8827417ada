#include "ips/qkernel.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

namespace ips::qkernel {

double q_pochhammer(double a, double q, int k) {
    if (k >= 0) {
        double prod = 1.0;
        double aqi = a;
        for (int i = 0; i < k; ++i) {
            prod *= 1.0 - aqi;
            aqi *= q;
        }
        return prod;
    }
    // (a;q)_{-m} = 1 / prod_{i=1}^{m} (1 - a q^{-i})
    double prod = 1.0;
    double aqi = a;
    for (int i = 1; i <= -k; ++i) {
        aqi /= q;
        double factor = 1.0 - aqi;
        if (factor == 0.0) throw DivisionByZero("q_pochhammer: vanishing factor at negative index");
        prod *= factor;
    }
    return 1.0 / prod;
}

double q_pochhammer_inf(double a, double q) {
    if (std::abs(a) >= 1.0 && a != 1.0)
        throw NonConvergent("q_pochhammer_inf: |a| >= 1");
    if (a == 1.0) return 0.0;
    double prod = 1.0;
    double aqi = a;
    while (std::abs(aqi) >= 1e-17) {
        prod *= 1.0 - aqi;
        aqi *= q;
        if (prod == 0.0) return 0.0;
    }
    // log tail: sum_{i>=I} log(1 - a q^i) = -a q^I/(1-q) + O((a q^I)^2)
    return prod * std::exp(-aqi / (1.0 - q));
}

double q_hyper_reg(std::span<const double> upper, std::span<const double> lower, int n, double q,
                   double z) {
    if (n < 0) throw Error("q_hyper_reg: negative n");
    if (n >= 1 && q <= 0.0)
        throw Error("q_hyper_reg: series form requires q > 0 for n >= 1");
    long double sum = 0.0L;
    // A_k = z^k (q^{-n};q)_k / (q;q)_k via the term recurrence
    long double A = 1.0L;
    double q_pow_k = 1.0;  // q^k
    for (int k = 0; k <= n; ++k) {
        long double term = A;
        for (double a : upper) term *= static_cast<long double>(q_pochhammer(a, q, k));
        for (double b : lower) term *= static_cast<long double>(q_pochhammer(b * q_pow_k, q, n - k));
        sum += term;
        if (k < n) {
            A *= static_cast<long double>(z) * (1.0L - static_cast<long double>(q_pow_k) / std::pow(q, n)) /
                 (1.0L - static_cast<long double>(q) * q_pow_k);
            q_pow_k *= q;
        }
    }
    return static_cast<double>(sum);
}

PhiRegime classify_phi_regime(double q, double mu, double nu) {
    if (0.0 <= mu && mu <= 1.0 && nu <= mu) return PhiRegime::MuInUnit_NuBelow;
    if (nu <= 0.0) {
        // mu = q^J nu for some integer J >= 0
        if (mu == nu) return PhiRegime::NuNonpos_MuIsQJNu;
        if (nu < 0.0 && q > 0.0 && mu < 0.0) {
            double r = mu / nu;
            double j = std::log(r) / std::log(q);
            long jr = std::lround(j);
            if (jr >= 0 && std::abs(r - std::pow(q, static_cast<double>(jr))) < 1e-12)
                return PhiRegime::NuNonpos_MuIsQJNu;
        }
        if (mu == 0.0 && nu <= 0.0 && q == 0.0) return PhiRegime::NuNonpos_MuIsQJNu;
    }
    return PhiRegime::Unchecked;
}

double phi_weight(const PhiParams& p, int j, int m) {
    const double q = p.q, mu = p.mu, nu = p.nu;
    if (j < 0) return 0.0;
    if (m != kInfinity && j > m) return 0.0;
    // mu^j (nu/mu;q)_j = prod_{i=0}^{j-1} (mu - nu q^i), stable at mu = 0
    double head = 1.0;
    {
        double nuqi = nu;
        for (int i = 0; i < j; ++i) {
            head *= mu - nuqi;
            nuqi *= q;
        }
    }
    if (m == kInfinity) {
        if (std::abs(mu) >= 1.0 || std::abs(nu) >= 1.0)
            throw NonConvergent("phi_weight: infinite row needs |mu|,|nu| < 1");
        return head / q_pochhammer(q, q, j) * q_pochhammer_inf(mu, q) / q_pochhammer_inf(nu, q);
    }
    double denom = q_pochhammer(nu, q, m);
    if (denom == 0.0) throw DivisionByZero("phi_weight: (nu;q)_m vanishes");
    double qbinom = q_pochhammer(q, q, m) / (q_pochhammer(q, q, j) * q_pochhammer(q, q, m - j));
    return head * q_pochhammer(mu, q, m - j) / denom * qbinom;
}

int phi_sample(Rng& rng, const PhiParams& p, int m) {
    if (p.regime == PhiRegime::Unchecked)
        throw InvalidRegime("phi_sample: weights not certified nonnegative");
    double u = rng.uniform();
    double cum = 0.0;
    const int guard = (m == kInfinity) ? 1000000 : m;
    for (int j = 0; j <= guard; ++j) {
        cum += phi_weight(p, j, m);
        if (u < cum) return j;
    }
    if (m != kInfinity) return m;  // numerical slack on the last atom
    throw NonTermination("phi_sample: CDF accumulation did not reach u");
}

}  // namespace ips::qkernel
