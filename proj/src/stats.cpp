#include "ips/stats.hpp"

#include <algorithm>
#include <cmath>

#include "ips/errors.hpp"

namespace ips::stats {

namespace {

// regularized lower incomplete gamma by series (for x < a+1)
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// regularized upper incomplete gamma by continued fraction (for x >= a+1)
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double kolmogorov_q(double lambda) {
    if (lambda < 1e-10) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        sign = -sign;
        if (std::abs(term) < 1e-16) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

}  // namespace

double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw Error("gamma_q: bad arguments");
    if (x == 0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_sf(double x, double k) { return gamma_q(0.5 * k, 0.5 * x); }

namespace {

// pool adjacent cells until each pooled cell holds at least min_expected
std::vector<std::pair<double, double>> pool_cells(const std::vector<double>& a,
                                                  const std::vector<double>& b,
                                                  double min_expected) {
    std::vector<std::pair<double, double>> pooled;
    double ca = 0, cb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca += a[i];
        cb += b[i];
        if (ca + cb >= min_expected) {
            pooled.emplace_back(ca, cb);
            ca = cb = 0;
        }
    }
    if (ca + cb > 0) {
        if (!pooled.empty()) {
            pooled.back().first += ca;
            pooled.back().second += cb;
        } else {
            pooled.emplace_back(ca, cb);
        }
    }
    return pooled;
}

}  // namespace

TestReport chi_square_two_sample(const std::vector<double>& counts_a,
                                 const std::vector<double>& counts_b, double level,
                                 double min_expected) {
    if (counts_a.size() != counts_b.size())
        throw InsufficientData("chi_square_two_sample: histogram sizes differ");
    double na = 0, nb = 0;
    for (double v : counts_a) na += v;
    for (double v : counts_b) nb += v;
    if (na <= 0 || nb <= 0) throw InsufficientData("chi_square_two_sample: empty histogram");
    auto pooled = pool_cells(counts_a, counts_b, min_expected);
    double k1 = std::sqrt(nb / na), k2 = std::sqrt(na / nb);
    double stat = 0;
    int cells = 0;
    for (auto& [ca, cb] : pooled) {
        if (ca + cb <= 0) continue;
        double d = k1 * ca - k2 * cb;
        stat += d * d / (ca + cb);
        ++cells;
    }
    if (cells < 2) throw InsufficientData("chi_square_two_sample: fewer than two pooled cells");
    TestReport rep;
    rep.name = "chi_square_two_sample";
    rep.statistic = stat;
    rep.dof = cells - 1;
    rep.p_value = chi2_sf(stat, rep.dof);
    rep.level = level;
    rep.pass = rep.p_value > level;
    return rep;
}

TestReport chi_square_goodness(const std::vector<double>& counts, const std::vector<double>& probs,
                               double n_samples, double level, double min_expected) {
    if (counts.size() != probs.size())
        throw InsufficientData("chi_square_goodness: size mismatch");
    std::vector<double> obs = counts, expd(probs.size());
    double psum = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        expd[i] = probs[i] * n_samples;
        psum += probs[i];
    }
    double observed_total = 0;
    for (double v : counts) observed_total += v;
    if (psum < 1.0 - 1e-12) {  // implicit remainder cell
        obs.push_back(n_samples - observed_total);
        expd.push_back((1.0 - psum) * n_samples);
    }
    // pool adjacent cells on expected counts; leftovers fold into the last cell
    std::vector<std::pair<double, double>> pooled;
    double po = 0, pe = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        po += obs[i];
        pe += expd[i];
        if (pe >= min_expected) {
            pooled.emplace_back(po, pe);
            po = pe = 0;
        }
    }
    if ((po > 0 || pe > 0) && !pooled.empty()) {
        pooled.back().first += po;
        pooled.back().second += pe;
    }
    if (pooled.size() < 2) throw InsufficientData("chi_square_goodness: fewer than two pooled cells");
    double stat = 0;
    int cells = 0;
    for (auto& [o, e] : pooled) {
        stat += (o - e) * (o - e) / e;
        ++cells;
    }
    TestReport rep;
    rep.name = "chi_square_goodness";
    rep.statistic = stat;
    rep.dof = cells - 1;
    rep.p_value = chi2_sf(stat, rep.dof);
    rep.level = level;
    rep.pass = rep.p_value > level;
    return rep;
}

namespace {

TestReport ks_report(double d, double n_eff, double level, const std::string& name) {
    double sq = std::sqrt(n_eff);
    double lambda = (sq + 0.12 + 0.11 / sq) * d;
    TestReport rep;
    rep.name = name;
    rep.statistic = d;
    rep.dof = n_eff;
    rep.p_value = kolmogorov_q(lambda);
    rep.level = level;
    rep.pass = rep.p_value > level;
    return rep;
}

}  // namespace

TestReport ks_two_sample(std::vector<double> a, std::vector<double> b, double level) {
    if (a.empty() || b.empty()) throw InsufficientData("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double xa = a[i], xb = b[j];
        if (xa <= xb) ++i;
        if (xb <= xa) ++j;
        double fa = static_cast<double>(i) / a.size();
        double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    double n_eff = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
    return ks_report(d, n_eff, level, "ks_two_sample");
}

TestReport ks_exponential(std::vector<double> samples, double rate, double level) {
    if (samples.empty()) throw InsufficientData("ks_exponential: empty sample");
    std::sort(samples.begin(), samples.end());
    double d = 0;
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = 1.0 - std::exp(-rate * samples[i]);
        d = std::max(d, std::max(f - i / n, (i + 1) / n - f));
    }
    return ks_report(d, n, level, "ks_exponential");
}

std::pair<std::vector<double>, std::vector<double>> KeyedHistogram::align(
    const KeyedHistogram& a, const KeyedHistogram& b) {
    std::vector<double> va, vb;
    auto ia = a.counts_.begin();
    auto ib = b.counts_.begin();
    while (ia != a.counts_.end() || ib != b.counts_.end()) {
        if (ib == b.counts_.end() || (ia != a.counts_.end() && ia->first < ib->first)) {
            va.push_back(static_cast<double>(ia->second));
            vb.push_back(0);
            ++ia;
        } else if (ia == a.counts_.end() || ib->first < ia->first) {
            va.push_back(0);
            vb.push_back(static_cast<double>(ib->second));
            ++ib;
        } else {
            va.push_back(static_cast<double>(ia->second));
            vb.push_back(static_cast<double>(ib->second));
            ++ia;
            ++ib;
        }
    }
    return {va, vb};
}

}  // namespace ips::stats
