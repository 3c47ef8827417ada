#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ips::stats {

struct TestReport {
    std::string name;
    double statistic = 0;
    double dof = 0;  // degrees of freedom, or the effective sample size for KS
    double p_value = 1;
    bool pass = true;
    double level = 0;
    std::uint64_t seed = 0;
    double runtime_seconds = 0;
};

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
double gamma_q(double a, double x);

/// Survival function of the chi-square distribution with k dof.
double chi2_sf(double x, double k);

/// Two-sample chi-square test on aligned histograms; cells are pooled
/// greedily until each pooled cell has at least `min_expected` entries
/// combined. Throws InsufficientData when nothing survives pooling.
TestReport chi_square_two_sample(const std::vector<double>& counts_a,
                                 const std::vector<double>& counts_b, double level = 0.001,
                                 double min_expected = 5.0);

/// Goodness-of-fit chi-square of observed counts against model
/// probabilities (plus an implicit remainder cell when probabilities sum
/// below one).
TestReport chi_square_goodness(const std::vector<double>& counts,
                               const std::vector<double>& probs, double n_samples,
                               double level = 0.001, double min_expected = 5.0);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
TestReport ks_two_sample(std::vector<double> a, std::vector<double> b, double level = 0.001);

/// One-sample KS against the exponential(rate) distribution.
TestReport ks_exponential(std::vector<double> samples, double rate, double level = 0.001);

/// Keyed histogram helper for joint-configuration tests.
class KeyedHistogram {
  public:
    void add(const std::string& key) { ++counts_[key]; }
    void merge(const KeyedHistogram& other) {
        for (auto& [k, v] : other.counts_) counts_[k] += v;
    }
    /// Align two keyed histograms on the union of keys.
    static std::pair<std::vector<double>, std::vector<double>> align(const KeyedHistogram& a,
                                                                     const KeyedHistogram& b);

  private:
    std::map<std::string, long long> counts_;
};

}  // namespace ips::stats
