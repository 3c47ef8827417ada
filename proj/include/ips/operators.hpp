#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ips/rng.hpp"
#include "ips/weights.hpp"

namespace ips::operators {

/// Vertex-model slice: finitely supported occupancies (g_1, g_2, ...),
/// stored trimmed. The convention g_0 = +infinity is implicit.
struct PathConfig {
    std::vector<int> g;

    PathConfig() = default;
    explicit PathConfig(std::vector<int> occ);

    int site(int i) const {  // i >= 1
        return (i >= 1 && i <= static_cast<int>(g.size())) ? g[i - 1] : 0;
    }
    void set_site(int i, int v);
    int support() const { return static_cast<int>(g.size()); }
    long long total() const;
    long long weighted() const;  // sum_i i * g_i = displacement of the particle picture
    bool operator==(const PathConfig& o) const { return g == o.g; }
    std::string str() const;
};

struct PathConfigHash {
    std::size_t operator()(const PathConfig& c) const;
};

/// Exclusion-process configuration x_1 > x_2 > ..., left-packed: x_n = -n
/// beyond the stored prefix.
struct ParticleConfig {
    std::vector<long long> x;

    ParticleConfig() = default;
    explicit ParticleConfig(std::vector<long long> positions);

    long long pos(int n) const {  // n >= 1
        return (n >= 1 && n <= static_cast<int>(x.size())) ? x[n - 1] : -n;
    }
    int stored() const { return static_cast<int>(x.size()); }
    bool operator==(const ParticleConfig& o) const { return x == o.x; }
    std::string str() const;
};

/// Gap-particle transformation g_i = x_i - x_{i+1} - 1 and its inverse.
PathConfig gap_particle(const ParticleConfig& x);
ParticleConfig particle_gap(const PathConfig& g);

/// Lazily evaluated parameter sequence (index 0,1,2,...).
class Sequence {
  public:
    Sequence() : f_([](int) { return 0.0; }) {}
    explicit Sequence(std::function<double(int)> f) : f_(std::move(f)) {}

    double at(int i) const { return f_(i); }

    static Sequence constant(double c);
    static Sequence geometric(double a, double r);  // a * r^i
    static Sequence prefix(std::vector<double> head, double tail);

    Sequence swapped(int i, int j) const;  // values at i and j exchanged
    Sequence shifted(int k = 1) const;     // drops the first k entries
    Sequence scaled(double c) const;

  private:
    std::function<double(int)> f_;
};

/// Parameter bundle of one fused stochastic six vertex transfer operator.
struct ModelSpec {
    double q = 0;
    double qJ = 0;
    int J = 0;  // integer spin, or 0 when qJ is an analytic continuation
    Sequence u;
    Sequence s;
    double eps_unif = 0;  // margin in the uniform propagation bound

    static ModelSpec make(double q, int J, Sequence u, Sequence s);
    static ModelSpec make_analytic(double q, double qJ, Sequence u, Sequence s);

    weights::VertexParams site_params(int i) const;
    weights::CrossParams swap_cross(int n) const;   // P^{(n)}: z = u_n/u_{n-1}
    weights::CrossParams shift_cross(int n) const;  // P^{(0,n)}: z = u_n/u_0

    ModelSpec sigma(int n) const;  // parameters transposed at (n-1, n)
    ModelSpec shifted() const;

    /// Throws RegimeViolation unless the shift-operator conditions (regime
    /// membership of every (u_n/u_0, s_0, s_n) plus the uniform bound) hold
    /// on a long prefix.
    void require_shift_domain() const;
};

/// Exact row-stochastic matrix over an enumerated subset of the state space,
/// with out-of-enumeration mass accumulated per row.
struct Enumeration {
    int max_support = 0;
    long long max_weighted = 0;
    std::vector<PathConfig> states;
    std::unordered_map<PathConfig, int, PathConfigHash> index;

    static Enumeration displacement_window(int max_support, long long max_weighted);
    bool contains(const PathConfig& g) const;
    int idx(const PathConfig& g) const;  // -1 if absent
    int size() const { return static_cast<int>(states.size()); }
};

struct TruncatedOperator {
    const Enumeration* states = nullptr;
    std::vector<std::vector<std::pair<int, double>>> rows;
    std::vector<double> leak;

    double entry(int i, int j) const;
    double row_sum(int i) const;
    void dump_matrix_csv(const std::string& path) const;
    void dump_states_json(const std::string& path) const;
};

/// One row of an operator as explicit (target, weight) pairs plus the mass
/// pruned below the enumeration threshold.
struct SparseRow {
    std::vector<std::pair<PathConfig, double>> entries;
    double tail = 0;
};

// -- transfer operator T ----------------------------------------------------

/// Exact matrix element T(g, g').
double transfer_weight(const ModelSpec& spec, const PathConfig& g, const PathConfig& gp);

/// Row of T(g, .) restricted to an enumeration window, entries computed
/// pairwise-exactly; tail holds the mass outside the window.
SparseRow transfer_row(const ModelSpec& spec, const PathConfig& g, const Enumeration& window);

/// Largest boundary inflow carrying all but ~1e-16 of the inflow mass.
int boundary_inflow_cap(const ModelSpec& spec);

/// Sequential sampling of one transfer step, Eq.-style boundary inflow plus
/// site-by-site splits; almost-surely terminating.
PathConfig transfer_sample(Rng& rng, const ModelSpec& spec, const PathConfig& g);

TruncatedOperator transfer_matrix(const ModelSpec& spec, const Enumeration& states);

// -- swap operators P^{(n)} --------------------------------------------------

double swap_weight(const ModelSpec& spec, int n, const PathConfig& g, const PathConfig& gp);
SparseRow swap_row(const ModelSpec& spec, int n, const PathConfig& g, double eps_tail = 1e-16);
PathConfig swap_sample(Rng& rng, const ModelSpec& spec, int n, const PathConfig& g);
TruncatedOperator swap_matrix(const ModelSpec& spec, int n, const Enumeration& states);

// -- shift operator B ---------------------------------------------------------

/// Matrix element B(g, d) as the finite product over deterministic
/// intermediate slices.
double shift_weight(const ModelSpec& spec, const PathConfig& g, const PathConfig& d);
SparseRow shift_row(const ModelSpec& spec, const PathConfig& g, double eps_tail = 1e-16);
PathConfig shift_sample(Rng& rng, const ModelSpec& spec, const PathConfig& g);
TruncatedOperator shift_matrix(const ModelSpec& spec, const Enumeration& states);

// -- intertwining checks -------------------------------------------------------

struct IntertwiningReport {
    double residual = 0;   // max |(T A - A T')(g, g'')| over checked pairs
    double tail_bound = 0; // enumeration tail mass encountered
};

IntertwiningReport verify_intertwining_swap(const ModelSpec& spec, int n,
                                            const std::vector<PathConfig>& interior);
IntertwiningReport verify_intertwining_shift(const ModelSpec& spec,
                                             const std::vector<PathConfig>& interior);

// -- bijectivised one-step couplings (J = 1, u_i = -beta s_i subfamily) --------

struct BetaSpec {
    double q = 0;
    double beta = 0;
    Sequence s;

    ModelSpec model() const;
    weights::VertexParams site_params(int i) const;
};

/// Down Markov operator D^{(n)} with swap parameter pair (in1, in2) = sites
/// whose vertex parameters drive the bijectivisation; for P^{(n)} the pair is
/// (n-1, n), for P^{(0,n)} it is (0, n).
PathConfig down_step(Rng& rng, const BetaSpec& spec, int n, const PathConfig& g,
                     const PathConfig& g_next, const PathConfig& d_next, int param_lo = -1);
double down_step_prob(const BetaSpec& spec, int n, const PathConfig& g, const PathConfig& g_next,
                      const PathConfig& d_next, const PathConfig& d, int param_lo = -1);

PathConfig up_step(Rng& rng, const BetaSpec& spec, int n, const PathConfig& g,
                   const PathConfig& d, const PathConfig& d_next, int param_lo = -1);
double up_step_prob(const BetaSpec& spec, int n, const PathConfig& g, const PathConfig& d,
                    const PathConfig& d_next, const PathConfig& g_next, int param_lo = -1);

/// Down/up Markov operators for the shift: sequential composition of
/// D^{(0,m)} / U^{(0,m)} through the tower of intertwining squares.
PathConfig down_bullet(Rng& rng, const BetaSpec& spec, const PathConfig& g,
                       const PathConfig& g_next, const PathConfig& d_next);
double down_bullet_prob(const BetaSpec& spec, const PathConfig& g, const PathConfig& g_next,
                        const PathConfig& d_next, const PathConfig& d);
PathConfig up_bullet(Rng& rng, const BetaSpec& spec, const PathConfig& g, const PathConfig& d,
                     const PathConfig& d_next);
double up_bullet_prob(const BetaSpec& spec, const PathConfig& g, const PathConfig& d,
                      const PathConfig& d_next, const PathConfig& g_next);

}  // namespace ips::operators
