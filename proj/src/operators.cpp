#include "ips/operators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ips/errors.hpp"
#include "ips/yangbaxter.hpp"

namespace ips::operators {

using weights::CrossParams;
using weights::CrossRegime;
using weights::VertexParams;

namespace {
constexpr int kParamCheck = 128;
constexpr int kSiteGuard = 1000000;
}  // namespace

// ---------------------------------------------------------------- configs

PathConfig::PathConfig(std::vector<int> occ) : g(std::move(occ)) {
    for (int v : g)
        if (v < 0) throw Error("PathConfig: negative occupancy");
    while (!g.empty() && g.back() == 0) g.pop_back();
}

void PathConfig::set_site(int i, int v) {
    if (i < 1 || v < 0) throw Error("PathConfig::set_site: bad arguments");
    if (i > static_cast<int>(g.size())) g.resize(i, 0);
    g[i - 1] = v;
    while (!g.empty() && g.back() == 0) g.pop_back();
}

long long PathConfig::total() const {
    long long t = 0;
    for (int v : g) t += v;
    return t;
}

long long PathConfig::weighted() const {
    long long t = 0;
    for (std::size_t i = 0; i < g.size(); ++i) t += static_cast<long long>(i + 1) * g[i];
    return t;
}

std::string PathConfig::str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < g.size(); ++i) os << (i ? "," : "") << g[i];
    os << ")";
    return os.str();
}

std::size_t PathConfigHash::operator()(const PathConfig& c) const {
    std::size_t h = 0x9E3779B97F4A7C15ull;
    for (int v : c.g) h = (h ^ static_cast<std::size_t>(v + 1)) * 0x100000001B3ull;
    return h;
}

ParticleConfig::ParticleConfig(std::vector<long long> positions) : x(std::move(positions)) {
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (x[i] <= x[i + 1]) throw Error("ParticleConfig: positions must strictly decrease");
    if (!x.empty() && x.back() < -static_cast<long long>(x.size()))
        throw Error("ParticleConfig: below the step tail");
    while (!x.empty() && x.back() == -static_cast<long long>(x.size())) x.pop_back();
}

std::string ParticleConfig::str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << ")";
    return os.str();
}

PathConfig gap_particle(const ParticleConfig& xc) {
    std::vector<int> g(xc.stored(), 0);
    for (int i = 1; i <= xc.stored(); ++i)
        g[i - 1] = static_cast<int>(xc.pos(i) - xc.pos(i + 1) - 1);
    return PathConfig(std::move(g));
}

ParticleConfig particle_gap(const PathConfig& g) {
    // x_n = -n + sum_{i >= n} g_i
    int n = g.support();
    std::vector<long long> x(n, 0);
    long long suffix = 0;
    for (int i = n; i >= 1; --i) {
        suffix += g.site(i);
        x[i - 1] = -i + suffix;
    }
    return ParticleConfig(std::move(x));
}

// ---------------------------------------------------------------- sequences

Sequence Sequence::constant(double c) {
    return Sequence([c](int) { return c; });
}

Sequence Sequence::geometric(double a, double r) {
    return Sequence([a, r](int i) { return a * std::pow(r, i); });
}

Sequence Sequence::prefix(std::vector<double> head, double tail) {
    return Sequence([head = std::move(head), tail](int i) {
        return i < static_cast<int>(head.size()) ? head[i] : tail;
    });
}

Sequence Sequence::swapped(int i, int j) const {
    auto base = f_;
    return Sequence([base, i, j](int k) {
        if (k == i) return base(j);
        if (k == j) return base(i);
        return base(k);
    });
}

Sequence Sequence::shifted(int k) const {
    auto base = f_;
    return Sequence([base, k](int i) { return base(i + k); });
}

Sequence Sequence::scaled(double c) const {
    auto base = f_;
    return Sequence([base, c](int i) { return c * base(i); });
}

// ---------------------------------------------------------------- model spec

ModelSpec ModelSpec::make(double q, int J, Sequence u, Sequence s) {
    if (J < 1) throw Error("ModelSpec::make: J must be >= 1");
    double qJ = std::pow(q, J);
    ModelSpec spec{q, qJ, J, std::move(u), std::move(s), 0.0};
    double worst = 0.0;
    for (int i = 0; i <= kParamCheck; ++i) {
        double ui = spec.u.at(i), si = spec.s.at(i);
        if (ui < 0 || si <= -1.0 || si > 0.0)
            throw RegimeViolation("ModelSpec: (u,s) outside the admissible ranges");
        double ratio = (-si) * (ui - si) / (1.0 - ui * si);
        if (i >= kParamCheck / 2) worst = std::max(worst, ratio);
    }
    if (worst >= 1.0 - 1e-9)
        throw RegimeViolation("ModelSpec: uniform propagation bound violated");
    spec.eps_unif = 1.0 - worst;
    return spec;
}

ModelSpec ModelSpec::make_analytic(double q, double qJ, Sequence u, Sequence s) {
    ModelSpec spec{q, qJ, 0, std::move(u), std::move(s), 0.0};
    double worst = 0.0;
    for (int i = 0; i <= kParamCheck; ++i) {
        double ui = spec.u.at(i), si = spec.s.at(i);
        if (si <= -1.0 || si > 0.0)
            throw RegimeViolation("ModelSpec: s outside (-1,0]");
        double ratio = (-si) * (ui - si) / (1.0 - ui * si);
        if (i >= kParamCheck / 2) worst = std::max(worst, ratio);
    }
    if (worst >= 1.0 - 1e-9)
        throw RegimeViolation("ModelSpec: uniform propagation bound violated");
    spec.eps_unif = 1.0 - worst;
    return spec;
}

VertexParams ModelSpec::site_params(int i) const {
    VertexParams p;
    p.q = q;
    p.u = u.at(i);
    p.s = s.at(i);
    p.qJ = qJ;
    p.J = J;
    return p;
}

CrossParams ModelSpec::swap_cross(int n) const {
    if (n < 1) throw Error("swap_cross: n >= 1 required");
    CrossParams c = CrossParams::make(q, u.at(n) / u.at(n - 1), s.at(n - 1), s.at(n));
    if (c.regime == CrossRegime::Unchecked)
        throw RegimeViolation("swap operator parameters outside every nonnegativity regime");
    return c;
}

CrossParams ModelSpec::shift_cross(int n) const {
    if (n < 1) throw Error("shift_cross: n >= 1 required");
    CrossParams c = CrossParams::make(q, u.at(n) / u.at(0), s.at(0), s.at(n));
    if (c.regime == CrossRegime::Unchecked)
        throw RegimeViolation("shift operator parameters outside every nonnegativity regime");
    return c;
}

ModelSpec ModelSpec::sigma(int n) const {
    ModelSpec out = *this;
    out.u = u.swapped(n - 1, n);
    out.s = s.swapped(n - 1, n);
    return out;
}

ModelSpec ModelSpec::shifted() const {
    ModelSpec out = *this;
    out.u = u.shifted(1);
    out.s = s.shifted(1);
    return out;
}

void ModelSpec::require_shift_domain() const {
    for (int n = 1; n <= kParamCheck; ++n) {
        shift_cross(n);
        double sn = s.at(n), s0 = s.at(0), un = u.at(n), u0 = u.at(0);
        double ratio = (-sn) * (un * s0 - u0 * sn) / (u0 - s0 * sn * un);
        if (ratio >= 1.0 + 1e-12)
            throw RegimeViolation("shift operator: ratio bound violated");
        if (n >= kParamCheck / 2 && ratio >= 1.0 - 1e-6)
            throw RegimeViolation("shift operator: uniform ratio bound violated at large n");
    }
}

// ---------------------------------------------------------------- enumeration

Enumeration Enumeration::displacement_window(int max_support, long long max_weighted) {
    Enumeration e;
    e.max_support = max_support;
    e.max_weighted = max_weighted;
    std::vector<int> cur(max_support, 0);
    // lexicographic enumeration over occupancies with sum i*g_i <= K
    std::function<void(int, long long)> rec = [&](int site, long long used) {
        if (site > max_support) {
            PathConfig c(cur);
            e.index.emplace(c, static_cast<int>(e.states.size()));
            e.states.push_back(std::move(c));
            return;
        }
        for (int v = 0; used + static_cast<long long>(site) * v <= max_weighted; ++v) {
            cur[site - 1] = v;
            rec(site + 1, used + static_cast<long long>(site) * v);
        }
        cur[site - 1] = 0;
    };
    rec(1, 0);
    return e;
}

bool Enumeration::contains(const PathConfig& g) const {
    return g.support() <= max_support && g.weighted() <= max_weighted;
}

int Enumeration::idx(const PathConfig& g) const {
    auto it = index.find(g);
    return it == index.end() ? -1 : it->second;
}

double TruncatedOperator::entry(int i, int j) const {
    for (auto& [c, v] : rows[i])
        if (c == j) return v;
    return 0.0;
}

double TruncatedOperator::row_sum(int i) const {
    double s = 0;
    for (auto& [c, v] : rows[i]) s += v;
    return s;
}

void TruncatedOperator::dump_matrix_csv(const std::string& path) const {
    std::ofstream out(path);
    out << "row_state_id,col_state_id,value\n";
    out.precision(17);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (auto& [j, v] : rows[i]) out << i << "," << j << "," << v << "\n";
}

void TruncatedOperator::dump_states_json(const std::string& path) const {
    std::ofstream out(path);
    out << "{\n";
    for (int i = 0; i < states->size(); ++i) {
        out << "  \"" << i << "\": [";
        const auto& g = states->states[i].g;
        for (std::size_t k = 0; k < g.size(); ++k) out << (k ? "," : "") << g[k];
        out << "]" << (i + 1 < states->size() ? "," : "") << "\n";
    }
    out << "}\n";
}

// ---------------------------------------------------------------- transfer

double transfer_weight(const ModelSpec& spec, const PathConfig& g, const PathConfig& gp) {
    long long h = gp.total() - g.total();
    if (h < 0) return 0.0;
    if (spec.J >= 1 && h > spec.J) return 0.0;
    double w = weights::l_boundary_weight(spec.site_params(0), static_cast<int>(h));
    if (w == 0.0) return 0.0;
    int L = std::max(g.support(), gp.support());
    for (int i = 1; i <= L; ++i) {
        long long hi = h + g.site(i) - gp.site(i);
        if (hi < 0 || (spec.J >= 1 && hi > spec.J)) return 0.0;
        w *= weights::lj_weight(spec.site_params(i), g.site(i), static_cast<int>(h), gp.site(i),
                                static_cast<int>(hi));
        if (w == 0.0) return 0.0;
        h = hi;
    }
    return h == 0 ? w : 0.0;
}

int boundary_inflow_cap(const ModelSpec& spec) {
    if (spec.J >= 1) return spec.J;
    VertexParams bdry = spec.site_params(0);
    double cum = 0.0;
    for (int h = 0; h <= 100000; ++h) {
        cum += weights::l_boundary_weight(bdry, h);
        if (1.0 - cum < 1e-16) return h;
    }
    throw NonTermination("boundary_inflow_cap: inflow mass did not exhaust");
}

SparseRow transfer_row(const ModelSpec& spec, const PathConfig& g, const Enumeration& window) {
    SparseRow out;
    double mass = 0.0;
    for (const PathConfig& gp : window.states) {
        double w = transfer_weight(spec, g, gp);
        if (w > 0.0) {
            out.entries.emplace_back(gp, w);
            mass += w;
        }
    }
    out.tail = std::max(0.0, 1.0 - mass);
    return out;
}

PathConfig transfer_sample(Rng& rng, const ModelSpec& spec, const PathConfig& g) {
    VertexParams bdry = spec.site_params(0);
    int h = -1;
    {
        double u = rng.uniform(), cum = 0.0;
        for (int h0 = 0; h0 <= (spec.J >= 1 ? spec.J : 100000); ++h0) {
            cum += weights::l_boundary_weight(bdry, h0);
            if (u < cum) {
                h = h0;
                break;
            }
        }
        if (h < 0) throw NonTermination("transfer_sample: boundary inflow CDF incomplete");
    }
    PathConfig gp;
    for (int site = 1;; ++site) {
        if (site > g.support() && h == 0) break;
        if (site > g.support() + kSiteGuard)
            throw NonTermination("transfer_sample: propagation exceeded the site guard");
        int gi = g.site(site);
        VertexParams vp = spec.site_params(site);
        double u = rng.uniform(), cum = 0.0;
        int chosen = -1, last_feasible = -1;
        for (int gpi = 0; gpi <= gi + h; ++gpi) {
            int hi = h + gi - gpi;
            if (spec.J >= 1 && hi > spec.J) continue;
            double w = weights::lj_weight(vp, gi, h, gpi, hi);
            if (w > 0.0) last_feasible = gpi;
            cum += w;
            if (u < cum) {
                chosen = gpi;
                break;
            }
        }
        if (chosen < 0) chosen = last_feasible;  // numerical slack on the last atom
        if (chosen < 0) throw NonTermination("transfer_sample: empty site distribution");
        if (chosen > 0) gp.set_site(site, chosen);
        h = h + gi - chosen;
    }
    return gp;
}

TruncatedOperator transfer_matrix(const ModelSpec& spec, const Enumeration& states) {
    TruncatedOperator op;
    op.states = &states;
    op.rows.resize(states.size());
    op.leak.assign(states.size(), 0.0);
    for (int i = 0; i < states.size(); ++i) {
        double mass = 0.0;
        for (int j = 0; j < states.size(); ++j) {
            double w = transfer_weight(spec, states.states[i], states.states[j]);
            if (w > 0.0) {
                op.rows[i].emplace_back(j, w);
                mass += w;
            }
        }
        op.leak[i] = std::max(0.0, 1.0 - mass);
    }
    return op;
}

// ---------------------------------------------------------------- swaps

namespace {

bool equal_off_pair(const PathConfig& a, const PathConfig& b, int n) {
    int top = std::max(a.support(), b.support());
    for (int i = 1; i <= top; ++i) {
        if (i == n - 1 || i == n) continue;
        if (a.site(i) != b.site(i)) return false;
    }
    return true;
}

}  // namespace

double swap_weight(const ModelSpec& spec, int n, const PathConfig& g, const PathConfig& gp) {
    CrossParams cross = spec.swap_cross(n);
    if (!equal_off_pair(g, gp, n)) return 0.0;
    if (n == 1) return weights::r_bdry_weight(cross, g.site(1), gp.site(1));
    if (g.site(n - 1) + g.site(n) != gp.site(n - 1) + gp.site(n)) return 0.0;
    return weights::r_weight(cross, gp.site(n - 1), g.site(n - 1), g.site(n), gp.site(n));
}

namespace {

SparseRow pair_swap_row(const CrossParams& cross, int n, const PathConfig& g, double eps_tail) {
    SparseRow out;
    if (n == 1) {
        int g1 = g.site(1);
        double cum = 0.0;
        for (int j2 = 0;; ++j2) {
            double w = weights::r_bdry_weight(cross, g1, j2);
            if (w > 0.0) {
                PathConfig t = g;
                t.set_site(1, j2);
                out.entries.emplace_back(std::move(t), w);
            }
            cum += w;
            if (1.0 - cum < eps_tail) break;
            if (j2 > 100000) throw NonTermination("swap_row: boundary row did not exhaust");
        }
        out.tail = std::max(0.0, 1.0 - cum);
        return out;
    }
    int sum = g.site(n - 1) + g.site(n);
    for (int j2 = 0; j2 <= sum; ++j2) {
        double w = weights::r_weight(cross, sum - j2, g.site(n - 1), g.site(n), j2);
        if (w <= 0.0) continue;
        PathConfig t = g;
        t.set_site(n - 1, sum - j2);
        t.set_site(n, j2);
        out.entries.emplace_back(std::move(t), w);
    }
    return out;
}

}  // namespace

SparseRow swap_row(const ModelSpec& spec, int n, const PathConfig& g, double eps_tail) {
    return pair_swap_row(spec.swap_cross(n), n, g, eps_tail);
}

PathConfig swap_sample(Rng& rng, const ModelSpec& spec, int n, const PathConfig& g) {
    SparseRow row = swap_row(spec, n, g);
    double u = rng.uniform(), cum = 0.0;
    for (auto& [cfg, w] : row.entries) {
        cum += w;
        if (u < cum) return cfg;
    }
    return row.entries.empty() ? g : row.entries.back().first;
}

TruncatedOperator swap_matrix(const ModelSpec& spec, int n, const Enumeration& states) {
    TruncatedOperator op;
    op.states = &states;
    op.rows.resize(states.size());
    op.leak.assign(states.size(), 0.0);
    for (int i = 0; i < states.size(); ++i) {
        SparseRow row = swap_row(spec, n, states.states[i]);
        op.leak[i] = row.tail;
        for (auto& [cfg, w] : row.entries) {
            int j = states.idx(cfg);
            if (j >= 0)
                op.rows[i].emplace_back(j, w);
            else
                op.leak[i] += w;
        }
    }
    return op;
}

// ---------------------------------------------------------------- shift

namespace {

long long suffix_sum(const PathConfig& c, int from) {
    long long t = 0;
    for (int i = std::max(1, from); i <= c.support(); ++i) t += c.site(i);
    return t;
}

}  // namespace

double shift_weight(const ModelSpec& spec, const PathConfig& g, const PathConfig& d) {
    int M = 1 + std::max(g.support(), d.support());
    double w = 1.0;
    long long h_prev = 0;
    for (int m = 1; m <= M; ++m) {
        long long h = suffix_sum(d, m) - suffix_sum(g, m + 1);
        if (h < 0) return 0.0;
        double factor;
        if (m == 1) {
            factor = weights::r_bdry_weight(spec.shift_cross(1), g.site(1), static_cast<int>(h));
        } else {
            factor = weights::r_weight(spec.shift_cross(m), d.site(m - 1),
                                       static_cast<int>(h_prev), g.site(m), static_cast<int>(h));
        }
        w *= factor;
        if (w == 0.0) return 0.0;
        h_prev = h;
    }
    return w;
}

namespace {

void shift_rec(const ModelSpec& spec, PathConfig cur, int m, double weight, double eps,
               SparseRow& out) {
    if (weight < eps) {
        out.tail += weight;
        return;
    }
    if (m >= 2 && m - 1 > cur.support()) {
        out.entries.emplace_back(std::move(cur), weight);
        return;
    }
    if (m > kSiteGuard) throw NonTermination("shift_row: swap cascade exceeded the site guard");
    SparseRow local = pair_swap_row(spec.shift_cross(m), m, cur, eps / std::max(weight, 1e-300));
    out.tail += weight * local.tail;
    for (auto& [cfg, w] : local.entries) shift_rec(spec, cfg, m + 1, weight * w, eps, out);
}

}  // namespace

SparseRow shift_row(const ModelSpec& spec, const PathConfig& g, double eps_tail) {
    SparseRow raw;
    shift_rec(spec, g, 1, 1.0, eps_tail, raw);
    // merge duplicate targets
    std::unordered_map<PathConfig, double, PathConfigHash> acc;
    for (auto& [cfg, w] : raw.entries) acc[cfg] += w;
    SparseRow out;
    out.tail = raw.tail;
    out.entries.assign(acc.begin(), acc.end());
    std::sort(out.entries.begin(), out.entries.end(),
              [](const auto& a, const auto& b) { return a.first.g < b.first.g; });
    return out;
}

PathConfig shift_sample(Rng& rng, const ModelSpec& spec, const PathConfig& g) {
    PathConfig cur = g;
    for (int m = 1;; ++m) {
        if (m >= 2 && m - 1 > cur.support()) return cur;
        if (m > kSiteGuard) throw NonTermination("shift_sample: swap cascade exceeded the guard");
        SparseRow local = pair_swap_row(spec.shift_cross(m), m, cur, 1e-15);
        double u = rng.uniform(), cum = 0.0;
        bool done = false;
        for (auto& [cfg, w] : local.entries) {
            cum += w;
            if (u < cum) {
                cur = cfg;
                done = true;
                break;
            }
        }
        if (!done && !local.entries.empty()) cur = local.entries.back().first;
    }
}

TruncatedOperator shift_matrix(const ModelSpec& spec, const Enumeration& states) {
    spec.require_shift_domain();
    TruncatedOperator op;
    op.states = &states;
    op.rows.resize(states.size());
    op.leak.assign(states.size(), 0.0);
    for (int i = 0; i < states.size(); ++i) {
        SparseRow row = shift_row(spec, states.states[i]);
        op.leak[i] = row.tail;
        for (auto& [cfg, w] : row.entries) {
            int j = states.idx(cfg);
            if (j >= 0)
                op.rows[i].emplace_back(j, w);
            else
                op.leak[i] += w;
        }
    }
    return op;
}

// ---------------------------------------------------------------- intertwining

namespace {

Enumeration target_window(const std::vector<PathConfig>& interior, int extra_support,
                          long long extra_weight) {
    int sup = 1;
    long long wt = 1;
    for (const PathConfig& g : interior) {
        sup = std::max(sup, g.support());
        wt = std::max(wt, g.weighted());
    }
    return Enumeration::displacement_window(sup + extra_support, wt + extra_weight);
}

}  // namespace

IntertwiningReport verify_intertwining_swap(const ModelSpec& spec, int n,
                                            const std::vector<PathConfig>& interior) {
    ModelSpec spec_sigma = spec.sigma(n);
    Enumeration targets = target_window(interior, 2, 8);
    const int hcap = boundary_inflow_cap(spec);
    IntertwiningReport rep;
    for (const PathConfig& g : interior) {
        for (const PathConfig& gpp : targets.states) {
            // left side: sum over the swap fiber through the target
            double lhs = 0.0;
            if (n == 1) {
                long long top =
                    hcap + g.total() - (gpp.total() - gpp.site(1));
                for (long long v = 0; v <= top; ++v) {
                    PathConfig mid = gpp;
                    mid.set_site(1, static_cast<int>(v));
                    double pw = swap_weight(spec, 1, mid, gpp);
                    if (pw == 0.0) continue;
                    lhs += transfer_weight(spec, g, mid) * pw;
                }
            } else {
                int pair_sum = gpp.site(n - 1) + gpp.site(n);
                for (int v = 0; v <= pair_sum; ++v) {
                    PathConfig mid = gpp;
                    mid.set_site(n - 1, v);
                    mid.set_site(n, pair_sum - v);
                    double pw = swap_weight(spec, n, mid, gpp);
                    if (pw == 0.0) continue;
                    lhs += transfer_weight(spec, g, mid) * pw;
                }
            }
            // right side: sum over the swap fiber through the source
            double rhs = 0.0;
            if (n == 1) {
                double cum = 0.0;
                for (long long v = 0; v <= 100000; ++v) {
                    PathConfig mid = g;
                    mid.set_site(1, static_cast<int>(v));
                    double pw = swap_weight(spec, 1, g, mid);
                    cum += pw;
                    if (pw > 0.0) rhs += pw * transfer_weight(spec_sigma, mid, gpp);
                    if (v > g.site(1) && 1.0 - cum < 1e-15) break;
                }
                rep.tail_bound = std::max(rep.tail_bound, 1.0 - cum);
            } else {
                int pair_sum = g.site(n - 1) + g.site(n);
                for (int v = 0; v <= pair_sum; ++v) {
                    PathConfig mid = g;
                    mid.set_site(n - 1, v);
                    mid.set_site(n, pair_sum - v);
                    double pw = swap_weight(spec, n, g, mid);
                    if (pw == 0.0) continue;
                    rhs += pw * transfer_weight(spec_sigma, mid, gpp);
                }
            }
            rep.residual = std::max(rep.residual, std::abs(lhs - rhs));
        }
    }
    return rep;
}

namespace {

// enumerate {g' : the shift operator can map g' to gpp}, i.e. configurations
// whose occupation tails are dominated by those of gpp, with the site-1
// coordinate capped through the transfer inflow bound
void shift_fiber_rec(const PathConfig& gpp, int site, int max_site, long long site1_cap,
                     PathConfig& cur, std::vector<PathConfig>& out) {
    if (site > max_site) {
        out.push_back(cur);
        return;
    }
    long long cap = site == 1 ? site1_cap : 0;
    if (site >= 2) {
        for (int l = site - 1; l <= gpp.support(); ++l) cap += gpp.site(l);
    }
    for (long long v = 0; v <= cap; ++v) {
        cur.set_site(site, static_cast<int>(v));
        shift_fiber_rec(gpp, site + 1, max_site, site1_cap, cur, out);
    }
    cur.set_site(site, 0);
}

}  // namespace

IntertwiningReport verify_intertwining_shift(const ModelSpec& spec,
                                             const std::vector<PathConfig>& interior) {
    spec.require_shift_domain();
    if (spec.J < 1)
        throw Error("verify_intertwining_shift: integer spin required");
    ModelSpec spec_sh = spec.shifted();
    Enumeration targets = target_window(interior, 2, 6);
    const int hcap = boundary_inflow_cap(spec);
    IntertwiningReport rep;
    for (const PathConfig& g : interior) {
        for (const PathConfig& gpp : targets.states) {
            // left side: T then B, over tail-dominated intermediates
            double lhs = 0.0;
            {
                std::vector<PathConfig> fiber;
                PathConfig cur;
                long long site1_cap = g.total() + hcap;
                shift_fiber_rec(gpp, 1, gpp.support() + 1, site1_cap, cur, fiber);
                for (const PathConfig& mid : fiber) {
                    double tw = transfer_weight(spec, g, mid);
                    if (tw == 0.0) continue;
                    lhs += tw * shift_weight(spec, mid, gpp);
                }
            }
            // right side: B then T_shifted, intermediates via inflow profiles
            double rhs = 0.0;
            {
                int L = std::max(g.support(), gpp.support()) + 1;
                std::vector<int> h(L + 1, 0);
                std::function<void(int, PathConfig&)> rec = [&](int site, PathConfig& d) {
                    if (site > L) {
                        if (h[L] != 0) return;
                        double bw = shift_weight(spec, g, d);
                        if (bw == 0.0) return;
                        rhs += bw * transfer_weight(spec_sh, d, gpp);
                        return;
                    }
                    for (int hi = 0; hi <= spec.J; ++hi) {
                        int prev = site == 1 ? h[0] : h[site - 1];
                        int di = gpp.site(site) + hi - prev;
                        if (di < 0) continue;
                        h[site] = hi;
                        d.set_site(site, di);
                        rec(site + 1, d);
                        d.set_site(site, 0);
                    }
                };
                for (int h0 = 0; h0 <= spec.J; ++h0) {
                    h[0] = h0;
                    PathConfig d;
                    rec(1, d);
                }
            }
            rep.residual = std::max(rep.residual, std::abs(lhs - rhs));
        }
    }
    return rep;
}

// ---------------------------------------------------------------- bijectivised steps

ModelSpec BetaSpec::model() const {
    return ModelSpec::make(q, 1, s.scaled(-beta), s);
}

VertexParams BetaSpec::site_params(int i) const {
    return VertexParams::integer_spin(q, -beta * s.at(i), s.at(i), 1);
}

namespace {

struct StepData {
    yangbaxter::YbeBoundary bd;
    yangbaxter::BetaVertexParams bvp;
};

StepData step_data(const BetaSpec& spec, int n, const PathConfig& g, const PathConfig& d_next,
                   int param_lo) {
    if (param_lo < 0) param_lo = n - 1;
    long long i1 = (n == 1) ? 0
                            : suffix_sum(d_next, n - 1) - suffix_sum(g, n - 1);
    long long j1 = suffix_sum(d_next, n + 1) - suffix_sum(g, n + 1);
    if (i1 < 0 || i1 > 1 || j1 < 0 || j1 > 1)
        throw InfeasibleConditioning("bijectivised step: boundary occupation not in {0,1}");
    yangbaxter::YbeBoundary bd;
    bd.i1 = static_cast<int>(i1);
    bd.j1 = static_cast<int>(j1);
    bd.a = (n == 1) ? yangbaxter::kInfinityBoundary : g.site(n - 1);
    bd.b = g.site(n);
    bd.c = d_next.site(n);
    yangbaxter::BetaVertexParams bvp{spec.q, spec.beta, spec.s.at(param_lo), spec.s.at(n)};
    return {bd, bvp};
}

// outcome configs of a down step, indexed by k1' in {0,1}; feasible flags
struct DownOutcomes {
    std::array<PathConfig, 2> cfg;
    std::array<bool, 2> ok{false, false};
};

DownOutcomes down_outcomes(int n, const PathConfig& g, const yangbaxter::YbeBoundary& bd) {
    DownOutcomes out;
    for (int k = 0; k <= 1; ++k) {
        long long dn = bd.j1 + bd.c - k;
        if (dn < 0) continue;
        PathConfig d = g;
        if (n >= 2) {
            long long dnm1 = static_cast<long long>(bd.a) + bd.b - bd.c - bd.j1 + k;
            if (dnm1 < 0) continue;
            d.set_site(n - 1, static_cast<int>(dnm1));
        }
        d.set_site(n, static_cast<int>(dn));
        out.cfg[k] = std::move(d);
        out.ok[k] = true;
    }
    return out;
}

struct UpOutcomes {
    std::array<PathConfig, 2> cfg;
    std::array<bool, 2> ok{false, false};
};

UpOutcomes up_outcomes(int n, const PathConfig& d_next, const yangbaxter::YbeBoundary& bd) {
    UpOutcomes out;
    for (int k = 0; k <= 1; ++k) {
        long long gn = static_cast<long long>(bd.b) + k - bd.j1;
        if (gn < 0) continue;
        PathConfig gp = d_next;
        if (n >= 2) {
            long long gnm1 = static_cast<long long>(bd.a) + bd.i1 - k;
            if (gnm1 < 0) continue;
            gp.set_site(n - 1, static_cast<int>(gnm1));
        }
        gp.set_site(n, static_cast<int>(gn));
        out.cfg[k] = std::move(gp);
        out.ok[k] = true;
    }
    return out;
}

}  // namespace

PathConfig down_step(Rng& rng, const BetaSpec& spec, int n, const PathConfig& g,
                     const PathConfig& g_next, const PathConfig& d_next, int param_lo) {
    (void)g_next;  // the independent bijectivisation does not depend on k1
    StepData sd = step_data(spec, n, g, d_next, param_lo);
    auto p = yangbaxter::bij_down(sd.bvp, sd.bd);
    DownOutcomes out = down_outcomes(n, g, sd.bd);
    double p0 = out.ok[0] ? p[0] : 0.0;
    double p1 = out.ok[1] ? p[1] : 0.0;
    if (p0 + p1 <= 0.0) throw InfeasibleConditioning("down_step: no feasible outcome");
    int k = (rng.uniform() * (p0 + p1) < p0) ? 0 : 1;
    return out.cfg[k];
}

double down_step_prob(const BetaSpec& spec, int n, const PathConfig& g, const PathConfig& g_next,
                      const PathConfig& d_next, const PathConfig& d, int param_lo) {
    (void)g_next;
    StepData sd = step_data(spec, n, g, d_next, param_lo);
    auto p = yangbaxter::bij_down(sd.bvp, sd.bd);
    DownOutcomes out = down_outcomes(n, g, sd.bd);
    for (int k = 0; k <= 1; ++k)
        if (out.ok[k] && out.cfg[k] == d) return p[k];
    return 0.0;
}

PathConfig up_step(Rng& rng, const BetaSpec& spec, int n, const PathConfig& g,
                   const PathConfig& d, const PathConfig& d_next, int param_lo) {
    (void)d;
    StepData sd = step_data(spec, n, g, d_next, param_lo);
    auto p = yangbaxter::bij_up(sd.bvp, sd.bd);
    UpOutcomes out = up_outcomes(n, d_next, sd.bd);
    double p0 = out.ok[0] ? p[0] : 0.0;
    double p1 = out.ok[1] ? p[1] : 0.0;
    if (p0 + p1 <= 0.0) throw InfeasibleConditioning("up_step: no feasible outcome");
    int k = (rng.uniform() * (p0 + p1) < p0) ? 0 : 1;
    return out.cfg[k];
}

double up_step_prob(const BetaSpec& spec, int n, const PathConfig& g, const PathConfig& d,
                    const PathConfig& d_next, const PathConfig& g_next, int param_lo) {
    (void)d;
    StepData sd = step_data(spec, n, g, d_next, param_lo);
    auto p = yangbaxter::bij_up(sd.bvp, sd.bd);
    UpOutcomes out = up_outcomes(n, d_next, sd.bd);
    for (int k = 0; k <= 1; ++k)
        if (out.ok[k] && out.cfg[k] == g_next) return p[k];
    return 0.0;
}

namespace {

/// Intermediate slice g_[m] of the shift tower spanned by (g, d):
/// d_1..d_{m-1}, then h_m, then g_{m+1}, g_{m+2}, ...
PathConfig tower_slice(const PathConfig& g, const PathConfig& d, int m) {
    if (m == 0) return g;
    PathConfig slice;
    for (int l = 1; l < m; ++l)
        if (d.site(l) > 0) slice.set_site(l, d.site(l));
    long long h = suffix_sum(d, m) - suffix_sum(g, m + 1);
    if (h < 0) throw Error("tower_slice: inconsistent pair (negative edge count)");
    if (h > 0) slice.set_site(m, static_cast<int>(h));
    for (int l = m + 1; l <= g.support(); ++l)
        if (g.site(l) > 0) slice.set_site(l, g.site(l));
    return slice;
}

int tower_height(const PathConfig& a, const PathConfig& b, const PathConfig& c,
                 const PathConfig& d) {
    return 2 + std::max(std::max(a.support(), b.support()), std::max(c.support(), d.support()));
}

}  // namespace

PathConfig down_bullet(Rng& rng, const BetaSpec& spec, const PathConfig& g,
                       const PathConfig& g_next, const PathConfig& d_next) {
    int M = tower_height(g, g_next, d_next, d_next);
    PathConfig cur = g;
    PathConfig upper_prev = g_next;
    for (int m = 1; m <= M; ++m) {
        PathConfig upper = tower_slice(g_next, d_next, m);
        PathConfig nxt = down_step(rng, spec, m, cur, upper_prev, upper, 0);
        cur = std::move(nxt);
        upper_prev = std::move(upper);
        M = std::max(M, tower_height(g, cur, d_next, upper_prev));
        if (m > kSiteGuard) throw NonTermination("down_bullet: tower did not stabilize");
    }
    return cur;
}

double down_bullet_prob(const BetaSpec& spec, const PathConfig& g, const PathConfig& g_next,
                        const PathConfig& d_next, const PathConfig& d) {
    int M = tower_height(g, g_next, d_next, d);
    double p = 1.0;
    for (int m = 1; m <= M; ++m) {
        PathConfig lo_prev = tower_slice(g, d, m - 1);
        PathConfig lo = tower_slice(g, d, m);
        PathConfig up_prev = tower_slice(g_next, d_next, m - 1);
        PathConfig up = tower_slice(g_next, d_next, m);
        p *= down_step_prob(spec, m, lo_prev, up_prev, up, lo, 0);
        if (p == 0.0) return 0.0;
    }
    return p;
}

PathConfig up_bullet(Rng& rng, const BetaSpec& spec, const PathConfig& g, const PathConfig& d,
                     const PathConfig& d_next) {
    int M = tower_height(g, d, d_next, d_next);
    PathConfig cur = d_next;  // g'_[M] = d' once the tower has stabilized
    for (int m = M; m >= 1; --m) {
        PathConfig lo_prev = tower_slice(g, d, m - 1);
        PathConfig lo = tower_slice(g, d, m);
        cur = up_step(rng, spec, m, lo_prev, lo, cur, 0);
    }
    return cur;
}

double up_bullet_prob(const BetaSpec& spec, const PathConfig& g, const PathConfig& d,
                      const PathConfig& d_next, const PathConfig& g_next) {
    int M = tower_height(g, d, d_next, g_next);
    double p = 1.0;
    for (int m = 1; m <= M; ++m) {
        PathConfig lo_prev = tower_slice(g, d, m - 1);
        PathConfig lo = tower_slice(g, d, m);
        PathConfig up_prev = tower_slice(g_next, d_next, m - 1);
        PathConfig up = tower_slice(g_next, d_next, m);
        p *= up_step_prob(spec, m, lo_prev, lo, up, up_prev, 0);
        if (p == 0.0) return 0.0;
    }
    return p;
}

}  // namespace ips::operators
